"""Containment and error-policy tests for the interval core."""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from diskcap import interval as iv
from diskcap.interval import (
    DOUBLE,
    EXTENDED,
    IntervalError,
    IntervalMatrix,
    IntervalVector,
    PrecisionContext,
    ValidatedScalar,
)


def bounds(a):
    return Fraction(*a.lo.as_integer_ratio()), Fraction(*a.hi.as_integer_ratio())


finite = st.floats(min_value=-1e12, max_value=1e12, allow_nan=False)


@st.composite
def scalars(draw, ctx=DOUBLE):
    lo = draw(finite)
    width = draw(st.floats(min_value=0, max_value=1e6, allow_nan=False))
    return ValidatedScalar(lo, ctx, upper=lo + width)


def test_thin_construction_is_exact():
    x = ValidatedScalar(0.1, DOUBLE)
    assert x.is_thin()
    assert x.contains(Fraction(*(0.1).as_integer_ratio()))


def test_fraction_construction_rounds_outward():
    third = ValidatedScalar(Fraction(1, 3), DOUBLE)
    assert not third.is_thin()
    assert third.contains(Fraction(1, 3))
    assert third.width() < 1e-15


def test_string_construction_encloses_decimal():
    x = ValidatedScalar("0.1", EXTENDED)
    assert x.contains(Fraction(1, 10))


def test_big_int_rounds_outward():
    n = 10**60
    x = ValidatedScalar(n, DOUBLE)
    assert x.contains(n) and not x.is_thin()


def test_invalid_endpoints_rejected():
    with pytest.raises(IntervalError):
        ValidatedScalar(2.0, DOUBLE, upper=1.0)
    with pytest.raises(IntervalError):
        ValidatedScalar(float("nan"), DOUBLE)


def test_division_by_zero_interval_raises():
    a = ValidatedScalar(1, DOUBLE)
    b = ValidatedScalar(-1, DOUBLE, upper=2)
    with pytest.raises(IntervalError):
        iv.div(a, b)
    with pytest.raises(IntervalError):
        iv.div(a, ValidatedScalar(0, DOUBLE))


def test_sqrt_domain():
    with pytest.raises(IntervalError):
        iv.sqrt(ValidatedScalar(-1e-30, DOUBLE, upper=1))
    two = iv.sqrt(ValidatedScalar(2, DOUBLE))
    lo, hi = bounds(two)
    assert lo * lo <= 2 <= hi * hi


@given(scalars(), scalars(), st.sampled_from(["add", "sub", "mul"]))
@settings(max_examples=200)
def test_arithmetic_containment(a, b, op):
    """Endpoint combinations of the true operation stay inside the result."""
    result = getattr(iv, op)(a, b)
    rlo, rhi = bounds(result)
    for xa in bounds(a):
        for xb in bounds(b):
            exact = {"add": xa + xb, "sub": xa - xb, "mul": xa * xb}[op]
            assert rlo <= exact <= rhi


@given(scalars(), scalars())
@settings(max_examples=200)
def test_division_containment(a, b):
    if b.contains_zero():
        with pytest.raises(IntervalError):
            iv.div(a, b)
        return
    result = iv.div(a, b)
    rlo, rhi = bounds(result)
    for xa in bounds(a):
        for xb in bounds(b):
            assert rlo <= xa / xb <= rhi


@given(scalars(), st.integers(min_value=0, max_value=9))
@settings(max_examples=200)
def test_integer_power_containment(a, n):
    result = iv.pow_int(a, n)
    rlo, rhi = bounds(result)
    for x in bounds(a):
        assert rlo <= x**n <= rhi
    if n % 2 == 0 and not a.contains_zero():
        assert rlo > 0 or n == 0


def test_even_power_of_mixed_interval_starts_at_zero():
    a = ValidatedScalar(-2, DOUBLE, upper=3)
    sq = iv.pow_int(a, 2)
    assert sq.lo == 0
    assert sq.contains(9) and not sq.contains(9.5)


@given(scalars(), scalars())
def test_hull_contains_both(a, b):
    h = iv.hull(a, b)
    assert h.contains(a) and h.contains(b)


def test_mid_rad_cover():
    a = ValidatedScalar(Fraction(1, 3), DOUBLE)
    m, r = iv.mid(a), iv.rad(a)
    assert ValidatedScalar(m - r, DOUBLE, upper=m + r).contains(a)


def test_layer_conversion_rounds_outward():
    x = ValidatedScalar(Fraction(1, 3), EXTENDED)
    y = x.round_to(DOUBLE)
    assert y.contains(x) and y.ctx is DOUBLE
    z = y.round_to(EXTENDED)
    assert z.contains(y)


def test_decimal_serialization_roundtrip_encloses():
    x = iv.sqrt(ValidatedScalar(2, EXTENDED))
    lo_s, hi_s = x.endpoints_decimal()
    y = ValidatedScalar.from_decimal(lo_s, hi_s, EXTENDED)
    assert y.contains(x)
    assert y.width() < 1e-35


def test_precision_context_interning_and_widening():
    assert PrecisionContext(53) is DOUBLE
    assert DOUBLE.widen().bits == 106
    with pytest.raises(ValueError):
        PrecisionContext(8)


def test_trig_enclosures():
    import math

    ctx = DOUBLE
    for theta in [0.0, 0.5, 1.0, math.pi / 2, 3.0, -2.5, 10.0]:
        c = iv.cos(ValidatedScalar(theta, ctx))
        s = iv.sin(ValidatedScalar(theta, ctx))
        assert c.lo <= math.cos(theta) <= c.hi or abs(math.cos(theta) - c.mid()) < 1e-15
        assert s.lo <= math.sin(theta) <= s.hi or abs(math.sin(theta) - s.mid()) < 1e-15
        assert c.width() < 1e-14 and s.width() < 1e-14
    # an argument interval spanning a maximum must reach 1
    wide = iv.cos(ValidatedScalar(-0.5, ctx, upper=0.5))
    assert wide.hi >= 1
    # spanning more than a full period collapses to [-1, 1]
    full = iv.cos(ValidatedScalar(0, ctx, upper=10))
    assert full.contains(-1) and full.contains(1)


def test_matvec_matmul_containment():
    ctx = DOUBLE
    M = IntervalMatrix.from_floats([[1.0, 2.0], [3.0, 4.0]], ctx)
    v = IntervalVector.from_values([Fraction(1, 3), Fraction(1, 7)], ctx)
    w = iv.matvec(M, v)
    assert w[0].contains(Fraction(1, 3) + Fraction(2, 7))
    assert w[1].contains(1 + Fraction(4, 7))

    A = IntervalMatrix.from_floats([[0.5, -1.0], [2.0, 0.25]], ctx)
    P = iv.matmul(M, A)
    assert P[0, 0].contains(Fraction(9, 2))
    assert P[1, 1].contains(-2)


def test_opnorm_l1_on_exact_matrix():
    ctx = DOUBLE
    M = IntervalMatrix.from_floats([[1.0, -2.0], [-3.0, 0.5]], ctx)
    n = iv.opnorm_l1(M)
    assert n.contains(4)
    assert n.width() < 1e-15


def test_identity_matmul_roundtrip():
    ctx = EXTENDED
    M = IntervalMatrix.from_floats([[2.0, 1.0], [1.0, 3.0]], ctx)
    I = IntervalMatrix.identity(2, ctx)
    P = iv.matmul(M, I)
    for i in range(2):
        for j in range(2):
            assert P[i, j].contains(M[i, j])


def test_negation_preserves_extended_precision():
    # unary ops must not round through the ambient (53-bit) thread context
    x = ValidatedScalar(Fraction(121, 192), EXTENDED)
    y = -x
    assert y.lo.precision == 128
    back = -Fraction(*y.hi.as_integer_ratio())
    lo128 = Fraction(*x.lo.as_integer_ratio())
    assert back == lo128
    assert abs(x).hi == x.hi
    m = x.mag()
    assert Fraction(*m.as_integer_ratio()) >= Fraction(121, 192) or \
        m == x.hi


def test_cos_thin_points():
    one = iv.cos(ValidatedScalar(0, EXTENDED))
    assert one.contains(1) and one.width() == 0.0
    import mpmath

    mpmath.mp.dps = 60
    for t in (Fraction(1, 3), Fraction(7, 5), Fraction(-13, 4), Fraction(11)):
        enc = iv.cos(ValidatedScalar(t, EXTENDED))
        ref = mpmath.cos(mpmath.mpf(t.numerator) / t.denominator)
        assert enc.contains(Fraction(str(ref)))
        assert enc.width() < 1e-35


def test_cos_interval_hits_extrema():
    # an argument range covering pi must reach -1
    wide = ValidatedScalar(3, EXTENDED, upper=Fraction(13, 4))
    enc = iv.cos(wide)
    assert enc.lo == -1
    # and one covering 0 must reach +1
    around_zero = ValidatedScalar(Fraction(-1, 10), EXTENDED, upper=Fraction(1, 10))
    assert iv.cos(around_zero).hi == 1


def test_cos_monotone_segment_tight():
    seg = ValidatedScalar(Fraction(1, 10), EXTENDED, upper=Fraction(2, 10))
    enc = iv.cos(seg)
    import mpmath

    mpmath.mp.dps = 60
    assert enc.contains(Fraction(str(mpmath.cos(mpmath.mpf("0.15")))))
    assert enc.width() < 0.11


def test_cos_huge_width_clamps():
    fat = ValidatedScalar(-100, EXTENDED, upper=100)
    enc = iv.cos(fat)
    assert enc.lo == -1 and enc.hi == 1


def test_sin_matches_shifted_cos():
    import mpmath

    mpmath.mp.dps = 60
    for t in (Fraction(0), Fraction(1, 2), Fraction(-5, 3), Fraction(22, 7)):
        enc = iv.sin(ValidatedScalar(t, EXTENDED))
        ref = mpmath.sin(mpmath.mpf(t.numerator) / t.denominator)
        assert enc.contains(Fraction(str(ref)))
        assert enc.width() < 1e-35
