"""Graded polynomial series on the unit disk and their coefficient calculus.

A disk series of grading k collects azimuthal modes

    u(r, theta) = sum_m e^{i m theta} r^{|m|} sum_n u_{m,n} p_n(2 r^2 - 1),

where p_n runs through the Jacobi-type family of weight (k, |m|).  The mode
coefficients live in weighted l^1 spaces whose norm carries a per-index
symbol w_{m,n} * C(k+n, n); for admissible weight policies (trivial,
geometric, algebraic) the norm is submultiplicative under the convolution
induced by pointwise multiplication, which is what lets fixed-point residual
and contraction bounds be assembled coefficient by coefficient.

Differentiation and coordinate multiplication act on mode coefficients
through banded rational matrices: ladder maps for the complex derivatives,
the Laplacian and its Dirichlet-boundary inverse, grading conversion, and
multiplication by z or conj(z) together with the explicit upper-triangular
inverses of the latter on low modes.  Operators are stored as exact rational
entry functions plus band metadata, so compositions stay exact and interval
truncations of any size can be materialized on demand.

Products of mode series use the grid pipeline from the transform module:
re-express both factors in the target radial family (same-sign modes) or
carry the leftover radial power as an explicit grid factor (mixed signs),
evaluate on a certified dealiased grid, multiply pointwise, transform back.
The product of polynomials is again a polynomial within the grid's exactness
range, so the recovered coefficients are rigorous enclosures.
"""

import csv
import functools
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import gmpy2

from .interval import (
    EXTENDED,
    IntervalMatrix,
    IntervalVector,
    ValidatedScalar,
    cos,
    mul,
    sin,
)
from .jacobi import JacobiWeight, eval_forsythe_all
from .transform import build_mmt, hadamard, pad, to_coeffs, to_grid, transform_pair
from . import quadrature

__all__ = [
    "WeightPolicy",
    "SingleModeSeries",
    "ZernikeSeries",
    "SequenceOperator",
    "norm_V",
    "eval_series",
    "identity_op",
    "d_plus",
    "d_minus",
    "laplacian",
    "inv_dirichlet_laplacian",
    "conversion",
    "r_plus",
    "r_minus",
    "r_minus_pow",
    "inv_r_plus_01",
    "inv_r_plus_00",
    "promote_m",
    "multiply",
    "series_to_json",
    "series_from_json",
    "export_polar_grid",
]


# -- weight policies ---------------------------------------------------------


@dataclass(frozen=True)
class WeightPolicy:
    """Growth profile w_{m,n} of the coefficient norm.

    ``trivial`` weighs every index by 1, ``geometric(base)`` by
    base^(2n+|m|) (the polynomial degree of the basis element), and
    ``algebraic(power)`` by (1+2n+|m|)^power.  All three satisfy w >= 1,
    monotonicity in n, and submultiplicativity across the support bound of
    products, which is what the Banach-algebra property needs.
    """

    kind: str
    base: Fraction = Fraction(1)
    power: int = 0

    def __post_init__(self):
        if self.kind not in ("trivial", "geometric", "algebraic"):
            raise ValueError(f"unknown weight policy kind {self.kind!r}")
        if self.kind == "geometric" and self.base < 1:
            raise ValueError("geometric weights need base >= 1")
        if self.kind == "algebraic":
            if not isinstance(self.power, int):
                raise TypeError("algebraic weight exponent must be an integer")
            if self.power < 0:
                raise ValueError("algebraic weights need exponent >= 0")

    @classmethod
    def trivial(cls):
        return cls("trivial")

    @classmethod
    def geometric(cls, base):
        return cls("geometric", base=Fraction(base))

    @classmethod
    def algebraic(cls, power):
        return cls("algebraic", power=power)

    def factor_exact(self, m, n):
        """w_{m,n} as an exact rational."""
        if self.kind == "trivial":
            return Fraction(1)
        degree = 2 * n + abs(m)
        if self.kind == "geometric":
            return self.base ** degree
        return Fraction((1 + degree) ** self.power)


# -- series ------------------------------------------------------------------


@dataclass(frozen=True)
class SingleModeSeries:
    """Coefficients of one azimuthal mode: u_{m,n} against r^{|m|} p_n(x)."""

    k: int
    m: int
    coeffs: IntervalVector

    def __post_init__(self):
        if not isinstance(self.k, int) or not isinstance(self.m, int):
            raise TypeError("grading and wave number must be integers")
        if self.k < 0:
            raise ValueError("grading must be non-negative")
        if len(self.coeffs) == 0:
            raise ValueError("a mode needs at least one coefficient")

    @classmethod
    def from_values(cls, k, m, values, ctx=EXTENDED):
        return cls(k, m, IntervalVector.from_values(values, ctx))

    @classmethod
    def basis_element(cls, k, m, n, ctx=EXTENDED):
        values = [0] * n + [1]
        return cls.from_values(k, m, values, ctx)

    @property
    def order(self):
        return len(self.coeffs) - 1

    @property
    def weight(self):
        """Radial family carrying this mode."""
        return JacobiWeight(self.k, abs(self.m))

    def pad_to(self, order):
        return SingleModeSeries(self.k, self.m, pad(self.coeffs, order))


@dataclass(frozen=True)
class ZernikeSeries:
    """A finite collection of modes sharing one grading."""

    k: int
    parts: tuple

    def __post_init__(self):
        last = None
        for part in self.parts:
            if part.k != self.k:
                raise ValueError("all modes of a series share the grading")
            if last is not None and part.m <= last:
                raise ValueError("modes must come in strictly increasing order")
            last = part.m

    @classmethod
    def from_modes(cls, parts):
        parts = tuple(sorted(parts, key=lambda p: p.m))
        if not parts:
            raise ValueError("a series needs at least one mode")
        return cls(parts[0].k, parts)

    @property
    def wave_numbers(self):
        return tuple(part.m for part in self.parts)

    def mode(self, m):
        for part in self.parts:
            if part.m == m:
                return part
        raise KeyError(f"no mode with wave number {m}")


def _parts_of(u):
    if isinstance(u, SingleModeSeries):
        return (u,)
    return u.parts


def norm_V(u, policy=None):
    """Enclosure of the weighted l^1 norm sum |u_{m,n}| w_{m,n} C(k+n, n)."""
    if policy is None:
        policy = WeightPolicy.trivial()
    parts = _parts_of(u)
    ctx = parts[0].coeffs.ctx
    lo = gmpy2.mpfr(0)
    hi = gmpy2.mpfr(0)
    for part in parts:
        for n, c in enumerate(part.coeffs):
            symbol = policy.factor_exact(part.m, n) * comb(part.k + n, n)
            term = abs(c) * ValidatedScalar(symbol, ctx)
            lo = ctx.down.add(lo, term.lo)
            hi = ctx.up.add(hi, term.hi)
    return ValidatedScalar._raw(lo, hi, ctx)


def eval_series(u, r, theta):
    """Enclosure of the series value at a polar point; returns (re, im).

    The radius must satisfy 0 <= r <= 1.  Each mode is evaluated by interval
    recurrence of its radial family at x = 2r^2 - 1, scaled by r^{|m|} and
    rotated by cos/sin enclosures of m*theta.
    """
    parts = _parts_of(u)
    ctx = parts[0].coeffs.ctx
    if not isinstance(r, ValidatedScalar):
        r = ValidatedScalar(r, ctx)
    if not isinstance(theta, ValidatedScalar):
        theta = ValidatedScalar(theta, ctx)
    if r.lo < 0 or r.hi > 1:
        raise ValueError(f"radius {r!r} is not inside [0, 1]")
    x = r ** 2 * 2 - 1
    re = ValidatedScalar(0, ctx)
    im = ValidatedScalar(0, ctx)
    for part in parts:
        values = eval_forsythe_all(part.weight, part.order, x, ctx)
        radial = ValidatedScalar(0, ctx)
        for c, p in zip(part.coeffs, values):
            radial = radial + c * p
        if part.m != 0:
            radial = radial * r ** abs(part.m)
            angle = mul(ValidatedScalar(part.m, ctx), theta)
            re = re + radial * cos(angle)
            im = im + radial * sin(angle)
        else:
            re = re + radial
    return re, im


# -- operators on mode coefficients ------------------------------------------


@dataclass(frozen=True)
class SequenceOperator:
    """A banded (or triangular-dense) operator on mode coefficient vectors.

    Entries are exact rationals produced by ``entry(i, j)``; ``band_lo`` and
    ``band_hi`` bound the offset i - j outside which entries vanish, with
    ``None`` meaning unbounded on that side (dense triangle).  ``domain`` and
    ``codomain`` are the (grading, wave number) labels of input and output
    coefficient spaces, and ``s_shift`` records how the operator moves the
    algebraic-weight smoothness index (metadata only).
    """

    domain: tuple
    codomain: tuple
    band_lo: object
    band_hi: object
    entry: object
    s_shift: int = 0

    def entry_exact(self, i, j):
        """Entry (i, j) as a Fraction, zero outside the band."""
        if i < 0 or j < 0:
            return Fraction(0)
        off = i - j
        if self.band_lo is not None and off < self.band_lo:
            return Fraction(0)
        if self.band_hi is not None and off > self.band_hi:
            return Fraction(0)
        return Fraction(self.entry(i, j))

    def compose(self, other):
        """Exact composition self(other(.)); bands add, entries convolve."""
        if other.codomain != self.domain:
            raise ValueError(
                f"composition mismatch: {other.codomain} feeds {self.domain}")
        outer, inner = self, other

        @functools.lru_cache(maxsize=None)
        def entry(i, j):
            uppers = []
            if outer.band_lo is not None:
                uppers.append(i - outer.band_lo)
            if inner.band_hi is not None:
                uppers.append(j + inner.band_hi)
            if not uppers:
                raise ValueError("composition has no finite entry sums")
            lowers = [0]
            if outer.band_hi is not None:
                lowers.append(i - outer.band_hi)
            if inner.band_lo is not None:
                lowers.append(j + inner.band_lo)
            total = Fraction(0)
            for t in range(max(lowers), min(uppers) + 1):
                left = outer.entry_exact(i, t)
                if left:
                    right = inner.entry_exact(t, j)
                    if right:
                        total += left * right
            return total

        def add_bands(a, b):
            return None if a is None or b is None else a + b

        return SequenceOperator(
            inner.domain, outer.codomain,
            add_bands(outer.band_lo, inner.band_lo),
            add_bands(outer.band_hi, inner.band_hi),
            entry, outer.s_shift + inner.s_shift)

    def truncation(self, nrows, ncols, ctx=EXTENDED):
        """Interval matrix of the leading nrows x ncols block."""
        zero = ValidatedScalar(0, ctx)
        rows = []
        for i in range(nrows):
            row = []
            for j in range(ncols):
                e = self.entry_exact(i, j)
                row.append(ValidatedScalar(e, ctx) if e else zero)
            rows.append(row)
        return IntervalMatrix(rows, ctx)

    def apply(self, vec, rows=None):
        """Banded interval matvec against a coefficient vector."""
        ctx = vec.ctx
        n_in = len(vec)
        if rows is None:
            if self.band_hi is None:
                raise ValueError("output length needed for a lower-dense operator")
            rows = max(n_in + self.band_hi, 1)
        out = []
        for i in range(rows):
            j_lo = 0 if self.band_hi is None else max(0, i - self.band_hi)
            j_hi = n_in - 1 if self.band_lo is None else min(n_in - 1, i - self.band_lo)
            lo = gmpy2.mpfr(0)
            hi = gmpy2.mpfr(0)
            for j in range(j_lo, j_hi + 1):
                e = self.entry_exact(i, j)
                if e:
                    term = mul(ValidatedScalar(e, ctx), vec[j])
                    lo = ctx.down.add(lo, term.lo)
                    hi = ctx.up.add(hi, term.hi)
            out.append(ValidatedScalar._raw(lo, hi, ctx))
        return IntervalVector(out, ctx)

    def apply_mode(self, series, rows=None):
        """Apply to a mode series, checking and relabelling the (k, m) tags."""
        if (series.k, series.m) != self.domain:
            raise ValueError(
                f"operator domain {self.domain} cannot take a mode "
                f"({series.k}, {series.m})")
        out = self.apply(series.coeffs, rows=rows)
        k_out, m_out = self.codomain
        return SingleModeSeries(k_out, m_out, out)


def identity_op(k, m):
    return SequenceOperator((k, m), (k, m), 0, 0, lambda i, j: Fraction(1))


def d_plus(k, m):
    """Raising derivative: one grading up, wave number up by one.

    Sends the n-th basis element of mode m >= 0 to 2(n+k+m+1) times the
    (n-1)-st of mode m+1 (degree n = 0 is annihilated); for m < 0 the
    conjugate-symmetric formula keeps the degree and scales by 2(n+|m|).
    """
    if m >= 0:
        return SequenceOperator(
            (k, m), (k + 1, m + 1), -1, -1,
            lambda i, j: Fraction(2 * (j + k + m + 1)), s_shift=-1)
    return SequenceOperator(
        (k, m), (k + 1, m + 1), 0, 0,
        lambda i, j: Fraction(2 * (j + abs(m))), s_shift=-1)


def d_minus(k, m):
    """Lowering derivative: one grading up, wave number down by one."""
    if m > 0:
        return SequenceOperator(
            (k, m), (k + 1, m - 1), 0, 0,
            lambda i, j: Fraction(2 * (j + m)), s_shift=-1)
    return SequenceOperator(
        (k, m), (k + 1, m - 1), -1, -1,
        lambda i, j: Fraction(2 * (j + k + abs(m) + 1)), s_shift=-1)


def laplacian(k, m):
    """Two gradings up, degree down by one, factor 4(n+|m|)(n+k+|m|+1)."""
    a = abs(m)
    return SequenceOperator(
        (k, m), (k + 2, m), -1, -1,
        lambda i, j: Fraction(4 * (j + a) * (j + k + a + 1)), s_shift=-2)


def inv_dirichlet_laplacian(m):
    """Tridiagonal right inverse of the Laplacian with zero boundary values.

    Acts within grading 0 of a non-negative mode; every column sums to zero,
    which is the coefficient-space statement of the boundary condition.
    """
    if m < 0:
        raise ValueError("the Dirichlet inverse is set up for modes m >= 0")

    def entry(i, j):
        if j == 0:
            den = 4 * (m + 1) * (m + 2)
            if i == 0:
                return Fraction(-1, den)
            return Fraction(1, den)          # i == 1
        if i == j + 1:
            return Fraction(1, 4 * (2 * j + m + 1) * (2 * j + m + 2))
        if i == j:
            return Fraction(-1, 2 * (2 * j + m + 2) * (2 * j + m))
        return Fraction(1, 4 * (2 * j + m) * (2 * j + m + 1))   # i == j - 1

    return SequenceOperator((0, m), (0, m), -1, 1, entry, s_shift=2)


def conversion(k, m):
    """Degree-preserving re-expansion one grading up."""
    a = abs(m)

    def entry(i, j):
        den = 2 * j + k + a + 1
        if i == j:
            return Fraction(j + k + a + 1, den)
        return Fraction(-(j + a), den)       # i == j - 1

    return SequenceOperator((k, m), (k + 1, m), -1, 0, entry)


def r_plus(k, m):
    """Multiplication by the complex coordinate z (wave number up by one)."""
    a = abs(m)
    if m >= 0:
        def entry(i, j):
            den = 2 * j + k + a + 1
            if i == j:
                return Fraction(j + k + a + 1, den)
            return Fraction(j + k, den)      # i == j - 1

        return SequenceOperator((k, m), (k, m + 1), -1, 0, entry)

    def entry(i, j):
        den = 2 * j + k + a + 1
        if i == j + 1:
            return Fraction(j + 1, den)
        return Fraction(j + a, den)          # i == j

    return SequenceOperator((k, m), (k, m + 1), 0, 1, entry)


def r_minus(k, m):
    """Multiplication by conj(z) (wave number down by one)."""
    a = abs(m)
    if m > 0:
        def entry(i, j):
            den = 2 * j + k + a + 1
            if i == j + 1:
                return Fraction(j + 1, den)
            return Fraction(j + a, den)      # i == j

        return SequenceOperator((k, m), (k, m - 1), 0, 1, entry)

    def entry(i, j):
        den = 2 * j + k + a + 1
        if i == j:
            return Fraction(j + k + a + 1, den)
        return Fraction(j + k, den)          # i == j - 1

    return SequenceOperator((k, m), (k, m - 1), -1, 0, entry)


def r_minus_pow(m):
    """m-fold conj(z) multiplication from mode 2m down to mode m, grading 0.

    Lower-triangular with non-negative entries and column sums at most one,
    so its l^1 operator norm is at most one at any truncation.
    """
    if m < 0:
        raise ValueError("the repeated lowering map needs m >= 0")
    op = identity_op(0, 2 * m)
    for mode in range(2 * m, m, -1):
        op = r_minus(0, mode).compose(op)
    return op


def inv_r_plus_01():
    """Inverse of z-multiplication from mode 1 into mode 2 (grading 0).

    Upper-triangular dense; bounded from the plainly weighted mode-2 space
    into the mode-1 space weighted one smoothness step down, with norm 1/2.
    """

    def entry(i, j):
        value = Fraction(2 * (i + 1) ** 2, (j + 1) * (j + 2))
        return value if (i + j) % 2 == 0 else -value

    return SequenceOperator((0, 2), (0, 1), None, 0, entry, s_shift=-1)


def inv_r_plus_00():
    """Inverse of z-multiplication from mode 0 into mode 1 (grading 0)."""

    def entry(i, j):
        value = Fraction(2 * i + 1, j + 1)
        return value if (i + j) % 2 == 0 else -value

    return SequenceOperator((0, 1), (0, 0), None, 0, entry, s_shift=-1)


def promote_m(k, m):
    """Re-expansion of a weight-(k, m) radial series in the (k, m+1) family.

    This is a basis change for the same polynomial in x = 2r^2 - 1 (the
    leading radial power is NOT adjusted), used to bring product factors to
    the target family before a same-weight grid transform.
    """

    def entry(i, j):
        den = 2 * j + k + m + 1
        if i == j:
            return Fraction(j + k + m + 1, den)
        return Fraction(j + k, den)          # i == j - 1

    return SequenceOperator((k, m), (k, m + 1), -1, 0, entry)


# -- products ----------------------------------------------------------------


def _promoted_grid(part, pair):
    """Grid values of a mode's radial profile on the target family's nodes."""
    vec = part.coeffs
    for step in range(abs(part.m), pair.basis_weight.m):
        vec = promote_m(part.k, step).apply(vec, rows=len(vec))
    return to_grid(pair, pad(vec, pair.order))


def multiply(a, b, ctx=None, method="forsythe", jobs=1, n_out=None):
    """Coefficients of the pointwise product of two mode series.

    The wave numbers add.  When their signs agree, both factors are promoted
    to the radial family of the product mode and pushed through one
    same-weight grid transform; when they differ, each factor is evaluated on
    the target grid by a cross-weight transform and the leftover radial power
    becomes the explicit per-node factor ((x+1)/2)^mbar.  The grid order
    covers the full product degree, so the result coefficients enclose the
    exact ones. ``n_out`` trims (or zero-extends) the output truncation.
    """
    if a.k != b.k:
        raise ValueError(f"grading mismatch: {a.k} versus {b.k}")
    if ctx is None:
        ctx = a.coeffs.ctx if a.coeffs.ctx.bits >= b.coeffs.ctx.bits else b.coeffs.ctx
    k = a.k
    m3 = a.m + b.m
    mbar = 0 if a.m * b.m >= 0 else min(abs(a.m), abs(b.m))
    n_prod = a.order + b.order + mbar
    w3 = JacobiWeight(k, abs(m3))
    pair3 = transform_pair(w3, n_prod, ctx=ctx, method=method, jobs=jobs)
    if mbar == 0:
        f1 = _promoted_grid(a, pair3)
        f2 = f1 if b is a else _promoted_grid(b, pair3)
        grid = hadamard(f1, f2)
    else:
        grid = None
        for part in (a, b):
            w_part = JacobiWeight(k, abs(part.m))
            if w_part == w3:
                cross = pair3
            else:
                cross = build_mmt(w_part, w3, n_prod, method=method, ctx=ctx,
                                  jobs=jobs)
            values = to_grid(cross, pad(part.coeffs, n_prod))
            grid = values if grid is None else hadamard(grid, values)
        rule = quadrature.gauss_rule(w3, n_prod, ctx, jobs=jobs)
        factor = IntervalVector([((x + 1) / 2) ** mbar for x in rule.nodes])
        grid = hadamard(grid, factor)
    if n_out is None:
        n_out = n_prod
    coeffs = to_coeffs(pair3, grid, n_max=min(n_out, n_prod))
    if n_out > n_prod:
        coeffs = pad(coeffs, n_out)
    return SingleModeSeries(k, m3, coeffs)


# -- serialization and export -------------------------------------------------


def _scalar_to_json(x):
    return [str(Fraction(*x.lo.as_integer_ratio())),
            str(Fraction(*x.hi.as_integer_ratio()))]


def _scalar_from_json(pair, ctx):
    lo, hi = pair
    return ValidatedScalar(Fraction(lo), ctx, upper=Fraction(hi))


def series_to_json(u):
    """JSON-ready dict with exact rational endpoint strings."""
    return {
        "k": _parts_of(u)[0].k,
        "modes": [
            {"m": part.m,
             "coeffs": [_scalar_to_json(c) for c in part.coeffs]}
            for part in _parts_of(u)
        ],
    }


def series_from_json(data, ctx=EXTENDED):
    k = int(data["k"])
    parts = []
    for mode in data["modes"]:
        coeffs = IntervalVector(
            [_scalar_from_json(c, ctx) for c in mode["coeffs"]], ctx)
        parts.append(SingleModeSeries(k, int(mode["m"]), coeffs))
    return ZernikeSeries.from_modes(parts)


def export_polar_grid(u, path, radial=33, angular=64):
    """CSV of midpoint values (r, theta, re, im) on a polar lattice."""
    parts = _parts_of(u)
    ctx = parts[0].coeffs.ctx
    two_pi = 2 * float(ctx.nearest.const_pi())
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["r", "theta", "re", "im"])
        for i in range(radial):
            r = Fraction(i, radial - 1)
            for j in range(angular):
                theta = two_pi * j / angular
                re, im = eval_series(u, ValidatedScalar(r, ctx),
                                     ValidatedScalar(theta, ctx))
                writer.writerow([float(r), theta, re.mid(), im.mid()])
