"""Zero-finding pipeline: residuals, Newton refinement, bounds, certificates.

Small-order residual values are frozen from exact operator arithmetic; the
quadratic nonlinearity yields a scaling identity used as a property check.
Analytic tail constants used by the bound assembly are compared against
exact rational column norms.  Certificate tests cover digest integrity,
tamper detection, and re-verification.
"""

import json
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from diskcap import proofs
from diskcap import zernike as z
from diskcap.interval import DOUBLE, PrecisionContext

CTX = PrecisionContext(128)


def series_of(m, values, ctx=CTX):
    return z.SingleModeSeries.from_values(0, abs(m) if m >= 0 else 1,
                                          values, ctx)


def head_abs_sum(vec, count):
    return sum(max(abs(float(s.lo)), abs(float(s.hi)))
               for s in list(vec.data)[:count])


def overlaps(a, b):
    return not (float(a.hi) < float(b.lo) or float(b.hi) < float(a.lo))


# -- residual map -------------------------------------------------------------


def test_residual_of_leading_basis_vector_is_exact():
    e0 = z.SingleModeSeries.basis_element(0, 0, 0, CTX)
    out = proofs.residual(0, e0)
    assert out.order == 1
    for scalar, exact in zip(out.coeffs.data, (Fraction(7, 8), Fraction(1, 8))):
        lo = Fraction(*float(scalar.lo).as_integer_ratio())
        hi = Fraction(*float(scalar.hi).as_integer_ratio())
        assert lo <= exact <= hi
        assert hi - lo < Fraction(1, 10**30)


def test_residual_of_zero_series_is_zero():
    for m in (-1, 0, 1, 2):
        zero = series_of(m, [0.0] * 6)
        out = proofs.residual(m, zero)
        assert float(out.coeffs.norm_l1().hi) == 0.0


def test_residual_support_lengths():
    for m, expect in ((-1, 12), (0, 12), (1, 13), (2, 14)):
        u = series_of(m, [0.5, -0.25, 0.125, 0.0, 0.0, 0.0])
        out = proofs.residual(m, u)
        assert out.order + 1 == expect
        assert out.m == u.m and out.k == 0


def test_residual_rejects_wrong_mode_or_grading():
    bad_wave = z.SingleModeSeries.from_values(0, 2, [1.0, 0.0], CTX)
    with pytest.raises(ValueError):
        proofs.residual(1, bad_wave)
    lifted = z.SingleModeSeries.from_values(2, 0, [1.0], CTX)
    with pytest.raises(ValueError):
        proofs.residual(0, lifted)
    with pytest.raises(ValueError):
        proofs.residual(-2, series_of(0, [1.0]))


def test_residual_lift_solves_the_radial_operator():
    # The lifted part w = F(U) - U satisfies  (laplacian) w = r^{-m} (U*U)
    # once the right-hand side is pushed up two gradings, so applying the
    # forward operator must reproduce the embedded projected square.
    for m in (1, 2):
        u = series_of(m, [0.5, -0.375, 0.25, -0.125])
        out = proofs.residual(m, u)
        padded = z.pad(u.coeffs, out.order)
        lifted = z.SingleModeSeries(0, m, out.coeffs - padded)
        back = z.laplacian(0, m).apply_mode(lifted)
        square = z.multiply(u, u)
        target = z.r_minus_pow(m).apply_mode(square, rows=back.order + 2)
        embedded = z.conversion(1, m).apply_mode(
            z.conversion(0, m).apply_mode(target))
        for i in range(back.order + 1):
            assert overlaps(back.coeffs[i], embedded.coeffs[i])


dyadic = st.integers(min_value=-8, max_value=8).map(lambda k: k / 16.0)


@settings(max_examples=12, deadline=None)
@given(st.lists(dyadic, min_size=2, max_size=5), st.sampled_from([-1, 0, 1]))
def test_residual_quadratic_scaling(values, m):
    # F(2U) - 2U = 4 (F(U) - U) for a quadratic nonlinearity; both sides are
    # enclosures of the same dyadic-exact value, so they must intersect.
    u = series_of(m, values)
    doubled = series_of(m, [2 * v for v in values])
    small = proofs.residual(m, u)
    big = proofs.residual(m, doubled)
    lift_small = small.coeffs - z.pad(u.coeffs, small.order)
    lift_big = big.coeffs - z.pad(doubled.coeffs, big.order)
    scaled = lift_small.scale(4)
    for i in range(len(scaled)):
        assert overlaps(lift_big[i], scaled[i])


# -- Newton refinement --------------------------------------------------------


def test_newton_zero_guess_stays_trivial():
    sol = proofs.newton_refine(0, 12, [0.0] * 13)
    assert sol.norm_l1() == 0.0
    assert sol.N == 12 and sol.m == 0


def test_newton_reaches_head_tolerance():
    seed = proofs.default_guess(0, 20)
    sol = proofs.newton_refine(0, 20, seed.U0)
    series = series_of(0, sol.U0)
    res = proofs.residual(0, series)
    assert head_abs_sum(res.coeffs, 21) < 1e-12
    assert sol.norm_l1() > 1.0


def test_newton_overflow_raises_with_history():
    with pytest.raises(proofs.NewtonError) as err:
        proofs.newton_refine(0, 8, [1e200, 0.0, 0.0])
    assert isinstance(err.value.history, list)


def test_newton_rejects_bad_guesses():
    with pytest.raises(ValueError):
        proofs.newton_refine(0, 4, [1.0] * 9)
    with pytest.raises(ValueError):
        proofs.newton_refine(0, 4, [math.nan, 0.0])


def test_amplitude_scan_finds_nontrivial_branch():
    sol = proofs.default_guess(0, 14)
    assert sol.norm_l1() > 1.0


# -- finite inverse and bounds ------------------------------------------------


def test_inverse_of_zero_solution_is_identity():
    sol = proofs.ApproxSolution(0, 10, (0.0,) * 11)
    inv = proofs.build_AN(0, sol)
    assert inv.defect < 1e-14
    for j in range(11):
        col = inv.AN.col(j)
        for i in range(11):
            assert float(col[i].lo) == (1.0 if i == j else 0.0)
            assert col[i].is_thin


def test_bound_Y0_zero_solution_is_zero():
    sol = proofs.ApproxSolution(1, 10, (0.0,) * 11)
    inv = proofs.build_AN(1, sol)
    y0 = proofs.bound_Y0(1, sol, inv)
    assert float(y0.hi) == 0.0


def test_galerkin_defect_small_for_shipped_solution():
    sol = proofs.load_fixture(0)
    assert sol is not None
    inv = proofs.build_AN(0, sol)
    defect = proofs.galerkin_defect(0, sol, inv)
    assert float(defect.hi) < 1e-10


def test_bounds_reject_mode_mismatch():
    sol = proofs.ApproxSolution(0, 10, (0.0,) * 11)
    inv = proofs.build_AN(0, sol)
    with pytest.raises(ValueError):
        proofs.bound_Y0(1, sol, inv)
    with pytest.raises(ValueError):
        proofs.bound_Z1(2, sol, inv)


# -- analytic tail constants --------------------------------------------------


def exact_column_abs_sum(op, j, rows):
    return sum(abs(op.entry_exact(i, j)) for i in rows)


def test_inverted_laplacian_tail_columns_bounded():
    # Columns beyond the kept block have plain column sums at most
    # 1/(2(N+1)+m)^2; the bound assembly relies on exactly this constant.
    N = 9
    for m in (0, 1, 3):
        op = z.inv_dirichlet_laplacian(m)
        limit = Fraction(1, (2 * (N + 1) + m) ** 2)
        for j in range(N + 1, N + 40):
            total = exact_column_abs_sum(op, j, range(j - 1, j + 2))
            assert total <= limit


def test_inverted_laplacian_weighted_tail_column_bound():
    # With domain weight (2n+2)^{-1} and plain range norm the tail columns
    # of the wave-1 inverse stay below 1/(2N).
    N = 9
    op = z.inv_dirichlet_laplacian(1)
    limit = Fraction(1, 2 * N)
    for j in range(N + 1, N + 40):
        total = exact_column_abs_sum(op, j, range(j - 1, j + 2))
        assert total * (2 * j + 2) <= limit


def test_radial_division_weighted_column_norms():
    # Weighted column sums of the triangular inverse equal 1/(2(j+2)):
    # decreasing in j, so the tail supremum sits at the first dropped column.
    op = z.inv_r_plus_01()
    for j in range(0, 30):
        total = sum(abs(op.entry_exact(i, j)) * Fraction(1, (2 * i + 2) ** 2)
                    for i in range(j + 1))
        assert total == Fraction(1, 2 * (j + 2))


def test_inverted_laplacian_strong_to_plain_norm_constant():
    # The (-2)-weighted-domain operator norm constant 16/15 dominates every
    # column; column zero attains 1/3.
    op = z.inv_dirichlet_laplacian(1)
    seen = Fraction(0)
    for j in range(0, 60):
        total = exact_column_abs_sum(op, j, range(max(0, j - 1), j + 2))
        weighted = total * (2 * j + 2) ** 2
        seen = max(seen, weighted)
    assert seen <= Fraction(16, 15)
    col0 = exact_column_abs_sum(op, 0, range(0, 2)) * 4
    assert col0 == Fraction(1, 3)


def test_inverted_laplacian_columns_sum_to_zero():
    for m in (0, 1, 4):
        op = z.inv_dirichlet_laplacian(m)
        for j in range(0, 25):
            total = sum(op.entry_exact(i, j) for i in range(max(0, j - 1), j + 2))
            assert total == 0


def test_inverted_laplacian_output_vanishes_on_boundary():
    rng = random.Random(7)
    for m in (0, 2):
        values = [rng.uniform(-2, 2) for _ in range(12)]
        vec = z.SingleModeSeries.from_values(0, m, values, CTX)
        w = z.inv_dirichlet_laplacian(m).apply_mode(vec)
        re, im = z.eval_series(w, 1.0, 0.7)
        assert re.contains_zero and float(re.hi) - float(re.lo) < 1e-12
        assert im.contains_zero


# -- certificates -------------------------------------------------------------


@pytest.fixture(scope="module")
def small_certificate():
    return proofs.prove(0, 16)


def test_prove_small_problem(small_certificate):
    cert = small_certificate
    assert cert.m == 0 and cert.N == 16
    assert 0 < cert.r_m < 1e-10
    assert float(cert.Z1.hi) < 1.0
    report = proofs.verify_certificate(cert)
    assert report["m"] == 0 and report["N"] == 16
    assert report["p_hi"] < 0


def test_prove_bound_values_are_deterministic(small_certificate):
    again = proofs.prove(0, 16)
    a, b = small_certificate.payload(), again.payload()
    for key in ("Y0", "Z1", "Z2", "r_m", "u0_sha256", "probe_index"):
        assert a[key] == b[key]


def test_certificate_save_load_verify(small_certificate, tmp_path):
    path = tmp_path / "cert.json"
    small_certificate.save(path)
    loaded = proofs.load_certificate(path)
    assert proofs.verify_certificate(loaded)["r_m"] == small_certificate.r_m
    assert proofs.verify_certificate(path)["m"] == 0


def test_certificate_digest_tamper_detected(small_certificate, tmp_path):
    payload = small_certificate.payload()
    payload["r_m_approx"] = payload["r_m_approx"] * 10
    with pytest.raises(proofs.CertificateError):
        proofs.verify_certificate(payload)


def redigest(payload):
    body = {k: v for k, v in payload.items() if k != "digest"}
    import hashlib
    blob = json.dumps(body, sort_keys=True, separators=(",", ":"))
    payload["digest"] = hashlib.sha256(blob.encode()).hexdigest()
    return payload


def test_certificate_inflated_radius_rejected(small_certificate):
    # Pushing the radius past the positive root of the certifying polynomial
    # must fail re-verification even with a consistent digest.
    payload = small_certificate.payload()
    payload["r_m"] = float.hex(small_certificate.r_m * 1e13)
    payload["r_m_approx"] = small_certificate.r_m * 1e13
    with pytest.raises(proofs.CertificateError):
        proofs.verify_certificate(redigest(payload))


def test_certificate_nonsense_fields_rejected(small_certificate):
    payload = small_certificate.payload()
    payload["N"] = -3
    with pytest.raises(proofs.CertificateError):
        proofs.verify_certificate(redigest(payload))


# -- fixtures and export ------------------------------------------------------


def test_shipped_fixtures_cover_published_modes():
    for m, N in ((-1, 36), (0, 36), (1, 36), (2, 36), (20, 75)):
        sol = proofs.load_fixture(m)
        assert sol is not None and sol.N == N and sol.m == m


def test_fixture_dir_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv(proofs.FIXTURE_ENV, str(tmp_path))
    assert proofs.load_fixture(0) is None
    sol = proofs.ApproxSolution(0, 6, (0.5, -0.25, 0.0, 0.0, 0.0, 0.0, 0.0))
    path = proofs.save_fixture(sol)
    assert str(path).startswith(str(tmp_path))
    back = proofs.load_fixture(0)
    assert back is not None and back.digest() == sol.digest()


def test_export_solution_grid(tmp_path):
    sol = proofs.ApproxSolution(1, 4, (0.5, -0.25, 0.125, 0.0, 0.0))
    path = tmp_path / "grid.csv"
    proofs.export_solution_grid(sol, path, radial=5, angular=8)
    lines = path.read_text().strip().splitlines()
    assert len(lines) == 5 * 8 + 1
