"""Certified existence proofs for semilinear Dirichlet problems on the disk.

For a wave number m (m = -1 selects the variant whose nonlinearity carries a
1/r factor) the zero problem lives on coefficient sequences over the disk
basis of wave number |m|:

    F(U) = U + L(U * U),

where L composes the inverted zero-boundary Laplacian with the banded radial
bookkeeping that matches the gradings (the lowering chain for m >= 0, the
inverted raising operator for m = -1).  A floating-point Newton iteration
produces an approximate zero U0 supported on n <= N and an approximate
inverse AN of the truncated derivative.  Three interval bounds

    Y0 >= ||A F(U0)||_1,
    Z1 >= ||I - A DF(U0)||_1,
    Z2 r >= ||A (DF(c) - DF(U0))||_1   for all c within distance r of U0,

with A = AN + identity-on-the-tail, feed the radii-polynomial search in
:mod:`.radii`; a certified negative polynomial value at radius r proves a
true zero within coefficient-1-norm distance r of U0.

Products are read out through high-precision grid transforms (128 bits by
default); everything downstream of a product is rounded outward to 53-bit
intervals, so bound assembly runs at double precision.  The truncation
indices follow the exact supports of the objects involved: U0 * U0 lives on
n <= 2N, the lowering chain adds at most m, and L adds one more.
"""

import hashlib
import json
import math
import os
import time
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from . import radii
from .interval import (DOUBLE, IntervalMatrix, IntervalVector,
                       PrecisionContext, ValidatedScalar, matmul, matvec,
                       opnorm_l1)
from .jacobi import JacobiWeight, recurrence_coeffs_exact, scaling_factor_exact
from .transform import hadamard, pad, to_coeffs, to_grid, transform_pair
from .zernike import (SingleModeSeries, export_polar_grid,
                      inv_dirichlet_laplacian, inv_r_plus_00, inv_r_plus_01,
                      multiply, promote_m, r_minus_pow)

#: Precision used inside product read-outs; assembly always runs at 53 bits.
PRODUCT_BITS = 128

#: Environment variable overriding the directory searched for shipped guesses.
FIXTURE_ENV = "DISKCAP_FIXTURE_DIR"

CERTIFICATE_FORMAT = 1


class NewtonError(ArithmeticError):
    """Refinement failed; carries the residual-norm history."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history or [])


class CertificateError(ValueError):
    """A stored certificate failed re-verification."""


def _check_mode(m):
    if not isinstance(m, int) or isinstance(m, bool) or m < -1:
        raise ValueError(f"wave number must be an integer >= -1, got {m!r}")


@dataclass(frozen=True)
class ApproxSolution:
    """Float coefficients of a candidate zero, supported on n = 0..N."""

    m: int
    N: int
    U0: tuple

    def __post_init__(self):
        _check_mode(self.m)
        if not isinstance(self.N, int) or self.N < 1:
            raise ValueError(f"truncation must be an integer >= 1, got {self.N!r}")
        values = tuple(float(x) for x in self.U0)
        if len(values) != self.N + 1:
            raise ValueError(f"expected {self.N + 1} coefficients, got {len(values)}")
        if not all(math.isfinite(x) for x in values):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "U0", values)

    def norm_l1(self):
        return float(np.abs(np.asarray(self.U0)).sum())

    def digest(self):
        blob = json.dumps([self.m, self.N, [x.hex() for x in self.U0]],
                          separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


@dataclass(frozen=True)
class ApproxInverse:
    """Thin-interval inverse of the truncated derivative; identity on the tail."""

    m: int
    N: int
    AN: IntervalMatrix
    defect: float
    condition: float

    def __post_init__(self):
        if self.AN.shape != (self.N + 1, self.N + 1):
            raise ValueError(f"inverse block must be {self.N + 1} square, "
                             f"got {self.AN.shape}")


def _solution_series(sol, ctx):
    return SingleModeSeries.from_values(0, abs(sol.m), sol.U0, ctx)


def _float_vector(values, ctx):
    return IntervalVector.from_values([float(x) for x in values], ctx)


def _head(vec, count):
    return IntervalVector(list(vec.data)[:count], vec.ctx)


def _imax(a, b):
    """Entrywise enclosure of max(a, b); either side may be None."""
    if a is None:
        return b
    if b is None:
        return a
    lo = a.lo if a.lo >= b.lo else b.lo
    hi = a.hi if a.hi >= b.hi else b.hi
    return ValidatedScalar._raw(lo, hi, a.ctx)


# ---------------------------------------------------------------------------
# Residual


def residual(m, series, method="forsythe", jobs=1):
    """F(U) = U + L(U * U) with exact support bookkeeping.

    The input must be a grading-0 series of wave number |m|.  The result has
    support n <= 2N + m + 1 for m >= 0 and n <= 2N + 1 for m = -1, where N
    is the input order; both facts are asserted.
    """
    _check_mode(m)
    wave = abs(m)
    if series.k != 0 or series.m != wave:
        raise ValueError(f"series must live on grading 0, wave {wave}; "
                         f"got ({series.k}, {series.m})")
    N = series.order
    square = multiply(series, series, method=method, jobs=jobs)
    assert square.order == 2 * N and abs(square.m) == 2 * wave
    if m >= 0:
        lowered = r_minus_pow(m).apply_mode(square, rows=2 * N + m + 1)
        lifted = inv_dirichlet_laplacian(m).apply_mode(lowered, rows=2 * N + m + 2)
    else:
        lowered = inv_r_plus_01().apply_mode(square)
        lifted = inv_dirichlet_laplacian(1).apply_mode(lowered, rows=2 * N + 2)
    assert lifted.order == 2 * N + max(m, 0) + 1
    out = pad(series.coeffs, lifted.order) + lifted.coeffs
    return SingleModeSeries(0, wave, out)


# ---------------------------------------------------------------------------
# Floating-point Newton machinery (non-rigorous; bounds never reuse it)


def _float_transform(w, order):
    """Float64 node/evaluation/read-out data for one grid family."""
    from scipy.special import roots_jacobi

    nodes, weights = roots_jacobi(order + 1, w.k, w.m)
    values = np.empty((order + 1, order + 1))
    values[:, 0] = 1.0
    if order >= 1:
        a0, b0, _ = recurrence_coeffs_exact(w, 0)
        values[:, 1] = float(a0) * nodes - float(b0)
    for n in range(1, order):
        an, bn, gn = (float(c) for c in recurrence_coeffs_exact(w, n))
        values[:, n + 1] = (an * nodes - bn) * values[:, n] - gn * values[:, n - 1]
    norms = np.array([float(scaling_factor_exact(w, n)) for n in range(order + 1)])
    readout = (values * weights[:, None]).T / norms[:, None]
    return nodes, values, readout


class _FloatMachine:
    """Float64 pipeline for truncated residuals and derivatives."""

    def __init__(self, m, N):
        _check_mode(m)
        self.m, self.N = m, N
        wave = abs(m)
        _, forward, readout = _float_transform(JacobiWeight(0, 2 * wave), 2 * N)
        raiser = np.eye(N + 1)
        for step in range(wave, 2 * wave):
            raiser = promote_m(0, step).truncation(N + 1, N + 1, DOUBLE).mids() @ raiser
        # Grid values of the N+1 basis columns, promoted to the product family.
        self.grid_basis = forward[:, :N + 1] @ raiser
        self.readout = readout
        if m >= 0:
            lap = inv_dirichlet_laplacian(m).truncation(N + 1, N + 2, DOUBLE).mids()
            low = r_minus_pow(m).truncation(N + 2, 2 * N + 1, DOUBLE).mids()
        else:
            lap = inv_dirichlet_laplacian(1).truncation(N + 1, N + 2, DOUBLE).mids()
            low = inv_r_plus_01().truncation(N + 2, 2 * N + 1, DOUBLE).mids()
        self.post = lap @ low

    def residual_head(self, u):
        # Overflow here just produces non-finite entries, which the Newton
        # loop detects and reports; silence the noisy intermediate warnings.
        with np.errstate(over="ignore", invalid="ignore"):
            grid = self.grid_basis @ u
            return u + self.post @ (self.readout @ (grid * grid))

    def jacobian(self, u):
        grid = self.grid_basis @ u
        columns = self.readout @ (grid[:, None] * self.grid_basis)
        return np.eye(self.N + 1) + self.post @ (2.0 * columns)


def _accurate_head(m, N, u, bits, method, jobs):
    """Head residual evaluated through the certified grid (midpoints only).

    For m >= 0 the radial bookkeeping is lower-banded, so only product rows
    n <= N+1 are read out; the m = -1 operator is upper triangular and needs
    the full product support before the head can be taken.
    """
    ctx = PrecisionContext(bits)
    series = SingleModeSeries.from_values(0, abs(m), [float(x) for x in u], ctx)
    engine = _ProductEngine(series, abs(m), 2 * N, ctx, method, jobs)
    if m >= 0:
        q = engine.square(N + 1)
        t = r_minus_pow(m).apply(q, rows=N + 2)
        w = inv_dirichlet_laplacian(m).apply(t, rows=N + 1)
    else:
        q = engine.square(2 * N)
        t = inv_r_plus_01().apply(q)
        w = inv_dirichlet_laplacian(1).apply(_head(t, N + 2), rows=N + 1)
    return u + np.array([x.mid() for x in w.data])


def newton_refine(m, N, guess, tol=1e-13, max_iter=40, bits=PRODUCT_BITS,
                  method="forsythe", jobs=1):
    """Newton iteration on the truncated zero problem.

    Runs in float64 until the residual stalls, then re-evaluates residuals
    through the high-precision product grid so the head residual keeps
    contracting down to the storage error of the float coefficients.  Stops
    at ``tol`` or at the iteration cap; raises NewtonError (with the
    residual-norm history attached) only on divergence.
    """
    _check_mode(m)
    seed = np.asarray(guess, dtype=float).ravel()
    if len(seed) > N + 1:
        raise ValueError(f"guess has {len(seed)} entries but the truncation "
                         f"keeps only {N + 1}")
    if not np.all(np.isfinite(seed)):
        raise ValueError("guess must be finite")
    u = np.zeros(N + 1)
    u[:len(seed)] = seed
    machine = _FloatMachine(m, N)
    history = []
    best = (math.inf, u.copy())

    def step_from(current, res_norm, res_vec):
        delta = np.linalg.solve(machine.jacobian(current), res_vec)
        scale = 1.0
        while scale >= 2.0 ** -12:
            trial = current - scale * delta
            trial_norm = float(np.abs(machine.residual_head(trial)).sum())
            if trial_norm < res_norm:
                return trial
            scale /= 2
        return None

    previous = math.inf
    for _ in range(max_iter):
        res_vec = machine.residual_head(u)
        res = float(np.abs(res_vec).sum())
        history.append(res)
        if not math.isfinite(res):
            raise NewtonError("residual overflowed", history)
        if res < best[0]:
            best = (res, u.copy())
        if res < tol or res > 0.9 * previous:
            break
        moved = step_from(u, res, res_vec)
        if moved is None:
            break
        previous = res
        u = moved
    if len(history) >= 4 and history[-1] > 1e3 * (min(history) + tol):
        raise NewtonError("iteration diverged", history)

    u = best[1]
    if best[0] > 0.0:
        # Polish with accurate residuals: the float64 loop bottoms out at the
        # rounding noise of the double-precision product, which also makes
        # its norm estimates untrustworthy near the floor.  Only residuals
        # measured through the certified grid count from here on.
        best = (math.inf, u.copy())
        previous = math.inf
        for _ in range(8):
            res_vec = _accurate_head(m, N, u, bits, method, jobs)
            res = float(np.abs(res_vec).sum())
            history.append(res)
            if res < best[0]:
                best = (res, u.copy())
            if res < tol or res > 0.5 * previous:
                break
            u = u - np.linalg.solve(machine.jacobian(u), res_vec)
            previous = res
        u = best[1]
    return ApproxSolution(m, N, tuple(float(x) for x in u))


def default_guess(m, N, tol=1e-13):
    """Amplitude scan over the low-mode bump seed s (e0 - e1).

    The base amplitude balances the linear part against the nonlinearity at
    the bump's peak; the scan refines a handful of multiples and returns the
    smallest nontrivial branch found.
    """
    _check_mode(m)
    wave = abs(m)
    if m >= 0:
        peak_at = m / (m + 2) if m else 0.0
        peak = (peak_at ** m if m else 1.0) * (1 - peak_at) ** 2
        amplitude = 4.0 * (m + 1) / peak
    else:
        amplitude = 8.0
    base = amplitude / (wave + 2)
    best = None
    notes = []
    for factor in (1.0, 0.5, 1.5, 0.75, 2.0, 3.0, 4.0):
        seed = np.zeros(N + 1)
        seed[0] = factor * base
        seed[1] = -factor * base
        try:
            sol = newton_refine(m, N, seed, tol=tol)
        except NewtonError as exc:
            notes.append(f"amplitude {factor * base:.3g}: {exc}")
            continue
        norm = sol.norm_l1()
        if norm < 1.0:
            notes.append(f"amplitude {factor * base:.3g}: collapsed to zero")
            continue
        if best is None or norm < best.norm_l1():
            best = sol
    if best is None:
        raise NewtonError("no nontrivial branch found in the amplitude scan; "
                          + "; ".join(notes))
    return best


def build_AN(m, sol):
    """Float inverse of the truncated derivative, wrapped in thin intervals."""
    _check_mode(m)
    if sol.m != m:
        raise ValueError(f"solution belongs to wave {sol.m}, not {m}")
    machine = _FloatMachine(m, sol.N)
    jac = machine.jacobian(np.asarray(sol.U0))
    try:
        inv = np.linalg.inv(jac)
    except np.linalg.LinAlgError as exc:
        raise NewtonError(f"truncated derivative is numerically singular: {exc}")
    defect = float(np.abs(np.eye(sol.N + 1) - inv @ jac).sum(axis=0).max())
    condition = float(np.linalg.cond(jac, 1))
    return ApproxInverse(m, sol.N, IntervalMatrix.from_floats(inv, DOUBLE),
                         defect, condition)


# ---------------------------------------------------------------------------
# Certified product read-outs


class _ProductEngine:
    """Read-outs of products (fixed series) * e_j against one fixed grid.

    The fixed factor is promoted to the product family once; basis columns
    are promoted sparsely, so a read-out of rows <= r costs O(r * order)
    interval operations instead of a full product per column.
    """

    def __init__(self, series, col_wave, order, ctx, method="forsythe", jobs=1):
        if series.k != 0:
            raise ValueError("product engine expects grading 0")
        prod_wave = abs(series.m) + col_wave
        self.pair = transform_pair(JacobiWeight(0, prod_wave), order,
                                   ctx=ctx, method=method, jobs=jobs)
        self.col_wave = col_wave
        vec = series.coeffs
        for step in range(abs(series.m), prod_wave):
            vec = promote_m(0, step).apply(vec, rows=len(vec))
        self.grid_fixed = to_grid(self.pair, pad(vec, order))

    @property
    def order(self):
        return self.pair.order

    def square(self, row_cap):
        grid = hadamard(self.grid_fixed, self.grid_fixed)
        return to_coeffs(self.pair, grid, n_max=row_cap)

    def column(self, j, row_cap):
        """Rows 0..row_cap of (fixed series) * e_j, e_j in the column wave."""
        if j > self.order:
            raise ValueError(f"column {j} exceeds grid order {self.order}")
        ctx = self.pair.ctx
        unit = [ValidatedScalar(0, ctx)] * j + [ValidatedScalar(1, ctx)]
        vec = IntervalVector(unit, ctx)
        for step in range(self.col_wave, self.pair.basis_weight.m):
            vec = promote_m(0, step).apply(vec, rows=len(vec))
        grid = None
        for t in range(len(vec)):
            c = vec[t]
            if c.is_thin() and c.contains_zero():
                continue
            piece = self.pair.forward.col(t).scale(c)
            grid = piece if grid is None else grid + piece
        return to_coeffs(self.pair, hadamard(self.grid_fixed, grid),
                         n_max=row_cap)


def _folded_factor(sol, ctx):
    """(inverted raising operator at grading/wave 0) applied to U0.

    Products against it realize the m = -1 derivative columns without ever
    applying the dense inverted operator to a tail.
    """
    vec = _float_vector(sol.U0, ctx)
    return SingleModeSeries(0, 0, inv_r_plus_00().apply(vec, rows=sol.N + 1))


def _check_proof_inputs(m, sol, inverse):
    _check_mode(m)
    if sol.m != m:
        raise ValueError(f"solution belongs to wave {sol.m}, not {m}")
    if inverse.N != sol.N or inverse.m != m:
        raise ValueError("approximate inverse does not match the solution")


# ---------------------------------------------------------------------------
# The three bounds


def bound_Y0(m, sol, inverse, bits=PRODUCT_BITS, method="forsythe", jobs=1):
    """Certified residual bound ||A F(U0)||_1.

    Splits into the inverted head A^N (U0 + [L(U0*U0)]_{n<=N}) and the tail
    of L(U0*U0) on N < n <= 2N+m+1 (2N+1 for m = -1), which the tail of A
    passes through unchanged.
    """
    _check_proof_inputs(m, sol, inverse)
    N = sol.N
    ctx = PrecisionContext(bits)
    series = _solution_series(sol, ctx)
    if m >= 0:
        engine = _ProductEngine(series, abs(m), 3 * N + m + 1, ctx, method, jobs)
        q = engine.square(2 * N)
        t = r_minus_pow(m).apply(q, rows=2 * N + m + 1)
        w = inv_dirichlet_laplacian(m).apply(t, rows=2 * N + m + 2)
    else:
        engine = _ProductEngine(series, 1, 2 * N, ctx, method, jobs)
        q = engine.square(2 * N)
        t = inv_r_plus_01().apply(q)
        w = inv_dirichlet_laplacian(1).apply(t, rows=2 * N + 2)
    assert len(w) == 2 * N + max(m, 0) + 2
    # The triangular lift amplifies entry radii (row sums grow with n for
    # m = -1), so stay at product precision through it and round the small
    # lifted coefficients instead of the large raw squares.
    w = w.round_to(DOUBLE)
    head = _float_vector(sol.U0, DOUBLE) + _head(w, N + 1)
    tail = IntervalVector(list(w.data)[N + 1:], DOUBLE)
    return matvec(inverse.AN, head).norm_l1() + tail.norm_l1()


def _derivative_images(m, sol, inverse, columns, bits, method, jobs):
    """Interval columns A^N [L DG(U0) e_j]_{n<=N} for j in ``columns``."""
    N = sol.N
    ctx = PrecisionContext(bits)
    if m >= 0:
        series = _solution_series(sol, ctx)
        engine = _ProductEngine(series, abs(m), 3 * N + m + 1, ctx, method, jobs)
        low = r_minus_pow(m)
    else:
        engine = _ProductEngine(_folded_factor(sol, ctx), 1, 3 * N + 1, ctx,
                                method, jobs)
        low = None
    lap = inv_dirichlet_laplacian(abs(m))
    for j in columns:
        p = engine.column(j, N + 1).round_to(DOUBLE).scale(2)
        if low is not None:
            p = low.apply(p, rows=N + 2)
        w = lap.apply(p, rows=N + 1)
        yield j, matvec(inverse.AN, w)


def galerkin_defect(m, sol, inverse, bits=PRODUCT_BITS, method="forsythe",
                    jobs=1):
    """Certified ||pi^N - A^N (pi^N DF(U0) pi^N)||_1."""
    _check_proof_inputs(m, sol, inverse)
    N = sol.N
    one = ValidatedScalar(1, DOUBLE)
    worst = None
    for j, image in _derivative_images(m, sol, inverse, range(N + 1), bits,
                                       method, jobs):
        base = inverse.AN.col(j) + image
        entries = [-x for x in base.data]
        entries[j] = one - base[j]
        worst = _imax(worst, IntervalVector(entries, DOUBLE).norm_l1())
    return worst


def bound_Z1(m, sol, inverse, bits=PRODUCT_BITS, method="forsythe", jobs=1):
    """Certified bound on ||I - A DF(U0)||_1.

    Maximum of the truncated defect and the cross block of derivative
    columns N < j <= 2N+m+1 (2N+1 for m = -1), plus the analytic tail of
    the inverted Laplacian against the derivative's norm.
    """
    _check_proof_inputs(m, sol, inverse)
    N = sol.N
    finite = galerkin_defect(m, sol, inverse, bits=bits, method=method,
                             jobs=jobs)
    hi = 2 * N + (m if m >= 0 else 0) + 1
    cross = None
    for _, image in _derivative_images(m, sol, inverse, range(N + 1, hi + 1),
                                       bits, method, jobs):
        cross = _imax(cross, image.norm_l1())
    if m >= 0:
        norm = _float_vector(sol.U0, DOUBLE).norm_l1()
        tail = ValidatedScalar(2, DOUBLE) * norm \
            / ValidatedScalar((2 * (N + 1) + m) ** 2, DOUBLE)
    else:
        folded = _folded_factor(sol, PrecisionContext(bits))
        norm = folded.coeffs.round_to(DOUBLE).norm_l1()
        tail = norm / ValidatedScalar(2 * N * N, DOUBLE)
    return _imax(finite, cross) + tail


def bound_Z2(m, sol, inverse, N=None, bits=PRODUCT_BITS):
    """Certified Lipschitz bound for the derivative on balls around U0.

    Purely operator-structural: a truncated block of the inverted Laplacian
    composed with the radial bookkeeping, pushed through A^N, plus analytic
    tail constants.  The solution itself only fixes the truncation.
    """
    _check_proof_inputs(m, sol, inverse)
    if N is None:
        N = sol.N
    elif N != sol.N:
        raise ValueError(f"truncation {N} does not match the solution ({sol.N})")
    two = ValidatedScalar(2, DOUBLE)
    if m >= 0:
        block = inv_dirichlet_laplacian(m).compose(r_minus_pow(m))
        trunc = block.truncation(N + 1, N + 2, DOUBLE)
        tail = two / ValidatedScalar((2 * (N + 1) + m) ** 2, DOUBLE)
        return two * opnorm_l1(matmul(inverse.AN, trunc)) + tail
    block = inv_dirichlet_laplacian(1).compose(inv_r_plus_01())
    trunc = block.truncation(N + 1, N + 1, DOUBLE)
    main = two * opnorm_l1(matmul(inverse.AN, trunc))
    ring = ValidatedScalar(16, DOUBLE) / ValidatedScalar(15, DOUBLE) \
        * opnorm_l1(inverse.AN) / ValidatedScalar(N + 3, DOUBLE)
    far = ValidatedScalar(1, DOUBLE) / ValidatedScalar(2 * N, DOUBLE)
    return main + ring + far


# ---------------------------------------------------------------------------
# Shipped guesses


def fixture_dir():
    override = os.environ.get(FIXTURE_ENV)
    if override:
        return override
    return os.path.join(os.path.dirname(__file__), "fixtures")


def fixture_path(m):
    return os.path.join(fixture_dir(), f"u0_m{m}.json")


def load_fixture(m):
    """Shipped starting guess for one wave number; None when absent."""
    path = fixture_path(m)
    if not os.path.exists(path):
        return None
    with open(path) as fh:
        data = json.load(fh)
    if data.get("m") != m:
        raise ValueError(f"fixture {path} belongs to wave {data.get('m')}")
    return ApproxSolution(m, int(data["N"]), tuple(data["U0"]))


def save_fixture(sol, path=None, note=None):
    if path is None:
        path = fixture_path(sol.m)
    payload = {
        "m": sol.m,
        "N": sol.N,
        "U0": list(sol.U0),
        "norm_l1": sol.norm_l1(),
        "profile": note or "bump amplitude scan + Newton refinement",
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    _atomic_write(path, json.dumps(payload, indent=2) + "\n")
    return path


def _atomic_write(path, text):
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# Certificates


@dataclass(frozen=True)
class ProofCertificate:
    """Self-contained record of one existence proof."""

    m: int
    N: int
    bits: int
    Y0: ValidatedScalar
    Z1: ValidatedScalar
    Z2: ValidatedScalar
    r_m: float
    p_value: ValidatedScalar
    u0_digest: str
    created: str
    runtime: float
    probe_index: int

    def payload(self):
        body = {
            "format": CERTIFICATE_FORMAT,
            "m": self.m,
            "N": self.N,
            "bits": self.bits,
            "Y0": _scalar_payload(self.Y0),
            "Z1": _scalar_payload(self.Z1),
            "Z2": _scalar_payload(self.Z2),
            "r_m": self.r_m.hex(),
            "r_m_approx": self.r_m,
            "p_at_r": _scalar_payload(self.p_value),
            "u0_sha256": self.u0_digest,
            "created": self.created,
            "runtime_seconds": round(self.runtime, 3),
            "probe_index": self.probe_index,
        }
        body["digest"] = _payload_digest(body)
        return body

    def save(self, path):
        _atomic_write(path, json.dumps(self.payload(), indent=2,
                                       sort_keys=True) + "\n")
        return path


def _scalar_payload(x):
    return {"lo": float(x.lo).hex(), "hi": float(x.hi).hex()}


def _scalar_from_payload(entry):
    lo = float.fromhex(entry["lo"])
    hi = float.fromhex(entry["hi"])
    if not lo <= hi:
        raise CertificateError(f"malformed interval [{lo}, {hi}]")
    return ValidatedScalar(lo, DOUBLE, upper=hi)


def _payload_digest(body):
    blob = json.dumps({k: v for k, v in body.items() if k != "digest"},
                      sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def load_certificate(path):
    with open(path) as fh:
        return json.load(fh)


def verify_certificate(source):
    """Re-check a stored certificate without redoing the bounds.

    Verifies the payload digest, the contraction condition Z1 < 1, and the
    sign of the radii polynomial at the stored radius.  Raises
    CertificateError on any failure; returns a summary dict on success.
    """
    if isinstance(source, ProofCertificate):
        payload = source.payload()
    elif isinstance(source, dict):
        payload = source
    else:
        payload = load_certificate(source)
    try:
        stored = payload["digest"]
        m = payload["m"]
        N = payload["N"]
        r = float.fromhex(payload["r_m"])
        y0 = _scalar_from_payload(payload["Y0"])
        z1 = _scalar_from_payload(payload["Z1"])
        z2 = _scalar_from_payload(payload["Z2"])
    except KeyError as exc:
        raise CertificateError(f"missing certificate field {exc}")
    if _payload_digest(payload) != stored:
        raise CertificateError("digest mismatch: certificate was modified")
    _check_mode(m)
    if not (isinstance(N, int) and N >= 1):
        raise CertificateError(f"bad truncation {N!r}")
    if not (math.isfinite(r) and r > 0):
        raise CertificateError(f"bad radius {r!r}")
    if float(y0.lo) < 0:
        raise CertificateError("negative residual bound")
    if not float(z1.hi) < 1:
        raise CertificateError(f"contraction fails: Z1 upper bound "
                               f"{float(z1.hi)} >= 1")
    p = radii.radii_poly(radii.RadiiData(y0, z1, z2), r)
    if not float(p.hi) < 0:
        raise CertificateError(f"radii polynomial not negative at r = {r}: "
                               f"upper bound {float(p.hi)}")
    return {"m": m, "N": N, "r_m": r, "p_hi": float(p.hi)}


# ---------------------------------------------------------------------------
# End-to-end pipeline


def _resolve_guess(m, N, guess, tol, bits, method, jobs):
    if guess is None or (isinstance(guess, str) and guess == "auto"):
        shipped = load_fixture(m)
        if shipped is None:
            return default_guess(m, N, tol=tol)
        seed = shipped.U0[:N + 1]
    elif isinstance(guess, str):
        with open(guess) as fh:
            data = json.load(fh)
        seed = data["U0"] if isinstance(data, dict) else data
    elif isinstance(guess, ApproxSolution):
        seed = guess.U0[:N + 1]
    else:
        seed = guess
    return newton_refine(m, N, seed, tol=tol, bits=bits, method=method,
                         jobs=jobs)


def prove(m, N, bits=PRODUCT_BITS, guess="auto", method="forsythe", jobs=1,
          newton_tol=1e-13, out=None):
    """Run one existence proof end to end and return its certificate.

    ``guess`` may be "auto" (shipped fixture, falling back to the amplitude
    scan), a JSON file path, an ApproxSolution, or a coefficient vector;
    whatever the source, it is refined in place so the proof never depends
    on guess provenance.  ``out`` saves the certificate JSON atomically.
    """
    start = time.perf_counter()
    sol = _resolve_guess(m, N, guess, newton_tol, bits, method, jobs)
    inverse = build_AN(m, sol)
    y0 = bound_Y0(m, sol, inverse, bits=bits, method=method, jobs=jobs)
    z1 = bound_Z1(m, sol, inverse, bits=bits, method=method, jobs=jobs)
    z2 = bound_Z2(m, sol, inverse, bits=bits)
    certified = radii.certify(radii.RadiiData(y0, z1, z2))
    cert = ProofCertificate(
        m=m, N=N, bits=bits, Y0=y0, Z1=z1, Z2=z2,
        r_m=certified.r0, p_value=certified.p_value,
        u0_digest=sol.digest(),
        created=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        runtime=time.perf_counter() - start,
        probe_index=certified.probe_index,
    )
    if out:
        cert.save(out)
    return cert


def export_solution_grid(sol, path, radial=33, angular=64):
    """CSV of midpoint values of the approximate solution on a polar lattice."""
    series = _solution_series(sol, DOUBLE)
    return export_polar_grid(series, path, radial=radial, angular=angular)
