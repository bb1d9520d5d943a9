"""Jacobi-type orthogonal polynomials on (-1, 1) with validated evaluation.

The family is indexed by a weight (1-x)^k (1+x)^m with non-negative integer
exponents, normalized so p_0 = 1 (hence p_n(1) = C(n+k, n)).  The three-term
recurrence is

    p_{n+1}(x) = (alpha_n x - beta_n) p_n(x) - gamma_n p_{n-1}(x)

with rational coefficients

    alpha_n = (2n+k+m+1)(2n+k+m+2) / (2(n+1)(n+k+m+1))
    beta_n  = (m^2-k^2)(2n+k+m+1) / (2(n+1)(n+k+m+1)(2n+k+m))
    gamma_n = (n+k)(n+m)(2n+k+m+2) / ((n+1)(n+k+m+1)(2n+k+m))

At n = 0 the beta/gamma formulas degenerate to 0/0 when k = m = 0; the
algebraic limits beta_0 = (m-k)/2 and gamma_0 = 0 are used instead (gamma_0
multiplies p_{-1} = 0, so any finite value would do).

Two point-evaluation strategies are provided: direct interval iteration of
the recurrence ("forsythe"), and a certified solve of the unit-lower-
triangular banded system A(x) p = e_1 whose sub-diagonals hold the recurrence
("linsys").  A third, eigenvector ratios on quadrature nodes, lives in the
quadrature module since it needs certified eigenpairs.
"""

import functools
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from . import radii
from .interval import IntervalVector, ValidatedScalar

__all__ = [
    "JacobiWeight",
    "RecurrenceCoeffs",
    "recurrence_coeffs",
    "recurrence_coeffs_exact",
    "scaling_factor",
    "scaling_factor_exact",
    "weight_integral",
    "weight_integral_exact",
    "endpoint_value",
    "eval_forsythe",
    "eval_forsythe_all",
    "eval_linear_system",
]


@dataclass(frozen=True, order=True)
class JacobiWeight:
    """Exponents of the weight (1-x)^k (1+x)^m."""

    k: int
    m: int

    def __post_init__(self):
        if not (isinstance(self.k, int) and isinstance(self.m, int)):
            raise TypeError("weight exponents must be integers")
        if self.k < 0 or self.m < 0:
            raise ValueError("weight exponents must be non-negative")


@dataclass(frozen=True)
class RecurrenceCoeffs:
    alpha: ValidatedScalar
    beta: ValidatedScalar
    gamma: ValidatedScalar


def recurrence_coeffs_exact(w, n):
    """(alpha_n, beta_n, gamma_n) as exact rationals."""
    k, m = w.k, w.m
    s = 2 * n + k + m
    alpha = Fraction((s + 1) * (s + 2), 2 * (n + 1) * (n + k + m + 1))
    if n == 0:
        beta = Fraction(m - k, 2)
        gamma = Fraction(0)
    else:
        beta = Fraction((m * m - k * k) * (s + 1),
                        2 * (n + 1) * (n + k + m + 1) * s)
        gamma = Fraction((n + k) * (n + m) * (s + 2),
                         (n + 1) * (n + k + m + 1) * s)
    return alpha, beta, gamma


def recurrence_coeffs(w, n, ctx):
    a, b, g = recurrence_coeffs_exact(w, n)
    return RecurrenceCoeffs(ValidatedScalar(a, ctx),
                            ValidatedScalar(b, ctx),
                            ValidatedScalar(g, ctx))


@functools.lru_cache(maxsize=None)
def _coeff_table(w, n_max, bits):
    """Interval recurrence coefficients for n = 0..n_max-1 (cached)."""
    from .interval import PrecisionContext

    ctx = PrecisionContext(bits)
    return [recurrence_coeffs(w, n, ctx) for n in range(n_max)]


def scaling_factor_exact(w, n):
    """||p_n||^2 in the weighted L2 inner product, as an exact rational.

    Computed from the cancellation-safe product quotient
    prod_{i=1..k}(n+i) / prod_{i=1..k}(n+m+i), which stays in machine-sized
    integers instead of forming factorials.
    """
    k, m = w.k, w.m
    num = 1
    den = 1
    for i in range(1, k + 1):
        num *= n + i
        den *= n + m + i
    return Fraction(2 ** (k + m + 1) * num, (2 * n + k + m + 1) * den)


def scaling_factor(w, n, ctx):
    return ValidatedScalar(scaling_factor_exact(w, n), ctx)


def weight_integral_exact(w):
    """Total mass of the weight: integral of (1-x)^k (1+x)^m over (-1, 1)."""
    k, m = w.k, w.m
    num = 2 ** (k + m + 1)
    for i in range(1, k + 1):  # k! m! / (k+m+1)! without big factorials
        num *= i
    den = 1
    for i in range(m + 1, k + m + 2):
        den *= i
    return Fraction(num, den)


def weight_integral(w, ctx):
    return ValidatedScalar(weight_integral_exact(w), ctx)


def endpoint_value(w, n):
    """p_n(1) = C(n+k, n), exact."""
    return comb(n + w.k, n)


# -- Method 1: direct recurrence iteration ----------------------------------


def eval_forsythe_all(w, n_max, x, ctx=None):
    """Enclosures of p_0(x), ..., p_n_max(x) by interval recurrence."""
    if ctx is None:
        ctx = x.ctx
    if x.ctx is not ctx:
        x = x.round_to(ctx)
    coeffs = _coeff_table(w, n_max, ctx.bits)
    one = ValidatedScalar(1, ctx)
    values = [one]
    if n_max == 0:
        return IntervalVector(values, ctx)
    prev = ValidatedScalar(0, ctx)
    cur = one
    for n in range(n_max):
        c = coeffs[n]
        nxt = (c.alpha * x - c.beta) * cur - c.gamma * prev
        values.append(nxt)
        prev, cur = cur, nxt
    return IntervalVector(values, ctx)


def eval_forsythe(w, n, x, ctx=None):
    """Enclosure of p_n(x) by interval recurrence."""
    return eval_forsythe_all(w, n, x, ctx)[n]


# -- Method 2: certified banded linear solve ---------------------------------


def _system_subdiagonals(w, N, x, ctx):
    """First and second sub-diagonals of the unit-lower-triangular system.

    Row i of A(x) reads  gamma_{i-1} p_{i-2} - (alpha_{i-1} x - beta_{i-1})
    p_{i-1} + p_i,  so solving A(x) p = e_1 reproduces the recurrence.
    """
    coeffs = _coeff_table(w, N, ctx.bits)
    theta = [-(c.alpha * x - c.beta) for c in coeffs]      # A[i+1, i]
    gamma = [coeffs[n].gamma for n in range(1, N)]         # A[i+2, i]
    return theta, gamma


def eval_linear_system(w, N, x, ctx=None):
    """Enclosures of (p_0(x), ..., p_N(x)) via a certified linear solve.

    The approximate solution and the approximate inverse both come from
    plain double forward substitution; the Newton-Kantorovich bounds then
    certify one exact solution near the approximation (Z2 = 0 since the
    problem is linear).
    """
    if ctx is None:
        ctx = x.ctx
    if x.ctx is not ctx:
        x = x.round_to(ctx)
    if N == 0:
        return IntervalVector([ValidatedScalar(1, ctx)], ctx)

    exact = [recurrence_coeffs_exact(w, n) for n in range(N)]

    # approximate solution: run the recurrence in round-to-nearest at the
    # working precision (forward substitution on the triangular system)
    near = ctx.nearest
    with near:
        import gmpy2

        xm = gmpy2.mpfr(x.lo) / 2 + gmpy2.mpfr(x.hi) / 2
        p_hat = [gmpy2.mpfr(1)]
        for n in range(N):
            a, b, g = exact[n]
            val = (gmpy2.mpfr(a) * xm - gmpy2.mpfr(b)) * p_hat[n]
            if n >= 1:
                val -= gmpy2.mpfr(g) * p_hat[n - 1]
            p_hat.append(val)

    # preconditioner in plain doubles; it only needs to be roughly right
    a_float = np.zeros((N + 1, N + 1))
    np.fill_diagonal(a_float, 1.0)
    xf = float(xm)
    for n in range(N):
        a, b, g = exact[n]
        a_float[n + 1, n] = -(float(a) * xf - float(b))
        if n >= 1:
            a_float[n + 1, n - 1] = float(g)

    import scipy.linalg

    approx_inv = scipy.linalg.solve_triangular(
        a_float, np.eye(N + 1), lower=True, unit_diagonal=True)

    theta, gamma = _system_subdiagonals(w, N, x, ctx)
    p_thin = [ValidatedScalar.exact(v, ctx) for v in p_hat]

    # residual A(x) p_hat - e1, using the band structure
    resid = []
    one = ValidatedScalar(1, ctx)
    for i in range(N + 1):
        r = p_thin[i] - (one if i == 0 else 0)
        if i >= 1:
            r = r + theta[i - 1] * p_thin[i - 1]
        if i >= 2:
            r = r + gamma[i - 2] * p_thin[i - 2]
        resid.append(r)

    inv_cols = [[ValidatedScalar(float(approx_inv[i, j]), ctx)
                 for i in range(N + 1)] for j in range(N + 1)]

    def inv_times(vec):
        out = [ValidatedScalar(0, ctx) for _ in range(N + 1)]
        for j, vj in enumerate(vec):
            if vj.lo == 0 and vj.hi == 0:
                continue
            col = inv_cols[j]
            for i in range(j, N + 1):  # inverse of lower triangular is lower
                out[i] = out[i] + col[i] * vj
        return IntervalVector(out, ctx)

    y0 = inv_times(resid).norm_l1()

    # I - approx_inv A(x), column by column (A has at most 3 entries per column)
    defect_cols = []
    for j in range(N + 1):
        col = [ValidatedScalar(0, ctx) for _ in range(N + 1)]
        entries = [(j, one)]
        if j + 1 <= N:
            entries.append((j + 1, theta[j]))
        if j + 2 <= N:
            entries.append((j + 2, gamma[j]))
        for i, aij in entries:
            inv_col = inv_cols[i]
            for r_ in range(i, N + 1):
                col[r_] = col[r_] + inv_col[r_] * aij
        col[j] = col[j] - one
        defect_cols.append(IntervalVector(col, ctx).norm_l1())
    z1 = defect_cols[0]
    for c in defect_cols[1:]:
        if c.hi > z1.hi:
            z1 = c

    data = radii.RadiiData(Y0=y0, Z1=z1, Z2=ValidatedScalar(0, ctx))
    cert = radii.certify(data)
    r0 = ValidatedScalar(-cert.r0, ctx, upper=cert.r0)
    return IntervalVector([p + r0 for p in p_thin], ctx)
