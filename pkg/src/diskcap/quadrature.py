"""Validated Gauss rules for the weights (1-x)^k (1+x)^m.

The nodes of the (N+1)-point rule are the eigenvalues of the symmetric
tridiagonal matrix built from the three-term recurrence (Golub-Welsch);
the weight at a node is the squared first component of the corresponding
unit eigenvector times the total mass of the weight.

Everything rests on certified eigenpairs.  A floating-point eigensolver
supplies seeds, Rayleigh-quotient iteration in round-to-nearest mpfr pushes
the residual down to working precision, and a Newton-Kantorovich argument
around the map

    F(lam, u) = (u . u - 1,  T u - lam u)

yields a radius r0 such that the exact eigenpair lies within r0 (in the l1
sense, hence componentwise) of the refined values.  The derivative of F is
affine in (lam, u), so the quadratic bound is the constant 2 ||A||_1.
"""

import functools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import gmpy2
import numpy as np

from . import radii
from .interval import (
    EXTENDED,
    IntervalMatrix,
    IntervalVector,
    PrecisionContext,
    ValidatedScalar,
    sqrt,
)
from .jacobi import (
    JacobiWeight,
    eval_forsythe_all,
    recurrence_coeffs_exact,
    weight_integral_exact,
)

__all__ = [
    "TridiagonalSystem",
    "CertifiedEigenpair",
    "QuadratureRule",
    "RuleError",
    "build_tridiagonal",
    "certify_eigenpair",
    "all_nodes",
    "compute_weights",
    "gauss_rule",
    "eval_on_nodes_eigvec",
    "integrate",
]

MAX_BITS = 4096


class RuleError(ArithmeticError):
    """A rigorous check failed while building a quadrature rule."""


@dataclass(frozen=True)
class TridiagonalSystem:
    """Symmetric tridiagonal eigenproblem whose spectrum is the node set.

    ``mu[j]`` is the diagonal (= beta_j/alpha_j) and ``eta[i]`` couples
    indices i and i+1 (= sqrt(gamma_{i+1}/(alpha_i alpha_{i+1}))).  The
    exact squares of the couplings are kept as Fractions for refinement.
    """

    weight: JacobiWeight
    order: int                 # matrix size is order+1
    mu: IntervalVector
    eta: IntervalVector
    mu_exact: tuple
    eta_sq_exact: tuple
    ctx: PrecisionContext

    @property
    def size(self):
        return self.order + 1


@dataclass(frozen=True)
class CertifiedEigenpair:
    lam: ValidatedScalar       # eigenvalue enclosure (= node)
    q: IntervalVector          # unit eigenvector enclosure
    radius: float              # certified ball radius around the refined pair


@dataclass(frozen=True)
class QuadratureRule:
    weight: JacobiWeight
    order: int
    nodes: IntervalVector
    weights: object            # IntervalVector once compute_weights ran
    pairs: tuple
    ctx: PrecisionContext


def build_tridiagonal(w, N, ctx=EXTENDED):
    mu_exact = []
    eta_sq = []
    alphas = []
    for n in range(N + 1):
        a, b, g = recurrence_coeffs_exact(w, n)
        alphas.append(a)
        mu_exact.append(b / a)
        if n >= 1:
            eta_sq.append(g / (alphas[n - 1] * a))
    mu = IntervalVector([ValidatedScalar(v, ctx) for v in mu_exact], ctx)
    eta = IntervalVector([sqrt(ValidatedScalar(v, ctx)) for v in eta_sq], ctx)
    return TridiagonalSystem(w, N, mu, eta, tuple(mu_exact), tuple(eta_sq), ctx)


# -- refinement in round-to-nearest mpfr -------------------------------------


def _tridiag_solve(sub, diag, sup, rhs):
    """Solve a tridiagonal system with partial pivoting (caller sets the
    active mpfr context).  Bands are modified in place; returns the solution.
    """
    n = len(diag)
    d = list(diag)
    u = list(sup) + [gmpy2.mpfr(0)]
    f = [gmpy2.mpfr(0)] * n          # fill-in two above the diagonal
    b = list(rhs)
    low = list(sub)                  # low[i] sits at (i+1, i)
    for i in range(n - 1):
        if abs(low[i]) > abs(d[i]):
            d[i], low[i] = low[i], d[i]
            u[i], d[i + 1] = d[i + 1], u[i]
            f[i], u[i + 1] = u[i + 1], f[i]
            b[i], b[i + 1] = b[i + 1], b[i]
        if d[i] == 0:
            raise ZeroDivisionError("singular pivot")
        fac = low[i] / d[i]
        d[i + 1] -= fac * u[i]
        u[i + 1] -= fac * f[i]
        b[i + 1] -= fac * b[i]
    if d[n - 1] == 0:
        raise ZeroDivisionError("singular pivot")
    x = [gmpy2.mpfr(0)] * n
    x[n - 1] = b[n - 1] / d[n - 1]
    if n >= 2:
        x[n - 2] = (b[n - 2] - u[n - 2] * x[n - 1]) / d[n - 2]
    for i in range(n - 3, -1, -1):
        x[i] = (b[i] - u[i] * x[i + 1] - f[i] * x[i + 2]) / d[i]
    return x


def _refine_pair(T, lam_hat, u_hat, iters=None):
    """Rayleigh-quotient iteration at the working precision.

    Returns exact mpfr values (lam, u) with u normalized in l2 and u[0] > 0.
    """
    near = T.ctx.nearest
    n = T.size
    if iters is None:
        iters = 3 + T.ctx.bits // 200
    with near:
        mu = [gmpy2.mpfr(Fraction(v)) for v in T.mu_exact]
        eta = [gmpy2.sqrt(gmpy2.mpfr(Fraction(v))) for v in T.eta_sq_exact]
        lam = gmpy2.mpfr(lam_hat)
        u = [gmpy2.mpfr(v) for v in u_hat]

        def apply_t(vec):
            out = []
            for i in range(n):
                s = mu[i] * vec[i]
                if i > 0:
                    s += eta[i - 1] * vec[i - 1]
                if i < n - 1:
                    s += eta[i] * vec[i + 1]
                out.append(s)
            return out

        tol = gmpy2.mpfr(2) ** (8 - T.ctx.bits)
        for _ in range(iters):
            if n == 1:
                lam = mu[0]
                u = [gmpy2.mpfr(1)]
                break
            tu = apply_t(u)
            if max(abs(tu[i] - lam * u[i]) for i in range(n)) < tol:
                break
            # a singular factorization means lam already is an eigenvalue to
            # working precision: nudge only the shift, never lam itself
            shift = lam
            v = None
            for attempt in range(3):
                try:
                    v = _tridiag_solve(eta, [mu[i] - shift for i in range(n)], eta, u)
                    break
                except ZeroDivisionError:
                    shift += gmpy2.mpfr(2) ** (16 * (attempt + 1) - T.ctx.bits)
            if v is None:
                break
            norm = gmpy2.sqrt(sum(vi * vi for vi in v))
            if norm == 0:
                break
            u = [vi / norm for vi in v]
            tu = apply_t(u)
            lam = sum(u[i] * tu[i] for i in range(n))
        if u[0] < 0:
            u = [-ui for ui in u]
    return lam, u


# -- certification ------------------------------------------------------------


# Rounding-error majorant for float64 matrix products: the computed fl(A B)
# differs from A B entrywise by at most gamma_n |A||B| + n * eta_uf, with
# gamma_n = n u/(1-n u), u = 2^-53, valid for every summation order (and
# smaller for blocked/FMA kernels).  The bounds below only need one or two
# safe digits, so crude inflation factors are fine.
_UNIT = 2.0 ** -53
_UNDERFLOW = 2.0 ** -1000


def _gamma(n):
    t = (n + 2) * _UNIT
    return t / (1.0 - t)


def certify_eigenpair(T, lam_hat, u_hat):
    """Certify one eigenpair of T near a floating-point seed.

    The residual of the refined pair is computed with intervals at the
    working precision (it is all cancellation); the Newton-Kantorovich
    bounds themselves are cheap float64 majorants, since they only need to
    be small, not tight.  Raises RuleError with the computed bounds if the
    contraction argument does not close.
    """
    ctx = T.ctx
    n = T.size
    lam, u = _refine_pair(T, lam_hat, u_hat)

    lam_t = ValidatedScalar.exact(lam, ctx)
    u_t = [ValidatedScalar.exact(v, ctx) for v in u]
    mu, eta = T.mu, T.eta

    # residual F(lam, u), thin input so widths come only from mu/eta
    norm_sq = u_t[0] * u_t[0]
    for v in u_t[1:]:
        norm_sq = norm_sq + v * v
    resid = [norm_sq - 1]
    for i in range(n):
        s = (mu[i] - lam_t) * u_t[i]
        if i > 0:
            s = s + eta[i - 1] * u_t[i - 1]
        if i < n - 1:
            s = s + eta[i] * u_t[i + 1]
        resid.append(s)

    # midpoint/radius split of DF at the refined pair
    s_dim = n + 1
    dm = np.zeros((s_dim, s_dim))
    dr = np.zeros((s_dim, s_dim))
    for i, v in enumerate(u_t):
        two_v = 2 * v
        dm[0, 1 + i] = two_v.mid()
        dr[0, 1 + i] = two_v.rad()
        neg_v = -v
        dm[1 + i, 0] = neg_v.mid()
        dr[1 + i, 0] = neg_v.rad()
    for i in range(n):
        diag = mu[i] - lam_t
        dm[1 + i, 1 + i] = diag.mid()
        dr[1 + i, 1 + i] = diag.rad()
        if i > 0:
            dm[1 + i, i] = dm[i, 1 + i] = eta[i - 1].mid()
            dr[1 + i, i] = dr[i, 1 + i] = eta[i - 1].rad()

    a_mat = np.linalg.inv(dm)
    abs_a = np.abs(a_mat)
    g = _gamma(s_dim)
    infl = 1.0 + 64.0 * s_dim * _UNIT   # covers the float accumulations below

    # Y0 >= || A F ||_1
    f_mid = np.array([r.mid() for r in resid])
    f_rad = np.array([r.rad() for r in resid])
    y_mid = a_mat @ f_mid
    y_err = g * (abs_a @ np.abs(f_mid)) + abs_a @ f_rad + s_dim * _UNDERFLOW
    y0 = float((np.sum(np.abs(y_mid)) + np.sum(y_err)) * infl + _UNDERFLOW)

    # Z1 >= || I - A DF ||_1 over the enclosure of DF
    e_mat = np.eye(s_dim) - a_mat @ dm
    p_mat = abs_a @ np.abs(dm)
    r_mat = abs_a @ dr
    col_bounds = np.sum(np.abs(e_mat) + g * (p_mat + np.eye(s_dim)) + r_mat,
                        axis=0)
    z1 = float((np.max(col_bounds) + s_dim * s_dim * _UNDERFLOW) * infl)

    # Z2: the derivative is affine with l1 Lipschitz constant 2
    z2 = float(2.0 * np.max(np.sum(abs_a, axis=0)) * infl)

    try:
        cert = radii.certify(radii.RadiiData(
            Y0=ValidatedScalar(0, ctx, upper=y0),
            Z1=ValidatedScalar(0, ctx, upper=z1),
            Z2=ValidatedScalar(0, ctx, upper=z2)))
    except radii.CertificationError as err:
        raise RuleError(
            f"eigenpair near {float(lam):.6g} not certified: "
            f"Y0={y0:.3g} Z1={z1:.3g}") from err
    r0 = cert.r0
    ball = ValidatedScalar(-r0, ctx, upper=r0)
    lam_enc = lam_t + ball
    q_enc = IntervalVector([v + ball for v in u_t], ctx)
    return CertifiedEigenpair(lam_enc, q_enc, r0)


def _seed_pairs(T):
    import scipy.linalg

    d = np.array([float(v) for v in T.mu_exact])
    if T.size == 1:
        return [(d[0], [1.0])]
    e = np.array([float(gmpy2.sqrt(gmpy2.mpfr(Fraction(v))))
                  for v in T.eta_sq_exact])
    vals, vecs = scipy.linalg.eigh_tridiagonal(d, e)
    return [(vals[j], list(vecs[:, j])) for j in range(T.size)]


def _certify_payload(args):
    """Worker entry point: rebuild the system locally, ship exact endpoints."""
    k, m, N, bits, lam_hat, u_hat = args
    T = _cached_tridiagonal(k, m, N, bits)
    pair = certify_eigenpair(T, lam_hat, u_hat)
    return (
        gmpy2.to_binary(pair.lam.lo), gmpy2.to_binary(pair.lam.hi),
        [(gmpy2.to_binary(v.lo), gmpy2.to_binary(v.hi)) for v in pair.q.data],
        pair.radius,
    )


@functools.lru_cache(maxsize=8)
def _cached_tridiagonal(k, m, N, bits):
    return build_tridiagonal(JacobiWeight(k, m), N, PrecisionContext(bits))


def _pair_from_payload(payload, ctx):
    lam_lo, lam_hi, q_bin, r0 = payload
    lam = ValidatedScalar._raw(gmpy2.from_binary(lam_lo),
                               gmpy2.from_binary(lam_hi), ctx)
    q = IntervalVector([ValidatedScalar._raw(gmpy2.from_binary(lo),
                                             gmpy2.from_binary(hi), ctx)
                        for lo, hi in q_bin], ctx)
    return CertifiedEigenpair(lam, q, r0)


def all_nodes(w, N, ctx=EXTENDED, jobs=1):
    """Certify all N+1 eigenpairs and return the rule (weights not yet set).

    Raises RuleError when two node enclosures overlap or a node is not
    strictly inside (-1, 1); callers should retry at higher precision.
    """
    T = _cached_tridiagonal(w.k, w.m, N, ctx.bits)
    seeds = _seed_pairs(T)
    if jobs > 1 and len(seeds) > 3:
        tasks = [(w.k, w.m, N, ctx.bits, lam, u) for lam, u in seeds]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            payloads = list(pool.map(_certify_payload, tasks, chunksize=4))
        pairs = [_pair_from_payload(p, ctx) for p in payloads]
    else:
        pairs = [certify_eigenpair(T, lam, u) for lam, u in seeds]
    pairs.sort(key=lambda p: p.lam.mid())

    minus_one = ValidatedScalar(-1, ctx)
    one = ValidatedScalar(1, ctx)
    for i, p in enumerate(pairs):
        if not (minus_one.hi < p.lam.lo and p.lam.hi < one.lo):
            raise RuleError(f"node {i} enclosure not strictly inside (-1,1)")
        if i and not pairs[i - 1].lam.strictly_less(p.lam):
            raise RuleError(
                f"node enclosures {i-1} and {i} overlap; "
                f"retry at higher precision")
    nodes = IntervalVector([p.lam for p in pairs], ctx)
    return QuadratureRule(w, N, nodes, None, tuple(pairs), ctx)


def compute_weights(rule):
    """Fill in the weights from the certified eigenvectors."""
    ctx = rule.ctx
    mass = ValidatedScalar(weight_integral_exact(rule.weight), ctx)
    ws = []
    for i, p in enumerate(rule.pairs):
        q0 = p.q[0]
        if q0.lo <= 0:
            raise RuleError(
                f"first eigenvector component at node {i} not certified "
                f"positive; weight would touch zero")
        ws.append(q0 * q0 * mass)
    weights = IntervalVector(ws, ctx)
    total = weights.norm_l1()   # all entries positive
    if not total.contains(weight_integral_exact(rule.weight)):
        raise RuleError("weight sum fails to enclose the weight's total mass")
    return QuadratureRule(rule.weight, rule.order, rule.nodes, weights,
                          rule.pairs, ctx)


_RULE_CACHE = {}


def gauss_rule(w, N, ctx=EXTENDED, jobs=1):
    """Build (or fetch) a fully certified rule, escalating precision on
    failure up to MAX_BITS."""
    key = (w.k, w.m, N, ctx.bits)
    hit = _RULE_CACHE.get(key)
    if hit is not None:
        return hit
    attempt = ctx
    while True:
        try:
            rule = compute_weights(all_nodes(w, N, attempt, jobs=jobs))
            break
        except RuleError:
            if attempt.bits * 2 > MAX_BITS:
                raise
            attempt = attempt.widen()
    _RULE_CACHE[key] = rule
    return rule


# -- Method 3: polynomial values from eigenvectors ---------------------------


def eval_on_nodes_eigvec(rule):
    """Interval matrix of p_n(x_j) recovered from the certified eigenvectors.

    The symmetrizing similarity maps the eigenvector q at node x onto the
    value vector (p_0(x), ..., p_N(x)) up to one common factor, fixed by
    p_0 = 1:  p_n(x_j) = d_n q_n / (d_0 q_0).
    """
    ctx = rule.ctx
    N = rule.order
    d = [ValidatedScalar(1, ctx)]
    for n in range(N):
        a_n, _, _ = recurrence_coeffs_exact(rule.weight, n)
        a_next, _, g_next = recurrence_coeffs_exact(rule.weight, n + 1)
        ratio = ValidatedScalar(Fraction(a_n) * Fraction(g_next) / Fraction(a_next), ctx)
        d.append(d[-1] * sqrt(ratio))
    rows = []
    for j, p in enumerate(rule.pairs):
        q0 = p.q[0]
        if q0.contains_zero():
            raise RuleError(f"degenerate scaling at node {j}")
        rows.append([d[n] * p.q[n] / q0 for n in range(N + 1)])
    return IntervalMatrix(rows, ctx)


def integrate(rule, f_coeffs):
    """Validated integral of f against the weight, f given in the p_n basis."""
    deg = len(f_coeffs) - 1
    if deg > 2 * rule.order + 1:
        raise ValueError(
            f"rule of order {rule.order} is exact only through degree "
            f"{2 * rule.order + 1}, got {deg}")
    if rule.weights is None:
        raise RuleError("rule has no weights yet")
    ctx = rule.ctx
    coeffs = [c if isinstance(c, ValidatedScalar) else ValidatedScalar(c, ctx)
              for c in f_coeffs]
    total = ValidatedScalar(0, ctx)
    for j in range(rule.order + 1):
        vals = eval_forsythe_all(rule.weight, deg, rule.nodes[j], ctx)
        fx = ValidatedScalar(0, ctx)
        for c, v in zip(coeffs, vals.data):
            fx = fx + c * v
        total = total + rule.weights[j] * fx
    return total
