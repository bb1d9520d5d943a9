"""Grid-coefficient transforms for the Jacobi-type families.

The forward matrix of a transform pair holds the basis polynomial values on
the nodes of a certified Gauss rule, (M)_{j,n} = p_n(x_j); applying it to a
coefficient vector evaluates the series on the grid.  When the basis weight
equals the node weight the inverse is available in closed form from the
quadrature identity,

    (M^-1)_{n,j} = w_j p_n(x_j) / W_n,

with W_n the squared norm of p_n -- no linear solve, no conditioning loss.
Padding a coefficient vector with zeros before transforming gives dealiased
polynomial products: a pointwise (Hadamard) multiply on a grid of order
N' captures products of degree up to 2N'+1 exactly, so the recovered
coefficients are rigorous enclosures.

Matrices are built once at extended precision and can be stored down-rounded.
The basis may differ from the node family (cross-weight matrices re-expand a
series on another family's grid); such pairs carry no inverse.
"""

from dataclasses import dataclass

from .interval import (
    EXTENDED,
    IntervalMatrix,
    IntervalVector,
    PrecisionContext,
    ValidatedScalar,
    matvec,
)
from .jacobi import JacobiWeight, eval_forsythe_all, eval_linear_system, scaling_factor_exact
from . import quadrature

__all__ = [
    "TransformPair",
    "build_mmt",
    "build_immt",
    "pad",
    "to_grid",
    "to_coeffs",
    "hadamard",
    "transform_pair",
]

_METHODS = ("forsythe", "linsys", "eigvec")


@dataclass(frozen=True)
class TransformPair:
    basis_weight: JacobiWeight
    node_weight: JacobiWeight
    order: int
    forward: IntervalMatrix
    inverse: object            # IntervalMatrix or None for cross-weight pairs
    ctx: PrecisionContext

    @property
    def same_weight(self):
        return self.basis_weight == self.node_weight

    def round_to(self, ctx):
        """Outward-rounded copy at another storage precision."""
        inv = self.inverse.round_to(ctx) if self.inverse is not None else None
        return TransformPair(self.basis_weight, self.node_weight, self.order,
                             self.forward.round_to(ctx), inv, ctx)


def _work_ctx(ctx, order):
    """Internal build precision for a transform of the given order.

    Direct iteration of the recurrence amplifies enclosure widths by a
    bounded factor per step (the coefficients stay below ~4 on (-1,1)), so
    two extra bits per degree keep the final entries at full storage
    accuracy before the outward rounding at the end.
    """
    return PrecisionContext(max(ctx.bits, ctx.bits + 2 * order + 16))


def _forward_matrix(basis, rule, order, method, work):
    if method == "eigvec":
        if basis != rule.weight:
            raise ValueError(
                "eigenvector evaluation only covers the node family itself")
        return quadrature.eval_on_nodes_eigvec(rule)
    rows = []
    for j in range(order + 1):
        x = rule.nodes[j]
        if method == "forsythe":
            vals = eval_forsythe_all(basis, order, x, work)
        else:
            vals = eval_linear_system(basis, order, x, work)
        rows.append(list(vals.data))
    return IntervalMatrix(rows, work)


def _inverse_matrix(basis, rule, forward, order, work):
    inv_rows = []
    for n in range(order + 1):
        w_n = ValidatedScalar(scaling_factor_exact(basis, n), work)
        inv_rows.append([rule.weights[j] * forward[j, n] / w_n
                         for j in range(order + 1)])
    return IntervalMatrix(inv_rows, work)


def build_mmt(basis, nodes_from, order, method="forsythe", ctx=EXTENDED,
              jobs=1):
    """Forward transform matrix: values of the basis family on a certified
    grid of the node family, built at escalated internal precision and
    stored outward-rounded at ``ctx``."""
    if method not in _METHODS:
        raise ValueError(f"unknown evaluation method {method!r}")
    work = _work_ctx(ctx, order)
    rule = quadrature.gauss_rule(nodes_from, order, work, jobs=jobs)
    forward = _forward_matrix(basis, rule, order, method, work)
    return TransformPair(basis, nodes_from, order, forward.round_to(ctx),
                         None, ctx)


def build_immt(pair):
    """Attach the closed-form inverse; requires matching weights."""
    if not pair.same_weight:
        raise ValueError("inverse transform needs basis and node weights equal")
    work = _work_ctx(pair.ctx, pair.order)
    rule = quadrature.gauss_rule(pair.node_weight, pair.order, work)
    inverse = _inverse_matrix(pair.basis_weight, rule, pair.forward,
                              pair.order, work)
    return TransformPair(pair.basis_weight, pair.node_weight, pair.order,
                         pair.forward, inverse.round_to(pair.ctx), pair.ctx)


_PAIR_CACHE = {}


def transform_pair(weight, order, ctx=EXTENDED, method="forsythe", jobs=1):
    """Cached same-weight pair with both directions attached."""
    key = (weight.k, weight.m, order, ctx.bits, method)
    hit = _PAIR_CACHE.get(key)
    if hit is None:
        work = _work_ctx(ctx, order)
        rule = quadrature.gauss_rule(weight, order, work, jobs=jobs)
        forward = _forward_matrix(weight, rule, order, method, work)
        inverse = _inverse_matrix(weight, rule, forward, order, work)
        hit = TransformPair(weight, weight, order, forward.round_to(ctx),
                            inverse.round_to(ctx), ctx)
        _PAIR_CACHE[key] = hit
    return hit


def pad(a, target):
    """Zero-extend a coefficient vector to length target+1."""
    n = len(a.data) - 1
    if target < n:
        raise ValueError(f"cannot pad length {n + 1} down to {target + 1}")
    ctx = a.ctx
    zero = ValidatedScalar(0, ctx)
    return IntervalVector(list(a.data) + [zero] * (target - n), ctx)


def to_grid(pair, a):
    if len(a.data) != pair.order + 1:
        raise ValueError("coefficient vector does not match transform order")
    return matvec(pair.forward, a)


def to_coeffs(pair, grid, n_max=None):
    """Coefficients from grid values; optionally only the first n_max+1 rows.

    The quadrature behind row n is exact for integrands of degree up to
    2*order+1, so a partial read-out stays rigorous whenever n plus the
    grid data's polynomial degree is within that bound.
    """
    if pair.inverse is None:
        raise ValueError("cross-weight pair has no inverse; "
                         "transform back on a matching-weight pair")
    if len(grid.data) != pair.order + 1:
        raise ValueError("grid vector does not match transform order")
    inv = pair.inverse
    if n_max is not None:
        rows = [[inv[i, j] for j in range(pair.order + 1)]
                for i in range(n_max + 1)]
        inv = IntervalMatrix(rows, pair.ctx)
    return matvec(inv, grid)


def hadamard(u, v):
    if len(u.data) != len(v.data):
        raise ValueError("length mismatch in componentwise product")
    return IntervalVector([a * b for a, b in zip(u.data, v.data)])
