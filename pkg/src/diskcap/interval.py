"""Interval arithmetic with directed rounding over MPFR endpoints.

Every quantity that feeds a certified bound in this package is a
``ValidatedScalar``: a closed interval [lo, hi] whose endpoints are MPFR
floats at a fixed precision, with all arithmetic rounded outward (lo toward
-inf, hi toward +inf).  Precision is carried by a ``PrecisionContext``; the
package uses two layers, a 53-bit layer for bound assembly (binary64 value
set) and an extended layer (128 bits by default) for transform construction.
Conversions between layers always round outward, so enclosures never shrink.

Error policy: any NaN endpoint, inverted interval, or division by an interval
containing zero raises ``IntervalError`` immediately rather than propagating
garbage into a proof.
"""

import decimal
from fractions import Fraction

import gmpy2

__all__ = [
    "IntervalError",
    "PrecisionContext",
    "ValidatedScalar",
    "IntervalVector",
    "IntervalMatrix",
    "add",
    "sub",
    "mul",
    "div",
    "sqrt",
    "mid",
    "rad",
    "hull",
    "contains",
    "pi",
    "cos",
    "sin",
    "matvec",
    "matmul",
    "opnorm_l1",
]


class IntervalError(ArithmeticError):
    """A validated operation could not produce a sound enclosure."""


class PrecisionContext:
    """A pair of MPFR contexts (round-down, round-up) at a fixed precision.

    Instances are interned per bit count so identity comparison is cheap in
    the arithmetic hot paths.
    """

    _instances = {}
    __slots__ = ("bits", "down", "up", "nearest")

    def __new__(cls, bits):
        bits = int(bits)
        if bits < 24:
            raise ValueError("precision below 24 bits is not supported")
        inst = cls._instances.get(bits)
        if inst is None:
            inst = object.__new__(cls)
            inst.bits = bits
            inst.down = gmpy2.context(precision=bits, round=gmpy2.RoundDown)
            inst.up = gmpy2.context(precision=bits, round=gmpy2.RoundUp)
            inst.nearest = gmpy2.context(precision=bits, round=gmpy2.RoundToNearest)
            cls._instances[bits] = inst
        return inst

    def widen(self, factor=2):
        """Next context in the precision-escalation ladder."""
        return PrecisionContext(self.bits * factor)

    def __repr__(self):
        return f"PrecisionContext({self.bits})"


#: 53-bit layer used for bound assembly (same value set as binary64).
DOUBLE = PrecisionContext(53)
#: Extended layer used for transform construction.
EXTENDED = PrecisionContext(128)

_EXACT_NUMS = (int, float)


def _mpfr_pair(value, ctx):
    """Outward-rounded (lo, hi) endpoints enclosing ``value``."""
    if isinstance(value, _EXACT_NUMS):
        # ints may need rounding at the target precision; floats are exact
        # for bits >= 53 but go through the same directed path for safety.
        with ctx.down:
            lo = gmpy2.mpfr(value)
        with ctx.up:
            hi = gmpy2.mpfr(value)
        return lo, hi
    if isinstance(value, Fraction):
        value = gmpy2.mpq(value.numerator, value.denominator)
    if isinstance(value, (gmpy2.mpq, gmpy2.mpz, gmpy2.mpfr, str)):
        with ctx.down:
            lo = gmpy2.mpfr(value)
        with ctx.up:
            hi = gmpy2.mpfr(value)
        return lo, hi
    raise TypeError(f"cannot build an interval from {type(value).__name__}")


class ValidatedScalar:
    """A closed interval [lo, hi] with outward-rounded arithmetic.

    The usual operators are wired to the module-level functions; mixing with
    plain ints, floats or Fractions converts the plain operand to a thin
    (or outward-rounded, for non-representable rationals) interval first.
    """

    __slots__ = ("lo", "hi", "ctx")

    def __init__(self, value, ctx=DOUBLE, upper=None):
        if upper is None:
            lo, hi = _mpfr_pair(value, ctx)
        else:
            lo, _ = _mpfr_pair(value, ctx)
            _, hi = _mpfr_pair(upper, ctx)
        if not lo <= hi:  # also catches NaN endpoints
            raise IntervalError(f"invalid interval endpoints [{lo}, {hi}]")
        self.lo = lo
        self.hi = hi
        self.ctx = ctx

    @classmethod
    def _raw(cls, lo, hi, ctx):
        """Endpoints already rounded by the caller; only sanity-check."""
        if not lo <= hi:
            raise IntervalError(f"invalid interval endpoints [{lo}, {hi}]")
        self = object.__new__(cls)
        self.lo = lo
        self.hi = hi
        self.ctx = ctx
        return self

    @classmethod
    def exact(cls, value, ctx=DOUBLE):
        """Thin interval; raises if the value is not exactly representable."""
        iv = cls(value, ctx)
        if iv.lo != iv.hi:
            raise IntervalError(f"{value!r} is not representable at {ctx.bits} bits")
        return iv

    # -- conversions -------------------------------------------------------

    def round_to(self, ctx):
        """Outward re-rounding into another precision layer."""
        if ctx is self.ctx:
            return self
        with ctx.down:
            lo = gmpy2.mpfr(self.lo)
        with ctx.up:
            hi = gmpy2.mpfr(self.hi)
        return ValidatedScalar._raw(lo, hi, ctx)

    def endpoints_decimal(self, digits=None):
        """Decimal strings (lo rounded down, hi rounded up); lossy but sound:
        re-parsing outward yields an enclosure of this interval."""
        if digits is None:
            digits = int(self.ctx.bits * 0.30103) + 4
        return (_decimal_str(self.lo, digits, decimal.ROUND_FLOOR),
                _decimal_str(self.hi, digits, decimal.ROUND_CEILING))

    @classmethod
    def from_decimal(cls, lo_str, hi_str, ctx):
        """Outward parse of decimal endpoint strings."""
        with ctx.down:
            lo = gmpy2.mpfr(lo_str)
        with ctx.up:
            hi = gmpy2.mpfr(hi_str)
        return cls._raw(lo, hi, ctx)

    # -- queries -----------------------------------------------------------

    def mid(self):
        near = DOUBLE.nearest
        f = float(near.div(near.add(self.lo, self.hi), 2))
        if f != f:
            raise IntervalError("midpoint is NaN")
        return f

    def rad(self):
        """Radius around mid(); [mid-rad, mid+rad] covers the interval."""
        m = self.mid()
        up = DOUBLE.up
        return float(max(up.sub(gmpy2.mpfr(m), self.lo),
                         up.sub(self.hi, gmpy2.mpfr(m)), gmpy2.mpfr(0)))

    def width(self):
        return float(self.ctx.up.sub(self.hi, self.lo))

    def mag(self):
        """Upper bound on |x| over the interval (an mpfr, exact)."""
        # note: plain abs()/- on mpfr round through the ambient thread
        # context; the per-layer context keeps the full precision, where
        # negation is exact
        near = self.ctx.nearest
        return max(near.abs(self.lo), near.abs(self.hi))

    def mig(self):
        """Lower bound on |x| over the interval (an mpfr, exact)."""
        if self.lo <= 0 <= self.hi:
            return gmpy2.mpfr(0)
        near = self.ctx.nearest
        return min(near.abs(self.lo), near.abs(self.hi))

    def contains(self, x):
        if isinstance(x, ValidatedScalar):
            return self.lo <= x.lo and x.hi <= self.hi
        if isinstance(x, Fraction):
            x = gmpy2.mpq(x.numerator, x.denominator)
        return self.lo <= x <= self.hi

    def contains_zero(self):
        return self.lo <= 0 <= self.hi

    def is_thin(self):
        return self.lo == self.hi

    def strictly_less(self, other):
        other_lo = other.lo if isinstance(other, ValidatedScalar) else other
        return self.hi < other_lo

    def intersects(self, other):
        return self.lo <= other.hi and other.lo <= self.hi

    # -- operators ---------------------------------------------------------

    def __add__(self, other):
        return add(self, _coerce(other, self.ctx))

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, _coerce(other, self.ctx))

    def __rsub__(self, other):
        return sub(_coerce(other, self.ctx), self)

    def __mul__(self, other):
        return mul(self, _coerce(other, self.ctx))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, _coerce(other, self.ctx))

    def __rtruediv__(self, other):
        return div(_coerce(other, self.ctx), self)

    def __neg__(self):
        near = self.ctx.nearest  # negation at matching precision is exact
        return ValidatedScalar._raw(near.minus(self.hi), near.minus(self.lo),
                                    self.ctx)

    def __abs__(self):
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        near = self.ctx.nearest
        return ValidatedScalar._raw(gmpy2.mpfr(0),
                                    max(near.minus(self.lo), self.hi),
                                    self.ctx)

    def __pow__(self, n):
        return pow_int(self, n)

    def __repr__(self):
        return f"[{self.lo}, {self.hi}]"


def _coerce(x, ctx):
    if isinstance(x, ValidatedScalar):
        return x
    return ValidatedScalar(x, ctx)


def _join(a, b):
    """Working context for a binary operation (wider of the two layers)."""
    if a.ctx is b.ctx:
        return a.ctx
    return a.ctx if a.ctx.bits >= b.ctx.bits else b.ctx


def _decimal_str(x, digits, rounding):
    if gmpy2.is_infinite(x):
        return "-inf" if x < 0 else "inf"
    q = gmpy2.mpq(x)
    with decimal.localcontext() as dctx:
        dctx.prec = digits
        dctx.rounding = rounding
        d = decimal.Decimal(int(gmpy2.numer(q))) / decimal.Decimal(int(gmpy2.denom(q)))
    return str(d)


# -- scalar operations -----------------------------------------------------


def add(a, b):
    ctx = _join(a, b)
    return ValidatedScalar._raw(ctx.down.add(a.lo, b.lo),
                                ctx.up.add(a.hi, b.hi), ctx)


def sub(a, b):
    ctx = _join(a, b)
    return ValidatedScalar._raw(ctx.down.sub(a.lo, b.hi),
                                ctx.up.sub(a.hi, b.lo), ctx)


def mul(a, b):
    ctx = _join(a, b)
    al, ah, bl, bh = a.lo, a.hi, b.lo, b.hi
    down, up = ctx.down, ctx.up
    if al >= 0:
        if bl >= 0:
            lo, hi = down.mul(al, bl), up.mul(ah, bh)
        elif bh <= 0:
            lo, hi = down.mul(ah, bl), up.mul(al, bh)
        else:
            lo, hi = down.mul(ah, bl), up.mul(ah, bh)
    elif ah <= 0:
        if bl >= 0:
            lo, hi = down.mul(al, bh), up.mul(ah, bl)
        elif bh <= 0:
            lo, hi = down.mul(ah, bh), up.mul(al, bl)
        else:
            lo, hi = down.mul(al, bh), up.mul(al, bl)
    else:
        if bl >= 0:
            lo, hi = down.mul(al, bh), up.mul(ah, bh)
        elif bh <= 0:
            lo, hi = down.mul(ah, bl), up.mul(al, bl)
        else:
            lo = min(down.mul(al, bh), down.mul(ah, bl))
            hi = max(up.mul(al, bl), up.mul(ah, bh))
    return ValidatedScalar._raw(lo, hi, ctx)


def div(a, b):
    ctx = _join(a, b)
    bl, bh = b.lo, b.hi
    if bl <= 0 <= bh:
        raise IntervalError(f"division by an interval containing zero: {b!r}")
    al, ah = a.lo, a.hi
    down, up = ctx.down, ctx.up
    if bl > 0:
        if al >= 0:
            lo, hi = down.div(al, bh), up.div(ah, bl)
        elif ah <= 0:
            lo, hi = down.div(al, bl), up.div(ah, bh)
        else:
            lo, hi = down.div(al, bl), up.div(ah, bl)
    else:
        if al >= 0:
            lo, hi = down.div(ah, bh), up.div(al, bl)
        elif ah <= 0:
            lo, hi = down.div(ah, bl), up.div(al, bh)
        else:
            lo, hi = down.div(ah, bh), up.div(al, bh)
    return ValidatedScalar._raw(lo, hi, ctx)


def sqrt(a):
    if a.lo < 0:
        raise IntervalError(f"sqrt of an interval containing negatives: {a!r}")
    ctx = a.ctx
    return ValidatedScalar._raw(ctx.down.sqrt(a.lo), ctx.up.sqrt(a.hi), ctx)


def pow_int(a, n):
    """a**n for integer n (negative n via reciprocal)."""
    if not isinstance(n, int):
        raise TypeError("only integer powers are supported")
    if n < 0:
        return div(ValidatedScalar(1, a.ctx), pow_int(a, -n))
    if n == 0:
        return ValidatedScalar(1, a.ctx)
    if n == 1:
        return a
    ctx = a.ctx
    if n % 2 == 0:
        lo_base, hi_base = a.mig(), a.mag()
        lo = _mpfr_pow(lo_base, n, ctx.down)
        hi = _mpfr_pow(hi_base, n, ctx.up)
        return ValidatedScalar._raw(lo, hi, ctx)
    # odd powers are monotone
    neg = ctx.nearest.minus
    lo = (_mpfr_pow(a.lo, n, ctx.down) if a.lo >= 0
          else neg(_mpfr_pow(neg(a.lo), n, ctx.up)))
    hi = (_mpfr_pow(a.hi, n, ctx.up) if a.hi >= 0
          else neg(_mpfr_pow(neg(a.hi), n, ctx.down)))
    return ValidatedScalar._raw(lo, hi, ctx)


def _mpfr_pow(base, n, mpfr_ctx):
    """base**n for base >= 0 by square-and-multiply, every step rounded one way.

    Directed rounding is preserved under composition for nonnegative factors,
    so the result is a one-sided bound in the direction of ``mpfr_ctx``.
    """
    result = gmpy2.mpfr(1)
    power = base
    while n:
        if n & 1:
            result = mpfr_ctx.mul(result, power)
        n >>= 1
        if n:
            power = mpfr_ctx.mul(power, power)
    return result


def mid(a):
    return a.mid()


def rad(a):
    return a.rad()


def hull(a, b):
    ctx = _join(a, b)
    return ValidatedScalar._raw(min(a.lo, b.lo), max(a.hi, b.hi), ctx)


def contains(a, x):
    return a.contains(x)


def pi(ctx):
    return ValidatedScalar._raw(ctx.down.const_pi(), ctx.up.const_pi(), ctx)


def cos(a):
    """Enclosure of cos over an interval argument."""
    ctx = a.ctx
    pi_iv = pi(ctx)
    two_pi_lo = ctx.down.mul(pi_iv.lo, 2)
    if ctx.up.sub(a.hi, a.lo) >= two_pi_lo:
        return ValidatedScalar._raw(gmpy2.mpfr(-1), gmpy2.mpfr(1), ctx)
    lo = min(ctx.down.cos(a.lo), ctx.down.cos(a.hi))
    hi = max(ctx.up.cos(a.lo), ctx.up.cos(a.hi))
    # include +/-1 whenever a multiple of pi may lie inside the argument
    k_first = int(gmpy2.floor(ctx.down.div(a.lo, pi_iv.hi))) - 1
    k_last = int(gmpy2.ceil(ctx.up.div(a.hi, pi_iv.lo))) + 1
    for k in range(k_first, k_last + 1):
        k_pi = mul(ValidatedScalar(k, ctx), pi_iv)
        if k_pi.lo <= a.hi and a.lo <= k_pi.hi:
            if k % 2 == 0:
                hi = max(hi, gmpy2.mpfr(1))
            else:
                lo = min(lo, gmpy2.mpfr(-1))
    lo = max(lo, gmpy2.mpfr(-1))
    hi = min(hi, gmpy2.mpfr(1))
    return ValidatedScalar._raw(lo, hi, ctx)


def sin(a):
    half_pi = div(pi(a.ctx), ValidatedScalar(2, a.ctx))
    return cos(sub(half_pi, a))


# -- vectors and matrices ----------------------------------------------------


class IntervalVector:
    """A list of ValidatedScalars sharing one precision context."""

    __slots__ = ("data", "ctx")

    def __init__(self, entries, ctx=None):
        self.data = list(entries)
        if ctx is None:
            if not self.data:
                raise ValueError("empty vector needs an explicit context")
            ctx = self.data[0].ctx
        self.ctx = ctx
        for x in self.data:
            if x.ctx is not ctx:
                raise ValueError("mixed precision contexts in one vector")

    @classmethod
    def from_values(cls, values, ctx):
        return cls([ValidatedScalar(v, ctx) for v in values], ctx)

    @classmethod
    def zeros(cls, n, ctx):
        zero = ValidatedScalar(0, ctx)
        return cls([zero] * n, ctx)

    def __len__(self):
        return len(self.data)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return IntervalVector(self.data[i], self.ctx)
        return self.data[i]

    def __setitem__(self, i, value):
        self.data[i] = value

    def __iter__(self):
        return iter(self.data)

    def __add__(self, other):
        return IntervalVector([add(x, y) for x, y in zip(self.data, other.data, strict=True)])

    def __sub__(self, other):
        return IntervalVector([sub(x, y) for x, y in zip(self.data, other.data, strict=True)])

    def scale(self, c):
        c = _coerce(c, self.ctx)
        return IntervalVector([mul(x, c) for x in self.data], )

    def norm_l1(self):
        """Enclosure of sum |x_i|."""
        ctx = self.ctx
        lo = gmpy2.mpfr(0)
        hi = gmpy2.mpfr(0)
        for x in self.data:
            a = abs(x)
            lo = ctx.down.add(lo, a.lo)
            hi = ctx.up.add(hi, a.hi)
        return ValidatedScalar._raw(lo, hi, ctx)

    def mids(self):
        import numpy as np

        return np.array([x.mid() for x in self.data])

    def round_to(self, ctx):
        return IntervalVector([x.round_to(ctx) for x in self.data], ctx)

    def __repr__(self):
        return f"IntervalVector({self.data!r})"


class IntervalMatrix:
    """Dense rectangular matrix of ValidatedScalars (row-major)."""

    __slots__ = ("rows", "shape", "ctx")

    def __init__(self, rows, ctx=None):
        self.rows = [list(r) for r in rows]
        nrows = len(self.rows)
        ncols = len(self.rows[0]) if nrows else 0
        for r in self.rows:
            if len(r) != ncols:
                raise ValueError("ragged rows")
        if ctx is None:
            ctx = self.rows[0][0].ctx
        self.ctx = ctx
        self.shape = (nrows, ncols)

    @classmethod
    def zeros(cls, nrows, ncols, ctx):
        zero = ValidatedScalar(0, ctx)
        return cls([[zero] * ncols for _ in range(nrows)], ctx)

    @classmethod
    def identity(cls, n, ctx):
        zero = ValidatedScalar(0, ctx)
        one = ValidatedScalar(1, ctx)
        return cls([[one if i == j else zero for j in range(n)] for i in range(n)], ctx)

    @classmethod
    def from_floats(cls, array, ctx):
        return cls([[ValidatedScalar(float(v), ctx) for v in row] for row in array], ctx)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __setitem__(self, ij, value):
        i, j = ij
        self.rows[i][j] = value

    def row(self, i):
        return IntervalVector(self.rows[i], self.ctx)

    def col(self, j):
        return IntervalVector([r[j] for r in self.rows], self.ctx)

    def __add__(self, other):
        return IntervalMatrix(
            [[add(x, y) for x, y in zip(ra, rb, strict=True)]
             for ra, rb in zip(self.rows, other.rows, strict=True)])

    def __sub__(self, other):
        return IntervalMatrix(
            [[sub(x, y) for x, y in zip(ra, rb, strict=True)]
             for ra, rb in zip(self.rows, other.rows, strict=True)])

    def transpose(self):
        nrows, ncols = self.shape
        return IntervalMatrix([[self.rows[i][j] for i in range(nrows)]
                               for j in range(ncols)], self.ctx)

    def mids(self):
        import numpy as np

        return np.array([[x.mid() for x in row] for row in self.rows])

    def max_rad(self):
        return max((x.rad() for row in self.rows for x in row), default=0.0)

    def round_to(self, ctx):
        return IntervalMatrix([[x.round_to(ctx) for x in row] for row in self.rows], ctx)

    def __repr__(self):
        return f"IntervalMatrix(shape={self.shape})"


def matvec(M, v):
    """Enclosure of M @ v with endpoint-level accumulation."""
    nrows, ncols = M.shape
    if len(v) != ncols:
        raise ValueError(f"shape mismatch: {M.shape} @ {len(v)}")
    ctx = M.ctx if M.ctx.bits >= v.ctx.bits else v.ctx
    down, up = ctx.down, ctx.up
    out = []
    vd = v.data
    for row in M.rows:
        acc_lo = gmpy2.mpfr(0)
        acc_hi = gmpy2.mpfr(0)
        for a, b in zip(row, vd):
            p = mul(a, b)
            acc_lo = down.add(acc_lo, p.lo)
            acc_hi = up.add(acc_hi, p.hi)
        out.append(ValidatedScalar._raw(acc_lo, acc_hi, ctx))
    return IntervalVector(out, ctx)


def matmul(A, B):
    """Enclosure of A @ B."""
    n, k = A.shape
    k2, m = B.shape
    if k != k2:
        raise ValueError(f"shape mismatch: {A.shape} @ {B.shape}")
    ctx = A.ctx if A.ctx.bits >= B.ctx.bits else B.ctx
    down, up = ctx.down, ctx.up
    Bcols = list(zip(*B.rows))
    out = []
    for row in A.rows:
        out_row = []
        for col in Bcols:
            acc_lo = gmpy2.mpfr(0)
            acc_hi = gmpy2.mpfr(0)
            for a, b in zip(row, col):
                p = mul(a, b)
                acc_lo = down.add(acc_lo, p.lo)
                acc_hi = up.add(acc_hi, p.hi)
            out_row.append(ValidatedScalar._raw(acc_lo, acc_hi, ctx))
        out.append(out_row)
    return IntervalMatrix(out, ctx)


def opnorm_l1(M):
    """Enclosure of the induced l1 operator norm (max absolute column sum)."""
    nrows, ncols = M.shape
    ctx = M.ctx
    down, up = ctx.down, ctx.up
    best_lo = gmpy2.mpfr(0)
    best_hi = gmpy2.mpfr(0)
    for j in range(ncols):
        acc_lo = gmpy2.mpfr(0)
        acc_hi = gmpy2.mpfr(0)
        for i in range(nrows):
            a = abs(M.rows[i][j])
            acc_lo = down.add(acc_lo, a.lo)
            acc_hi = up.add(acc_hi, a.hi)
        if acc_hi > best_hi:
            best_hi = acc_hi
        if acc_lo > best_lo:
            best_lo = acc_lo
    return ValidatedScalar._raw(min(best_lo, best_hi), best_hi, ctx)
