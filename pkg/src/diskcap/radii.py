"""Radii-polynomial certification for Newton-like zero-finding problems.

Given rigorous bounds

- Y0  >= ||A F(x0)||          (residual),
- Z1  >= ||I - A DF(x0)||     (approximate-inverse defect, must be < 1),
- Z2(r) r >= ||A [DF(c) - DF(x0)]|| for all c in the closed ball B_r(x0),

a negative value of p(r) = Z2(r) r^2 - (1 - Z1) r + Y0 certifies a unique
zero of F inside B_r(x0).  ``certify`` searches for such an r with a probe
schedule starting just above the first-order estimate Y0/(1-Z1) and growing
geometrically; the schedule is deterministic and is recorded so certificates
can state exactly which probe succeeded.
"""

from dataclasses import dataclass, field

import gmpy2

from .interval import DOUBLE, ValidatedScalar

#: Probe schedule: start at Y0/(1-Z1) * (1 + 2^-20), grow by 1.25, cap 512.
START_MARGIN = 1.0 + 2.0**-20
GROWTH = 1.25
MAX_PROBES = 512

SCHEDULE = {"start_margin": START_MARGIN, "growth": GROWTH, "max_probes": MAX_PROBES}


class CertificationError(ArithmeticError):
    """No radius could be certified; carries the probe history."""

    def __init__(self, message, probes=None):
        super().__init__(message)
        self.probes = probes or []


@dataclass(frozen=True)
class RadiiData:
    """The three bounds feeding the radii polynomial.

    ``Z2`` is either a ValidatedScalar (constant Lipschitz bound) or a
    callable r -> ValidatedScalar that must be monotone non-decreasing in r.
    """

    Y0: ValidatedScalar
    Z1: ValidatedScalar
    Z2: object


@dataclass(frozen=True)
class CertifiedRadius:
    r0: float
    p_value: ValidatedScalar
    probe_index: int
    probes: list = field(repr=False)


def _z2_at(data, r):
    z2 = data.Z2
    if callable(z2):
        return z2(r)
    return z2


def radii_poly(data, r):
    """Enclosure of p(r) = Z2(r) r^2 - (1 - Z1) r + Y0 at a thin radius r."""
    ctx = data.Y0.ctx
    if not isinstance(r, ValidatedScalar):
        r = ValidatedScalar(r, ctx)
    one = ValidatedScalar(1, ctx)
    return _z2_at(data, r) * r * r - (one - data.Z1) * r + data.Y0


def certify(data):
    """Search the probe schedule for a certified radius.

    Raises CertificationError when Z1 >= 1 cannot be excluded or when no
    probe yields p(r) < 0.
    """
    y0, z1 = data.Y0, data.Z1
    if y0.lo < 0:
        raise CertificationError(f"Y0 must be a nonnegative bound, got {y0!r}")
    if not z1.hi < 1:
        raise CertificationError(
            f"approximate inverse too poor: Z1 upper bound {float(z1.hi)} >= 1")
    up = DOUBLE.up
    if y0.hi == 0:
        r = 2.0**-60
    else:
        r = float(up.mul(up.div(y0.hi, up.sub(1, z1.hi)),
                         gmpy2.mpfr(START_MARGIN)))
    probes = []
    for index in range(MAX_PROBES):
        p = radii_poly(data, r)
        probes.append((r, float(p.hi)))
        if p.hi < 0:
            return CertifiedRadius(r0=r, p_value=p, probe_index=index, probes=probes)
        r *= GROWTH
        if not r < float("inf"):
            break
    best = min(probes, key=lambda t: t[1])
    raise CertificationError(
        f"no radius certified after {len(probes)} probes; "
        f"best p({best[0]:.3e}) = {best[1]:.3e}", probes)
