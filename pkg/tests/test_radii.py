"""Contraction-radius certification from (Y0, Z1, Z2) bounds."""

import pytest

from diskcap.interval import DOUBLE, ValidatedScalar
from diskcap import radii


def iv(x):
    return ValidatedScalar(x, DOUBLE)


def test_basic_certificate_close_to_newton_quotient():
    # representative magnitudes from a small validated solve
    data = radii.RadiiData(Y0=iv(1.57e-14), Z1=iv(0.149), Z2=iv(0.46))
    cert = radii.certify(data)
    quotient = 1.57e-14 / (1 - 0.149)
    assert cert.r0 >= quotient
    assert cert.r0 <= 10 * quotient
    # p(r0) must be certified negative
    assert cert.p_value.hi < 0


def test_radii_poly_sign_is_rigorous():
    data = radii.RadiiData(Y0=iv(1e-10), Z1=iv(0.3), Z2=iv(0.9))
    cert = radii.certify(data)
    p = radii.radii_poly(data, ValidatedScalar(cert.r0, DOUBLE))
    assert p.hi < 0


def test_no_root_when_discriminant_negative():
    # (1-Z1)^2 < 4 Y0 Z2: no real root, certification must fail loudly
    data = radii.RadiiData(Y0=iv(0.3), Z1=iv(0.5), Z2=iv(1.0))
    with pytest.raises(radii.CertificationError) as err:
        radii.certify(data)
    assert err.value.probes  # the probe log is preserved for diagnostics


def test_z1_at_least_one_rejected():
    data = radii.RadiiData(Y0=iv(1e-8), Z1=iv(1.0), Z2=iv(0.1))
    with pytest.raises(radii.CertificationError):
        radii.certify(data)


def test_zero_residual_still_gives_positive_radius():
    data = radii.RadiiData(Y0=iv(0.0), Z1=iv(0.25), Z2=iv(0.5))
    cert = radii.certify(data)
    assert cert.r0 > 0
    assert cert.p_value.hi < 0


def test_wider_bounds_never_shrink_radius():
    base = radii.RadiiData(Y0=iv(1e-12), Z1=iv(0.2), Z2=iv(0.4))
    worse = radii.RadiiData(Y0=iv(2e-12), Z1=iv(0.25), Z2=iv(0.5))
    r_base = radii.certify(base).r0
    r_worse = radii.certify(worse).r0
    assert r_worse >= r_base


def test_probe_schedule_is_recorded():
    data = radii.RadiiData(Y0=iv(3.1e-9), Z1=iv(0.6), Z2=iv(0.2))
    cert = radii.certify(data)
    assert cert.probe_index == len(cert.probes) - 1
    assert cert.probes[cert.probe_index][0] == cert.r0
