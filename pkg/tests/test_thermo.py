import mpmath
import numpy as np
import pytest

from spvertex.errors import DomainError, PoleError
from spvertex.thermo import (
    ThermoFunction,
    cdd_integral,
    ground_state_closed_form_sp6,
    ground_state_energy,
    kappa_general,
    kappa_sp6,
    omega_general,
    omega_sp6,
    region_of,
    strip_samples,
    verify_thermo_equations,
)


def test_closed_form_value():
    mpmath.mp.dps = 40
    pi, s2, s3 = mpmath.pi, mpmath.sqrt(2), mpmath.sqrt(3)
    ref = (mpmath.mpf(5) / 4 - pi / 4 + pi / (2 * s2) - 2 * pi / (3 * s3)
           - mpmath.log(2) / 2 - mpmath.log(3 + 2 * s2) / (2 * s2))
    assert abs(ground_state_closed_form_sp6() - float(ref)) < 1e-14
    assert abs(float(ref) + 0.603676) < 1e-6


def test_special_values():
    assert abs(kappa_sp6("6", "II", 0.0) - 4) < 1e-10
    assert abs(kappa_sp6("14'", None, 0.0) - 3) < 1e-10
    for n in range(2, 7):
        assert abs(kappa_general(n, n, None, 0.0) - (n + 3) / 2) < 1e-10


def test_unitarity_of_kappa():
    lam = 0.35
    prod = kappa_sp6("6", "II", lam) * kappa_sp6("6", "II", -lam)
    assert abs(prod - (lam**2 - 1) * (lam**2 - 16)) < 1e-10


def test_last_level_omega_equation():
    lam = 0.7
    lhs = omega_sp6("14'", None, lam - 1) + omega_sp6("14'", None, lam - 5)
    assert abs(lhs - (1 / (lam + 2) + 1 / (lam - 4))) < 1e-12


def test_cdd_integral_limits():
    assert abs(cdd_integral(3, 1, 0.0, "kappa")) < 1e-15
    w0 = cdd_integral(3, 1, 0.0, "omega")
    assert abs(w0.imag) < 1e-15 and w0.real > 0
    assert abs(cdd_integral(3, 1, 0.2, "omega") - cdd_integral(3, 1, -0.2, "omega")) < 1e-12
    with pytest.raises(DomainError):
        cdd_integral(3, 1, 3.5)


def test_sp6_and_general_agree():
    for lam in strip_samples(20, seed=1):
        for m, alpha in ((1, "6"), (2, "14"), (3, "14'")):
            for fn_g, fn_s in ((kappa_general, kappa_sp6), (omega_general, omega_sp6)):
                a, b = fn_g(3, m, None, lam), fn_s(alpha, None, lam)
                assert abs(a - b) <= 1e-8 * max(1, abs(b))


def test_crossing_reflection():
    for n in (2, 3, 4):
        for lam in strip_samples(20, seed=n):
            assert abs(kappa_general(n, n, None, lam) - kappa_general(n, n, None, -(n + 1) - lam)) < 1e-10
            assert abs(kappa_general(n, 1, "I", -(n + 1) - lam) - kappa_general(n, 1, "II", lam)) < 1e-12
            assert abs(omega_general(n, 1, "I", -(n + 1) - lam) + omega_general(n, 1, "II", lam)) < 1e-12


def test_regions():
    assert region_of(3, 0.1) == "II" and region_of(3, -3.0) == "I"
    with pytest.raises(DomainError):
        region_of(3, -2.0 + 0.5j)


def test_pole_error():
    with pytest.raises(PoleError):
        omega_sp6("6", "II", 1.0)


@pytest.mark.parametrize("n,lam,tol", [(3, 0.3, 1e-9), (5, 0.2, 1e-8), (4, 0.6, 1e-10)])
def test_functional_equations(n, lam, tol):
    rows = verify_thermo_equations(n, [lam])
    assert all(not r["skipped"] for r in rows)
    assert max(r["residual"] for r in rows) <= tol


def test_ground_state_energies():
    assert abs(ground_state_energy(3) - ground_state_closed_form_sp6()) < 1e-10
    for n in (2, 6):
        e = ground_state_energy(n)
        assert np.isfinite(e) and e == ground_state_energy(n)


def test_log_derivative():
    f = ThermoFunction(4, 2)
    for lam in strip_samples(5, seed=9):
        assert abs(f.log_kappa_derivative(lam) - f.omega(lam)) < 1e-7
