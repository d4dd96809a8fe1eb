"""Thermodynamic-limit partition function per site and its log-derivative.

``kappa`` is the L-th root of the leading transfer-matrix eigenvalue as
L -> infinity and ``omega = d/dlam log kappa``.  Every closed form is a
gamma-function ratio, times the exponential of a "CDD" integral for the
levels below n.  Levels m < n have a cut at Re lam = -Delta/2; region II lies
right of it and region I is reached through the crossing reflection
lam -> -Delta - lam.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction as F
from functools import lru_cache
from typing import Iterable, Optional

import numpy as np
from scipy.integrate import quad
from scipy.special import loggamma, psi

from .errors import DomainError, PoleError, PrecisionError

POLE_TOL = 1e-9

# A gamma table is a list of (a, b, sign): Gamma(a + b*lam) ** sign.


def _table(plus_num, minus_num, plus_den, minus_den, b):
    out = []
    out += [(float(a), b, 1) for a in plus_num]
    out += [(float(a), -b, 1) for a in minus_num]
    out += [(float(a), b, -1) for a in plus_den]
    out += [(float(a), -b, -1) for a in minus_den]
    return out


def _sp6_table(alpha: str):
    e, t, s = 1 / 8, 1 / 3, 1 / 8
    if alpha == "6":
        return (
            _table([F(9, 8), F(3, 2)], [F(5, 8), 1], [F(5, 8), 1], [F(1, 8), F(1, 2)], e)
            + _table([F(1, 3)], [F(2, 3)], [F(2, 3)], [F(1, 3)], t)
            + _table(
                [F(1, 4), F(5, 8), F(7, 8)],
                [F(1, 8), F(3, 8), F(3, 4)],
                [F(1, 8), F(3, 8), F(3, 4)],
                [F(1, 4), F(5, 8), F(7, 8)],
                s,
            )
        )
    if alpha == "14":
        return (
            _table(
                [F(19, 16), F(23, 16)], [F(11, 16), F(15, 16)],
                [F(11, 16), F(15, 16)], [F(3, 16), F(7, 16)], e,
            )
            + _table([F(7, 6)], [F(5, 6)], [F(5, 6)], [F(7, 6)], t)
            + _table(
                [F(9, 16), F(15, 16)], [F(7, 16), F(17, 16)],
                [F(7, 16), F(17, 16)], [F(9, 16), F(15, 16)], s,
            )
        )
    if alpha == "14'":
        return _table([F(11, 8)], [F(7, 8)], [F(7, 8)], [F(3, 8)], e)
    raise DomainError(f"unknown Sp(6) label {alpha!r}; use '6', '14' or \"14'\"")


SP6_PREFACTOR = {"6": 64.0, "14": 64.0, "14'": 8.0}
SP6_LEVEL = {"6": 1, "14": 2, "14'": 3}


def _general_table(n: int, m: int):
    q = 4 * (n + 1)
    b = 1 / (2 * (n + 1))
    if m == n:
        return _table([F(5 * n + 7, q)], [F(3 * n + 5, q)], [F(3 * n + 5, q)], [F(n + 3, q)], b)
    if m == 1:
        h = 2 * (n + 1)
        return _table(
            [F(2 * n + 3, h), F(3, 2)], [F(n + 2, h), 1],
            [F(n + 2, h), 1], [F(1, h), F(1, 2)], b,
        )
    return _table(
        [F(4 * n + m + 5, q), F(6 * n - m + 7, q)],
        [F(2 * n + m + 3, q), F(4 * n - m + 5, q)],
        [F(2 * n + m + 3, q), F(4 * n - m + 5, q)],
        [F(m + 1, q), F(2 * n - m + 3, q)],
        b,
    )


def _check_poles(table, lam):
    for a, b, sign in table:
        z = a + b * lam
        if sign > 0 and abs(z.imag) < POLE_TOL and z.real < POLE_TOL:
            if abs(z.real - round(z.real)) < POLE_TOL:
                raise PoleError(f"Gamma argument {z} sits on a pole at lam={lam}")


def _log_gamma_product(table, lam) -> complex:
    lam = complex(lam)
    _check_poles(table, lam)
    return complex(sum(sign * loggamma(a + b * lam) for a, b, sign in table))


def _dlog_gamma_product(table, lam) -> complex:
    lam = complex(lam)
    _check_poles(table, lam)
    # poles of the denominator gammas are zeros of kappa: psi blows up there
    for a, b, sign in table:
        z = a + b * lam
        if abs(z.imag) < POLE_TOL and z.real < POLE_TOL and abs(z.real - round(z.real)) < POLE_TOL:
            raise PoleError(f"digamma argument {z} sits on a pole at lam={lam}")
    return complex(sum(sign * b * psi(a + b * lam) for a, b, sign in table))


# --------------------------------------------------------------------------
# CDD integral


@dataclass(frozen=True)
class QuadratureSpec:
    upper_cut: Optional[float] = None  # default 60/n
    abs_tol: float = 1e-12
    limit: int = 200


def _decay_rate(n: int, m: int) -> float:
    return (2 * n - m + 1) / 2


def cdd_integral(n: int, m: int, lam: complex, kind: str = "kappa",
                 quad_spec: QuadratureSpec = QuadratureSpec()) -> complex:
    """Integral term of omega (``kind='omega'``) or of log kappa (``kind='kappa'``).

    The weight is ``e^{-a t}(1-e^{-mt}) / ((1-e^{-nt})(1+e^{-(n+1)t}))`` with
    ``a = (2n-m+1)/2``, multiplied by ``e^{lam t} + e^{-lam t}`` (omega) or by
    ``(e^{lam t} - e^{-lam t}) / t`` (kappa).
    """
    if not 1 <= m < n:
        raise DomainError(f"the integral term exists only for 1 <= m < n, got m={m}, n={n}")
    if kind not in ("kappa", "omega"):
        raise ValueError("kind must be 'kappa' or 'omega'")
    lam = complex(lam)
    a = _decay_rate(n, m)
    if abs(lam.real) >= a:
        raise DomainError(f"|Re lam| = {abs(lam.real)} is outside the convergence bound {a}")
    sign = -1.0 if kind == "kappa" else 1.0

    def weight(t):
        # expm1 keeps the small-t ratio accurate; exponents are merged to avoid overflow
        w = -np.expm1(-m * t) / (-np.expm1(-n * t) * (1.0 + np.exp(-(n + 1) * t)))
        body = np.exp(-(a - lam) * t) + sign * np.exp(-(a + lam) * t)
        if kind == "kappa":
            return w * body / t
        return w * body

    cut = quad_spec.upper_cut if quad_spec.upper_cut is not None else 60.0 / n
    opts = dict(epsabs=quad_spec.abs_tol * 0.1, epsrel=1e-13, limit=quad_spec.limit, complex_func=True)
    head, err_head = quad(weight, 0.0, cut, **opts)
    tail, err_tail = quad(weight, cut, np.inf, **opts)
    err = abs(err_head) + abs(err_tail)
    if err > max(100 * quad_spec.abs_tol, 1e-10):
        raise PrecisionError(f"quadrature error estimate {err:.3g} above tolerance at lam={lam}")
    return complex(head + tail)


# --------------------------------------------------------------------------
# regions


def region_of(n: int, lam: complex) -> str:
    delta = n + 1
    x = complex(lam).real
    if abs(x + delta / 2) < 1e-12:
        raise DomainError(f"lam={lam} lies on the cut Re lam = {-delta / 2}")
    return "II" if x > -delta / 2 else "I"


def _resolve(n: int, m: int, region: Optional[str], lam: complex):
    """Map a query to (region-II argument, reflected?)."""
    if m == n:
        return complex(lam), False
    region = region or region_of(n, lam)
    if region == "II":
        return complex(lam), False
    if region == "I":
        return complex(-(n + 1) - lam), True
    raise DomainError(f"region must be 'I' or 'II', got {region!r}")


# --------------------------------------------------------------------------
# general Sp(2n)


@lru_cache(maxsize=4096)
def _log_kappa_general(n: int, m: int, lam: complex) -> complex:
    table = _general_table(n, m)
    if m == n:
        return np.log(2 * (n + 1)) + _log_gamma_product(table, lam)
    return 2 * np.log(2 * (n + 1)) + cdd_integral(n, m, lam, "kappa") + _log_gamma_product(table, lam)


@lru_cache(maxsize=4096)
def _omega_general_ii(n: int, m: int, lam: complex) -> complex:
    table = _general_table(n, m)
    if m == n:
        return _dlog_gamma_product(table, lam)
    return cdd_integral(n, m, lam, "omega") + _dlog_gamma_product(table, lam)


def _check_level(n: int, m: int):
    if n < 2:
        raise DomainError("closed forms are given for n >= 2")
    if not 1 <= m <= n:
        raise DomainError(f"level m={m} outside 1..{n}")


def kappa_general(n: int, m: int, region: Optional[str], lam: complex) -> complex:
    """kappa^(m) for Sp(2n); ``region=None`` picks the side of the cut from Re lam."""
    _check_level(n, m)
    arg, _ = _resolve(n, m, region, lam)
    return complex(np.exp(_log_kappa_general(n, m, arg)))


def omega_general(n: int, m: int, region: Optional[str], lam: complex) -> complex:
    _check_level(n, m)
    arg, reflected = _resolve(n, m, region, lam)
    val = _omega_general_ii(n, m, arg)
    return -val if reflected else val


# --------------------------------------------------------------------------
# printed Sp(6) forms


def _sp6_args(alpha: str, region: Optional[str], lam: complex):
    table = _sp6_table(alpha)
    arg, reflected = _resolve(3, SP6_LEVEL[alpha], region, lam)
    return table, arg, reflected


def kappa_sp6(alpha: str, region: Optional[str], lam: complex) -> complex:
    """Pure gamma-product kappa for the Sp(6) labels '6', '14' and "14'"."""
    table, arg, _ = _sp6_args(alpha, region, lam)
    return complex(SP6_PREFACTOR[alpha] * np.exp(_log_gamma_product(table, arg)))


def omega_sp6(alpha: str, region: Optional[str], lam: complex) -> complex:
    table, arg, reflected = _sp6_args(alpha, region, lam)
    val = _dlog_gamma_product(table, arg)
    return -val if reflected else val


def ground_state_closed_form_sp6() -> float:
    r2, r3 = np.sqrt(2.0), np.sqrt(3.0)
    return float(
        5 / 4 - np.pi / 4 + np.pi / (2 * r2) - 2 * np.pi / (3 * r3)
        - np.log(2.0) / 2 - np.log(3 + 2 * r2) / (2 * r2)
    )


def ground_state_energy(n: int) -> float:
    """Ground-state energy per site, omega_II^(1)(0)."""
    if n < 2:
        raise DomainError("ground_state_energy needs n >= 2")
    return float(omega_general(n, 1, "II", 0.0).real)


@dataclass(frozen=True)
class ThermoFunction:
    """Region-aware evaluator bundle for one (n, m)."""

    n: int
    m: int

    def kappa(self, lam: complex, region: Optional[str] = None) -> complex:
        return kappa_general(self.n, self.m, region, lam)

    def omega(self, lam: complex, region: Optional[str] = None) -> complex:
        return omega_general(self.n, self.m, region, lam)

    def log_kappa_derivative(self, lam: complex, h: float = 1e-5, region: Optional[str] = None) -> complex:
        region = region or (None if self.m == self.n else region_of(self.n, lam))
        up = np.log(self.kappa(lam + h, region))
        down = np.log(self.kappa(lam - h, region))
        return complex((up - down) / (2 * h))


# --------------------------------------------------------------------------
# functional relations


@dataclass(frozen=True)
class Relation:
    """``k1(lam) * kl(lam + s_left) = factor(lam) * kr(lam + s_right)``.

    Levels carry an explicit region tag; ``None`` on the right marks the
    bare scalar relation (inversion).
    """

    name: str
    left: tuple  # (m, region, shift)
    right: Optional[tuple]
    factor: object
    poles: tuple  # zeros of factor for the omega form


def thermo_relations(n: int) -> list:
    """The κ relation set for Sp(2n) in the sign convention that holds for positive κ.

    The printed scalars (λ-1)(λ+Δ) and (λ²-1)(λ+Δ) are negative on the real
    window around 0 while every κ there is positive, so these relations are
    stated with (1-λ)(λ+Δ) and (1-λ²)(λ+Δ).  The omega forms are unchanged.
    """
    d = n + 1
    rels = [
        Relation("inversion", (1, "I", -d), None,
                 lambda x: (x * x - 1) * (x * x - d * d), (1, -1, d, -d)),
    ]
    for m in range(1, n - 1):
        rels.append(Relation(f"step({m})", (m, "II", -(m + 1) / 2), (m + 1, "II", -m / 2),
                             lambda x: (1 - x) * (x + d), (1, -d)))
    rels.append(Relation("top", (n - 1, "II", -n / 2), (n, None, -(n - 1) / 2),
                         lambda x: (1 - x * x) * (x + d), (1, -1, -d)))
    for m in range(1, n - 1):
        rels.append(Relation(f"descend({m})", (m + 1, "I", -(2 * d - m) / 2), (m, "I", -(2 * d - m - 1) / 2),
                             lambda x: (1 - x) * (x + d), (1, -d)))
    rels.append(Relation("last", (n, None, -(d + 2) / 2), (n - 1, "I", -(d + 1) / 2),
                         lambda x: x + d, (-d,)))
    return rels


def verify_thermo_equations(n: int, samples: Iterable[complex]) -> list:
    """Residuals of every kappa and omega relation, plus the omega^(n) closure.

    Each row is ``{relation, kind, lambda, residual}``; the kappa residual is
    relative to the size of the left-hand side.  Rows with a shifted argument
    on a pole carry ``skipped=True``.
    """
    d = n + 1
    rows = []
    for lam in samples:
        lam = complex(lam)
        k1 = kappa_general(n, 1, "II", lam)
        w1 = omega_general(n, 1, "II", lam)
        for rel in thermo_relations(n):
            try:
                m, reg, s = rel.left
                lhs_k = k1 * kappa_general(n, m, reg, lam + s)
                lhs_w = w1 + omega_general(n, m, reg, lam + s)
                rhs_k = rel.factor(lam)
                rhs_w = sum(1 / (lam - p) for p in rel.poles)
                if rel.right is not None:
                    m2, reg2, s2 = rel.right
                    rhs_k = rhs_k * kappa_general(n, m2, reg2, lam + s2)
                    rhs_w = rhs_w + omega_general(n, m2, reg2, lam + s2)
            except PoleError as exc:
                rows.append({"relation": rel.name, "kind": "kappa", "lambda": lam,
                             "residual": float("nan"), "skipped": True, "reason": str(exc)})
                continue
            rows.append({"relation": rel.name, "kind": "kappa", "lambda": lam,
                         "residual": float(abs(lhs_k - rhs_k) / max(abs(lhs_k), 1.0)), "skipped": False})
            rows.append({"relation": rel.name, "kind": "omega", "lambda": lam,
                         "residual": float(abs(lhs_w - rhs_w)), "skipped": False})
        closure = (omega_general(n, n, None, lam - (n - 1) / 2)
                   + omega_general(n, n, None, lam - (3 * d - 2) / 2)
                   - 1 / (lam + 2) - 1 / (lam - d))
        rows.append({"relation": "closure", "kind": "omega", "lambda": lam,
                     "residual": float(abs(closure)), "skipped": False})
    return rows


def strip_samples(count: int, seed: int = 0, half_width: float = 0.45, imag: float = 0.3) -> np.ndarray:
    """Pseudorandom points in the window where every shifted argument is region-consistent."""
    rng = np.random.default_rng(seed)
    return rng.uniform(-half_width, half_width, count) + 1j * rng.uniform(-imag, imag, count)
