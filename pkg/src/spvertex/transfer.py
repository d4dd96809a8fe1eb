"""Fundamental and fused transfer matrices on L sites.

``T^(m)(lam) = Tr_A R_{A1}(lam) R_{A2}(lam) ... R_{AL}(lam)`` with the level-m
family on the auxiliary space.  With this ordering ``T(0)`` maps
``|a1 ... aL>`` to ``Delta^L |a2 ... aL a1>``.  Site 1 is the slowest index
of a state vector.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigs

from .algebra import ModelParams, RFamily, make_model
from .errors import (
    AmbiguousBranchError,
    BranchError,
    ContourError,
    ConvergenceError,
    DegreeDeficientError,
    PolynomialityError,
    SizeError,
)
from .fusion import fusion_hierarchy

DENSE_LIMIT = 2**16
MATRIX_FREE_LIMIT = 2**27
LAMBDA_REF = -0.2


@dataclass(frozen=True)
class TransferSpec:
    params: ModelParams
    level: int
    L: int
    mode: str = "matrix-free"

    def __post_init__(self):
        n = self.params.n
        if not 1 <= self.level <= n:
            raise ValueError(f"level {self.level} outside 1..{n}")
        if self.L < 1:
            raise SizeError("L must be positive")
        if self.mode not in ("dense", "matrix-free"):
            raise ValueError("mode must be 'dense' or 'matrix-free'")
        limit = DENSE_LIMIT if self.mode == "dense" else MATRIX_FREE_LIMIT
        if self.dim > limit:
            raise SizeError(f"state dimension {self.dim} exceeds the {self.mode} budget {limit}")

    @property
    def dim(self) -> int:
        return self.params.site_dim**self.L

    @property
    def family(self) -> RFamily:
        return fusion_hierarchy(self.params.n)[self.level - 1]

    @property
    def degree(self) -> int:
        return self.L * self.family.degree

    @classmethod
    def make(cls, n: int, level: int, L: int, mode: str = "matrix-free") -> "TransferSpec":
        return cls(make_model(n), level, L, mode)


@dataclass
class EigenSample:
    lam: complex
    value: complex
    residual: float  # ||T v - value v|| / ||v||
    overlap: float = 1.0
    vector: Optional[np.ndarray] = field(default=None, repr=False)


# --------------------------------------------------------------------------
# building and applying


def build_transfer_dense(spec: TransferSpec, lam: complex, family: RFamily | None = None) -> np.ndarray:
    """Dense T by accumulating the monodromy once per value of the trace index."""
    if spec.dim > DENSE_LIMIT:
        raise SizeError(f"dense transfer matrix of dimension {spec.dim} exceeds {DENSE_LIMIT}")
    fam = family or spec.family
    q, d = spec.params.site_dim, fam.dim_a
    r4 = fam.tensor(lam)  # [g_out, b, g_in, a]
    out = np.zeros((spec.dim, spec.dim), dtype=complex)
    for g0 in range(d):
        # mono[g, B, A]: open auxiliary index g after the sites processed so far
        mono = r4[g0][None].transpose(0, 2, 1, 3)  # [1, g_in, b, a]
        mono = mono.reshape(d, q, q)
        for _ in range(spec.L - 1):
            mono = np.einsum("gBA,gbha->hBbAa", mono, r4)
            k = mono.shape[1] * q
            mono = mono.reshape(d, k, k)
        out += mono[g0]
    return out


def apply_transfer(spec: TransferSpec, lam: complex, v: np.ndarray, family: RFamily | None = None) -> np.ndarray:
    """Matrix-free ``T(lam) @ v``; ``v`` may be ``(dim,)`` or ``(dim, k)``.

    Sites are contracted from L down to 1.  After each step the freshly
    written site index is rotated to the front, so the next site to process
    is always the last axis.
    """
    fam = family or spec.family
    q, d, L, Q = spec.params.site_dim, fam.dim_a, spec.L, spec.dim
    v = np.asarray(v)
    if v.shape[0] != Q:
        raise ValueError(f"state has length {v.shape[0]}, expected {Q}")
    single = v.ndim == 1
    vb = v.reshape(Q, -1).T  # (k, Q)
    k = vb.shape[0]
    mat = fam(lam)  # rows (g_out, b), cols (g_in, a)
    rest = Q // q
    w = np.zeros((k, d, d, rest, q), dtype=complex)
    for g in range(d):
        w[:, g, g] = vb.reshape(k, rest, q)
    for _ in range(L):
        # w[k, g0, g_in, P, a] -> [k, g0, P, g_out, b]
        y = np.matmul(w.transpose(0, 1, 3, 2, 4).reshape(k, d, rest, d * q), mat.T)
        y = y.reshape(k, d, rest, d, q).transpose(0, 1, 3, 4, 2)  # [k, g0, g_out, b, P]
        w = np.ascontiguousarray(y).reshape(k, d, d, rest, q)
    out = np.einsum("kggx->kx", w.reshape(k, d, d, Q))
    return out[0] if single else out.T


# --------------------------------------------------------------------------
# weights and symmetry


def site_weights(n: int) -> np.ndarray:
    """Weight vector of each site basis state: +e_a for a < n, -e_(2n-1-a) after."""
    w = np.zeros((2 * n, n), dtype=int)
    for a in range(n):
        w[a, a] = 1
        w[2 * n - 1 - a, a] = -1
    return w


def weight_sector(n: int, L: int) -> np.ndarray:
    """Basis indices of weight 0 (L even) or e_1 (L odd).

    That weight is the lowest dominant weight of its class, so every
    multiplet of the chain has a state in it.
    """
    ws = site_weights(n)
    total = np.zeros((2 * n) ** L, dtype=object)
    states = np.array(list(itertools.product(range(2 * n), repeat=L)))
    tot = ws[states].sum(axis=1)
    target = np.zeros(n, dtype=int)
    if L % 2:
        target[0] = 1
    del total
    return np.flatnonzero((tot == target).all(axis=1))


def translate(v: np.ndarray, q: int, L: int) -> np.ndarray:
    """Cyclic shift of the site order matching T(0) / Delta^L."""
    return np.moveaxis(np.asarray(v).reshape((q,) * L), 0, L - 1).ravel()


# --------------------------------------------------------------------------
# eigenvalues


def _rayleigh(spec, lam, v, family=None):
    y = apply_transfer(spec, lam, v, family)
    nv = np.vdot(v, v).real
    val = np.vdot(v, y) / nv
    res = np.linalg.norm(y - val * v) / np.sqrt(nv)
    return complex(val), float(res)


def leading_eigenvalue(spec: TransferSpec, lam: complex, tol: float = 1e-12, max_iter: int = 5000,
                       seed: int = 0, prev_vector: np.ndarray | None = None,
                       sector: np.ndarray | None = None, k: int = 8) -> EigenSample:
    """Leading eigenpair of T(lam) by Arnoldi iteration.

    Without ``prev_vector`` the largest-modulus eigenvalue is returned.
    With it, the carried vector is returned directly when it is still an
    eigenvector at ``lam``; otherwise the Ritz pair of maximal overlap among
    the top ``k`` (all pairs for small dense sectors).
    ``sector`` restricts the iteration to a conserved weight subspace.
    """
    Q = spec.dim
    if prev_vector is not None:
        # continuation along a commuting family: keep the carried vector if it
        # is still an eigenvector here
        p = np.asarray(prev_vector, dtype=complex) / np.linalg.norm(prev_vector)
        val, res = _rayleigh(spec, lam, p)
        if res <= 1e-9 * max(abs(val), 1e-300):
            return EigenSample(complex(lam), val, res, 1.0, p)
    idx = np.arange(Q) if sector is None else np.asarray(sector)
    N = len(idx)

    def mv(x):
        full = np.zeros(Q, dtype=complex)
        full[idx] = x
        return apply_transfer(spec, lam, full)[idx]

    if N <= 300:
        mat = np.array([mv(e) for e in np.eye(N)]).T
        w, vecs = np.linalg.eig(mat)
    else:
        rng = np.random.default_rng(seed)
        v0 = rng.standard_normal(N) + 0j
        if prev_vector is not None:
            v0 = np.asarray(prev_vector)[idx] + 1e-3 * v0
        op = LinearOperator((N, N), matvec=mv, dtype=complex)
        try:
            w, vecs = eigs(op, k=min(k, N - 2), which="LM", v0=v0, tol=tol, maxiter=max_iter)
        except ArpackNoConvergence as exc:
            res = float("inf")
            if len(exc.eigenvalues):
                x = exc.eigenvectors[:, 0]
                res = float(np.linalg.norm(mv(x) - exc.eigenvalues[0] * x) / np.linalg.norm(x))
            raise ConvergenceError(f"Arnoldi did not converge at lam={lam}", residual=res) from exc
    order = np.argsort(-np.abs(w), kind="stable")
    w, vecs = w[order], vecs[:, order]

    def embed(x):
        full = np.zeros(Q, dtype=complex)
        full[idx] = x
        return full / np.linalg.norm(full)

    if prev_vector is not None:
        p = np.asarray(prev_vector) / np.linalg.norm(prev_vector)
        # overlap with each eigenspace, so a degenerate multiplet counts as one
        ov, vec = -1.0, None
        done = np.zeros(len(w), dtype=bool)
        for j in range(len(w)):
            if done[j]:
                continue
            cluster = np.abs(w - w[j]) <= 1e-9 * max(abs(w[j]), 1e-300)
            done |= cluster
            basis, _ = np.linalg.qr(np.array([embed(vecs[:, i]) for i in np.flatnonzero(cluster)]).T)
            proj = basis @ (basis.conj().T @ p)
            if np.linalg.norm(proj) > ov:
                ov = float(np.linalg.norm(proj))
                vec = proj / ov
        if ov < 0.5:
            raise AmbiguousBranchError(
                f"no Ritz vector at lam={lam} continues the branch (best overlap {ov:.3f})")
    else:
        scale = abs(w[0])
        if len(w) > 1 and abs(abs(w[1]) - scale) < 1e-9 * scale and abs(w[1] - w[0]) > 1e-9 * scale:
            raise AmbiguousBranchError(
                f"top moduli coincide at lam={lam}: {w[0]:.12g} vs {w[1]:.12g}")
        ov, vec = 1.0, embed(vecs[:, 0])
    val, res = _rayleigh(spec, lam, vec)
    if res > 1e-6 * max(abs(val), 1e-300):
        raise ConvergenceError(f"leading eigenpair at lam={lam} has residual {res:.3g}", residual=res)
    return EigenSample(complex(lam), val, res, ov, vec)


class LeadingBranch:
    """The physical leading eigenvector Lambda_0 of an L-site chain.

    It is the largest-modulus eigenvector of T^(1) at ``lam_ref = -0.2``, the
    chain's ground state.  All fused T^(m)(lam) commute with T^(1), so the
    same vector carries Lambda_0^(m)(lam) for every level and every lam; each
    evaluation reports its eigen-residual as a certificate.
    """

    def __init__(self, n: int, L: int, lam_ref: float = LAMBDA_REF, seed: int = 0,
                 tol: float = 1e-12, max_iter: int = 5000, use_sector: bool = True):
        self.params = make_model(n)
        self.n, self.L, self.lam_ref = n, L, lam_ref
        base = TransferSpec(self.params, 1, L)
        sector = weight_sector(n, L) if use_sector else None
        sample = leading_eigenvalue(base, lam_ref, tol=tol, max_iter=max_iter, seed=seed, sector=sector)
        self.vector = sample.vector
        self.reference = sample
        q = self.params.site_dim
        self.translation = complex(np.vdot(self.vector, translate(self.vector, q, L)))
        self._specs = {}

    def spec(self, level: int) -> TransferSpec:
        if level not in self._specs:
            self._specs[level] = TransferSpec(self.params, level, self.L)
        return self._specs[level]

    def sample(self, level: int, lam: complex) -> EigenSample:
        val, res = _rayleigh(self.spec(level), lam, self.vector)
        return EigenSample(complex(lam), val, res, 1.0)

    def value(self, level: int, lam: complex) -> complex:
        return self.sample(level, lam).value


# --------------------------------------------------------------------------
# eigenvalue polynomial and zeros


@dataclass
class EigenPolynomial:
    """Lambda_0(lam) = sum_k coefficients[k] * ((lam - center) / radius)^k."""

    level: int
    L: int
    coefficients: np.ndarray
    center: float
    radius: float
    heldout_error: float
    delta: int

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, lam):
        w = (np.asarray(lam, dtype=complex) - self.center) / self.radius
        return np.polynomial.polynomial.polyval(w, self.coefficients)

    def monomial_coefficients(self) -> np.ndarray:
        """Coefficients in powers of lam, lowest first."""
        poly = np.polynomial.Polynomial(self.coefficients)
        shift = np.polynomial.Polynomial([-self.center / self.radius, 1 / self.radius])
        return poly(shift).coef


@dataclass
class ZeroReport:
    zeros: np.ndarray
    strip: tuple
    centerline_count: int
    in_strip_offline_count: int
    near_centerline_count: int
    on_centerline: np.ndarray
    in_strip: np.ndarray
    max_newton_step: float = 0.0

    def symmetry_defect(self, delta: float) -> float:
        """Largest distance from a reflected zero -delta - z to the nearest zero."""
        if len(self.zeros) == 0:
            return 0.0
        refl = -delta - self.zeros
        return float(max(np.min(np.abs(self.zeros - r)) for r in refl))


def interpolate_eigen_polynomial(branch: LeadingBranch, level: int, radius: float | None = None,
                                 samples: int | None = None, heldout: int = 8,
                                 cert_tol: float = 1e-9) -> EigenPolynomial:
    """Recover Lambda_0^(level) from values on a circle around the strip centre.

    The walk starts at the contour point nearest lam = 1/4 and continues the
    branch by eigenvector tracking: the carried vector is certified as an
    eigenvector at every point, and an Arnoldi solve seeded with it takes
    over if the certificate fails.
    """
    spec = branch.spec(level)
    delta = branch.params.delta
    center = -delta / 2
    radius = radius if radius is not None else delta / 2 + 1
    deg = spec.degree
    N = samples if samples is not None else deg + 1
    if N < deg + 1:
        raise ValueError(f"need at least {deg + 1} samples for degree {deg}")
    theta0 = np.angle(0.25 - center)  # 0: the point on the real axis right of centre
    thetas = theta0 + 2 * np.pi * np.arange(N) / N
    held = theta0 + 2 * np.pi * (np.arange(heldout) + 0.5) / heldout + 0.1

    vec = branch.vector
    vals, resid = [], []
    for th in list(thetas) + list(held):
        lam = center + radius * np.exp(1j * th)
        val, res = _rayleigh(spec, lam, vec)
        vals.append(val)
        resid.append(res)
    vals, resid = np.array(vals), np.array(resid)
    scale = np.max(np.abs(vals))
    bad = np.flatnonzero(resid > cert_tol * scale)
    for j in bad:
        th = (list(thetas) + list(held))[j]
        lam = center + radius * np.exp(1j * th)
        try:
            s = leading_eigenvalue(spec, lam, prev_vector=vec)
        except (AmbiguousBranchError, ConvergenceError) as exc:
            raise ContourError(f"branch lost at lam={lam:.4g}; try another radius ({exc})") from exc
        if s.overlap < 0.5:
            raise ContourError(f"branch overlap {s.overlap:.3f} at lam={lam:.4g}; try another radius")
        vals[j], resid[j] = s.value, s.residual
    main, extra = vals[:N], vals[N:]
    # samples at w_j = exp(i(theta0 + 2 pi j/N)); undo the rotation after the FFT
    c = np.fft.fft(main) / N
    c = c * np.exp(-1j * theta0 * np.arange(N))
    coeffs = c[: deg + 1]
    if N > deg + 1 and np.max(np.abs(c[deg + 1:])) > 1e-8 * np.max(np.abs(coeffs)):
        raise PolynomialityError("Fourier coefficients beyond the expected degree do not vanish")
    poly = EigenPolynomial(level, branch.L, coeffs, center, radius, 0.0, delta)
    pred = poly(center + radius * np.exp(1j * np.asarray(held)))
    err = float(np.max(np.abs(pred - extra)) / scale)
    poly.heldout_error = err
    if err > 1e-6:
        raise PolynomialityError(f"held-out relative error {err:.3g} exceeds 1e-6")
    return poly


def polynomial_zeros(poly: EigenPolynomial, center_tol: float = 1e-6, band: float = 1e-3) -> ZeroReport:
    """Roots by companion matrix in the scaled variable, then 3 Newton steps."""
    c = np.asarray(poly.coefficients, dtype=complex)
    if abs(c[-1]) < 1e-12 * np.max(np.abs(c)):
        raise DegreeDeficientError("leading coefficient is numerically zero")
    w = np.polynomial.polynomial.polyroots(c)
    dc = np.polynomial.polynomial.polyder(c)
    step_max = 0.0
    for _ in range(3):
        f = np.polynomial.polynomial.polyval(w, c)
        fp = np.polynomial.polynomial.polyval(w, dc)
        step = np.where(fp != 0, f / np.where(fp != 0, fp, 1), 0)
        w = w - step
        step_max = float(np.max(np.abs(step))) * poly.radius if len(w) else 0.0
    z = poly.center + poly.radius * w
    delta = poly.delta
    strip = (-0.5 - delta, 0.5)
    on_c = np.abs(z.real + delta / 2) <= center_tol
    near_c = np.abs(z.real + delta / 2) <= band
    in_s = (z.real > strip[0]) & (z.real < strip[1])
    order = np.lexsort((z.imag, z.real))
    z, on_c, in_s, near_c = z[order], on_c[order], in_s[order], near_c[order]
    return ZeroReport(
        zeros=z,
        strip=strip,
        centerline_count=int(on_c.sum()),
        in_strip_offline_count=int((in_s & ~on_c).sum()),
        near_centerline_count=int(near_c.sum()),
        on_centerline=on_c,
        in_strip=in_s,
        max_newton_step=step_max,
    )


# --------------------------------------------------------------------------
# finite-size quantities


def finite_kappa(value: complex, L: int, real_tol: float = 1e-8) -> float:
    """|Lambda_0|^(1/L) for a real leading eigenvalue.

    A negative real value is accepted: its sign is the lattice-momentum or
    crossing phase of the branch (e.g. the even-L ground state has
    translation eigenvalue -1), not part of the per-site weight.
    """
    value = complex(value)
    if value == 0 or abs(value.imag) > real_tol * abs(value):
        raise BranchError(f"leading eigenvalue {value} is not a nonzero real number")
    return float(abs(value.real) ** (1.0 / L))


def finite_partition_function(spec: TransferSpec, lam: complex, M: int) -> complex:
    t = build_transfer_dense(spec, lam)
    return complex(np.trace(np.linalg.matrix_power(t, M)))
