"""Projectors and the recursive fusion hierarchy R^(m,1)(lam), m = 1..n.

Level m+1 is read off level m at its singular point -(m+1)/2, where R^(m,1)
collapses onto the {m+1} summand of {m} x {1}.  The fused family acts on
``(fused aux) x (site)`` with the auxiliary factor first.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np
import scipy.linalg

from .algebra import (
    ModelParams,
    RFamily,
    build_local_ops,
    make_model,
    r_fundamental_family,
    yang_baxter_defect,
)
from .errors import FusionConsistencyError, NotAProjectorError
from .reps import RepLabel, rep_dimension

CLUSTER_TOL = 1e-7


@dataclass(frozen=True)
class Projector:
    space_dims: tuple
    matrix: np.ndarray
    rank: int
    target: RepLabel

    def defects(self) -> dict:
        p = self.matrix
        return {
            "idempotent": float(np.max(np.abs(p @ p - p))),
            "hermitian": float(np.max(np.abs(p - p.conj().T))),
            "trace": float(abs(np.trace(p).real - self.rank)),
        }


@dataclass(frozen=True)
class Isometry:
    matrix: np.ndarray
    target: RepLabel

    @property
    def rank(self) -> int:
        return self.matrix.shape[1]


def fundamental_projectors(params: ModelParams):
    """Singlet, antisymmetric-traceless and symmetric projectors on 2n x 2n."""
    ident, perm, tl, _ = build_local_ops(params)
    n, d = params.n, params.site_dim
    dims = (d, d)
    p0 = -tl / (2 * n)
    pa = (ident - perm) / 2 + tl / (2 * n)
    ps = (ident + perm) / 2
    anti = RepLabel.fundamental(n, 2) if n >= 2 else RepLabel("fundamental", 2, 0)
    return (
        Projector(dims, p0, 1, RepLabel.trivial()),
        Projector(dims, pa, (2 * n + 1) * (n - 1), anti),
        Projector(dims, ps, (2 * n + 1) * n, RepLabel.mixed(n, 1)),
    )


def projector_from_singular(matrix: np.ndarray, dims: tuple, target: RepLabel,
                            tol: float = CLUSTER_TOL):
    """Normalise R(lam*) to an idempotent; return (Projector, scalar).

    The nonzero eigenvalues must form one cluster of size ``target.dim``.
    """
    herm = (matrix + matrix.conj().T) / 2
    if np.max(np.abs(matrix - herm)) > tol * max(1.0, np.max(np.abs(matrix))):
        raise FusionConsistencyError("singular-point matrix is not Hermitian")
    w = np.linalg.eigvalsh(herm)
    scale = np.max(np.abs(w))
    s = w[np.argmax(np.abs(w))]
    nonzero = np.abs(w) > tol * scale
    if not np.all(np.abs(w[nonzero] - s) <= tol * scale):
        raise FusionConsistencyError("nonzero eigenvalues at the singular point do not cluster")
    rank = int(nonzero.sum())
    if rank != target.dim:
        raise FusionConsistencyError(f"singular-point rank {rank} differs from dim {target} = {target.dim}")
    p = herm / s
    return Projector(dims, p, rank, target), float(s)


def isometry_from_projector(proj: Projector, tol: float = 1e-9) -> Isometry:
    """Canonical orthonormal basis of the image of ``proj``.

    The basis comes from a column-pivoted QR of the projector itself, so it
    depends only on the matrix.  Each column is rotated so that its largest
    component is real positive and columns are ordered by that component's
    position.
    """
    p = proj.matrix
    w = np.linalg.eigvalsh((p + p.conj().T) / 2)
    if not np.all((np.abs(w) < tol) | (np.abs(w - 1) < tol)):
        bad = w[(np.abs(w) >= tol) & (np.abs(w - 1) >= tol)]
        raise NotAProjectorError(f"eigenvalues not clustered at 0 and 1, e.g. {bad[:3]}")
    rank = int(np.sum(np.abs(w - 1) < tol))
    q, _, _ = scipy.linalg.qr(p, pivoting=True)
    u = q[:, :rank]
    keys = []
    for k in range(rank):
        col = u[:, k]
        mags = np.round(np.abs(col), 12)
        j = int(np.argmax(mags))
        u[:, k] = col * (abs(col[j]) / col[j])
        order = np.argsort(-mags, kind="stable")
        keys.append((j, tuple(order[:3])))
    perm = sorted(range(rank), key=lambda k: keys[k])
    return Isometry(np.ascontiguousarray(u[:, perm]), proj.target)


def _embed_aux_site(x: np.ndarray, da: int, db: int, dq: int) -> np.ndarray:
    """X on (a, q) acting inside (a, b, q)."""
    x4 = x.reshape(da, dq, da, dq)
    return np.einsum("aqcr,bd->abqcdr", x4, np.eye(db)).reshape(da * db * dq, da * db * dq)


def _embed_mid_site(x: np.ndarray, da: int, db: int, dq: int) -> np.ndarray:
    """X on (b, q) acting inside (a, b, q)."""
    x4 = x.reshape(db, dq, db, dq)
    return np.einsum("bqdr,ac->abqcdr", x4, np.eye(da)).reshape(da * db * dq, da * db * dq)


def _family_scalars(n: int, level: int):
    delta = n + 1
    m = level
    if m == n:
        return ((-(delta + 2) / 2, RepLabel.fundamental(n, n - 1) if n > 1 else RepLabel.trivial(), -(delta + 2.0)),)
    lower = RepLabel.fundamental(n, m - 1)
    return (
        (-(m + 1) / 2, RepLabel.fundamental(n, m + 1), -(m + 1) * (delta - m)),
        (-(2 * delta + 1 - m) / 2, lower, (delta - m) * (2 * delta + 1 - m)),
    )


def _interpolate(fn, points):
    vals = [fn(p) for p in points]
    vand = np.vander(np.asarray(points, dtype=complex), len(points), increasing=True)
    inv = np.linalg.inv(vand)
    return tuple(sum(inv[k, j] * vals[j] for j in range(len(points))) for k in range(len(points)))


def fuse_next(params: ModelParams, fam_m: RFamily, m: int, isometry: Isometry | None = None) -> RFamily:
    """Level m+1 family from level m.

    ``R^(m+1)(lam) = U^† R_b2(lam + m/2) R_a2^(m)(lam - 1/2) U / norm`` with
    ``norm = (x-1)(x+Delta)`` or ``(x^2-1)(x+Delta)`` at the last level,
    ``x = lam + m/2``.  ``isometry`` overrides the canonical basis.
    """
    n, q, delta = params.n, params.site_dim, params.delta
    if not 1 <= m <= n - 1:
        raise FusionConsistencyError(f"cannot fuse beyond level n={n} (asked m={m})")
    target = RepLabel.fundamental(n, m + 1)
    lam_star = -(m + 1) / 2
    if not any(abs(p - lam_star) < 1e-12 for p, _ in fam_m.singular_points):
        raise FusionConsistencyError(f"level {m} family has no singular point at {lam_star}")
    dm = fam_m.dim_a
    proj, _ = projector_from_singular(fam_m(lam_star), (dm, q), target)
    iso = isometry if isometry is not None else isometry_from_projector(proj)
    big = np.kron(iso.matrix, np.eye(q))
    fund = r_fundamental_family(params)
    last = m + 1 == n

    def direct(lam):
        x = lam + m / 2
        norm = (x * x - 1) * (x + delta) if last else (x - 1) * (x + delta)
        prod = _embed_mid_site(fund(x), dm, q, q) @ _embed_aux_site(fam_m(lam - 0.5), dm, q, q)
        return big.conj().T @ prod @ big / norm

    # sample points stay clear of the normalisation zeros
    points = [0.3, 1.7] if last else [0.3, 1.7, 2.9]
    coeffs = _interpolate(direct, points)
    scalars = _family_scalars(n, m + 1)
    return RFamily(
        rep_a=target,
        rep_b=RepLabel.fundamental(n, 1),
        coeffs=coeffs,
        singular_points=tuple((p, t) for p, t, _ in scalars),
        level=m + 1,
        scalars=tuple(s for _, _, s in scalars),
    )


@lru_cache(maxsize=8)
def fusion_hierarchy(n: int) -> tuple:
    """All families R^(1,1) .. R^(n,1) for Sp(2n), built once per n."""
    params = make_model(n)
    fams = [r_fundamental_family(params)]
    for m in range(1, n):
        fams.append(fuse_next(params, fams[-1], m))
    return tuple(fams)


def unitarity_factor(n: int, level: int, lam: complex) -> complex:
    delta = n + 1
    if level == n and n > 1:
        return ((delta + 2) / 2) ** 2 - lam**2
    m = level
    return (((m + 1) / 2) ** 2 - lam**2) * (((2 * delta + 1 - m) / 2) ** 2 - lam**2)


def check_fused_identities(params: ModelParams, fam: RFamily, lam: complex, mu: complex,
                           yang_baxter: bool = True) -> dict:
    """Max-abs residuals of fused unitarity and the mixed Yang-Baxter equation.

    The Yang-Baxter check multiplies dense operators on d*q*q states, which
    dominates the cost for large levels; ``yang_baxter=False`` skips it.
    """
    q = params.site_dim
    d = fam.dim_a
    uni = fam(lam) @ fam(-lam) - unitarity_factor(params.n, fam.level, lam) * np.eye(d * q)
    out = {"unitarity": float(np.max(np.abs(uni)))}
    if yang_baxter:
        fund = r_fundamental_family(params)
        out["yang_baxter"] = float(yang_baxter_defect(fam, fam, fund, (d, q, q), lam, mu))
    return out


def singular_spectrum(fam: RFamily, lam: complex, decimals: int = 6) -> dict:
    """Eigenvalue -> multiplicity map of ``fam(lam)`` after rounding."""
    w = np.linalg.eigvals(fam(lam))
    vals, counts = np.unique(np.round(w.real, decimals) + 0.0, return_counts=True)
    return {float(v): int(c) for v, c in zip(vals, counts)}


# --------------------------------------------------------------------------
# Sp(6) explicit tables

_SURD = re.compile(r"^([+-])(\d+)/(\d+)\*sqrt\((\d+)/(\d+)\)$")


def parse_surd(text: str) -> float:
    m = _SURD.match(text.strip())
    if not m:
        raise ValueError(f"bad surd coefficient {text!r}")
    sign = -1.0 if m.group(1) == "-" else 1.0
    p, q, r, s = (int(m.group(i)) for i in range(2, 6))
    return sign * p / q * np.sqrt(r / s)


def read_appendix_tables(text: str | None = None) -> dict:
    """``{table: [vector, ...]}`` with vectors on the 14 x 6 space (index a*6 + b)."""
    if text is None:
        text = resources.files("spvertex").joinpath("data/appendix_a_sp6.txt").read_text()
    rows: dict = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        vid, a, b, coeff = line.split()
        table, idx = vid.rsplit("_", 1)
        rows.setdefault(table, {}).setdefault(int(idx), []).append((int(a), int(b), parse_surd(coeff)))
    out = {}
    for table, vecs in rows.items():
        mats = []
        for idx in sorted(vecs):
            v = np.zeros(14 * 6)
            for a, b, c in vecs[idx]:
                v[(a - 1) * 6 + (b - 1)] += c
            mats.append(v)
        out[table] = np.array(mats).T
    return out


def load_appendix_basis(n: int = 3) -> dict:
    """Validation report for the explicit Sp(6) fused-space vectors.

    Failing checks are data in the report, not exceptions.
    """
    if n != 3:
        raise ValueError("the explicit tables exist only for Sp(6)")
    tables = read_appendix_tables()
    report = {"tables": {}, "flags": []}
    projs = {}
    for name, vecs in tables.items():
        gram = vecs.T @ vecs
        proj = vecs @ vecs.T
        norms = np.sqrt(np.diag(gram))
        bad_rows = [i + 1 for i, nv in enumerate(norms) if abs(nv - 1) > 1e-12]
        offdiag = gram - np.diag(np.diag(gram))
        worst = np.unravel_index(np.argmax(np.abs(offdiag)), offdiag.shape)
        report["tables"][name] = {
            "count": vecs.shape[1],
            "gram_defect": float(np.max(np.abs(gram - np.eye(vecs.shape[1])))),
            "idempotency_defect": float(np.max(np.abs(proj @ proj - proj))),
            "trace": float(np.trace(proj)),
            "bad_norm_rows": bad_rows,
            "worst_overlap": (int(worst[0]) + 1, int(worst[1]) + 1, float(offdiag[worst])),
            "gram": gram,
        }
        for i in bad_rows:
            report["flags"].append(f"{name}_{i}: norm {norms[i - 1]:.15f}")
        if abs(offdiag[worst]) > 1e-12:
            report["flags"].append(
                f"{name}_{worst[0] + 1} and {name}_{worst[1] + 1} overlap {offdiag[worst]:+.6f}")
        projs[name] = proj
    cross = projs["phi6"] @ projs["phi14p"]
    report["orthogonality_6_14p"] = float(np.max(np.abs(cross)))
    p64 = np.eye(84) - projs["phi6"] - projs["phi14p"]
    report["complement_64"] = {
        "trace": float(np.trace(p64)),
        "idempotency_defect": float(np.max(np.abs(p64 @ p64 - p64))),
    }
    report["notes"] = [
        "phi6_4 is printed with an unbalanced closing parenthesis; the terms are read as written.",
        "phi14_7 and phi14_8 share |7,4> and |9,3> as printed, so they are not orthogonal.",
    ]
    return report
