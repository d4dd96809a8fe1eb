"""Finite-L checks of the transfer-matrix inversion and fusion identities."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .algebra import ModelParams
from .errors import NormalizationError
from .transfer import LeadingBranch, TransferSpec, build_transfer_dense

CERT_TOL = 1e-8


@dataclass
class IdentityResidual:
    identity_id: str
    lam: complex
    L: int
    relative_defect: float
    n: int = 0
    flagged: bool = False
    note: str = ""


@dataclass(frozen=True)
class LadderRelation:
    """Lambda1(lam) Lambda_m(lam + s) = factor(lam)^L Lambda_m2(lam + s2) up to O(e^-L)."""

    name: str
    left: tuple
    right: Optional[tuple]
    factor: Callable


def ladder_relations(n: int) -> list:
    d = n + 1
    rels = [LadderRelation("inversion", (1, -d), None, lambda x: (x * x - 1) * (x * x - d * d))]
    for m in range(1, n - 1):
        rels.append(LadderRelation(f"step({m})", (m, -(m + 1) / 2), (m + 1, -m / 2),
                                   lambda x: (x - 1) * (x + d)))
    rels.append(LadderRelation("top", (n - 1, -n / 2), (n, -(n - 1) / 2),
                               lambda x: (x * x - 1) * (x + d)))
    for m in range(1, n - 1):
        rels.append(LadderRelation(f"descend({m})", (m + 1, -(2 * d - m) / 2), (m, -(2 * d - m - 1) / 2),
                                   lambda x: (x - 1) * (x + d)))
    rels.append(LadderRelation("last", (n, -(d + 2) / 2), (n - 1, -(d + 1) / 2), lambda x: x + d))
    return rels


def _scalar(value: complex, what: str) -> complex:
    if abs(value) < 1e-14:
        raise NormalizationError(f"{what} vanishes at this spectral parameter")
    return value


def verify_inversion(params: ModelParams, L: int, lam: complex, mode: str = "eigen",
                     branch: LeadingBranch | None = None) -> IdentityResidual:
    """Defect of T(lam) T(lam - Delta) = [(lam^2-1)(lam^2-Delta^2)]^L.

    ``mode="dense"`` measures the operator identity; ``mode="eigen"`` the
    leading-eigenvalue version.
    """
    d = params.delta
    f = _scalar(((lam * lam - 1) * (lam * lam - d * d)) ** L, "inversion scalar")
    if mode == "dense":
        spec = TransferSpec(params, 1, L, "dense")
        prod = build_transfer_dense(spec, lam) @ build_transfer_dense(spec, lam - d)
        defect = np.max(np.abs(prod - f * np.eye(spec.dim))) / abs(f)
        return IdentityResidual("inversion", complex(lam), L, float(defect), params.n)
    if mode != "eigen":
        raise ValueError("mode must be 'dense' or 'eigen'")
    branch = branch or LeadingBranch(params.n, L)
    a, b = branch.sample(1, lam), branch.sample(1, lam - d)
    defect = abs(a.value * b.value / f - 1)
    flagged, note = _certify(a, b)
    return IdentityResidual("inversion", complex(lam), L, float(defect), params.n, flagged, note)


def _certify(*samples) -> tuple:
    worst = max(s.residual / max(abs(s.value), 1e-300) for s in samples)
    if worst > CERT_TOL:
        return True, f"branch vector is not an eigenvector here (relative residual {worst:.2e})"
    return False, ""


def verify_fusion_ladder(params: ModelParams, L: int, lam: complex,
                         branch: LeadingBranch | None = None) -> list:
    """Relative defects of every relation of the ladder on the leading branch.

    Both sides are Rayleigh quotients on the one common eigenvector of the
    commuting family, so the right-hand eigenvalues belong to the same state
    by construction; each evaluation is certified by its eigen-residual and a
    failed certificate flags the row.
    """
    branch = branch or LeadingBranch(params.n, L)
    one = branch.sample(1, lam)
    out = []
    for rel in ladder_relations(params.n):
        m, s = rel.left
        left = branch.sample(m, lam + s)
        lhs = one.value * left.value
        rhs = _scalar(rel.factor(lam) ** L, f"{rel.name} scalar")
        used = [one, left]
        if rel.right is not None:
            right = branch.sample(rel.right[0], lam + rel.right[1])
            rhs = rhs * right.value
            used.append(right)
        defect = abs(lhs / _scalar(rhs, rel.name) - 1)
        flagged, note = _certify(*used)
        out.append(IdentityResidual(rel.name, complex(lam), L, float(defect), params.n, flagged, note))
    return out


def decay_fit(Ls: Sequence[int], defects: Sequence[float]) -> dict:
    """Least-squares line through log(defect) against L."""
    Ls = np.asarray(Ls, dtype=float)
    defects = np.asarray(defects, dtype=float)
    keep = defects > 0
    flagged = not keep.all()
    x, y = Ls[keep], np.log(defects[keep])
    if len(np.unique(x)) < 3:
        raise ValueError("decay_fit needs at least 3 distinct L with positive defects")
    slope, intercept = np.polyfit(x, y, 1)
    fit = slope * x + intercept
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum((y - fit) ** 2) / ss_tot if ss_tot > 0 else 0.0
    decaying = slope < -1e-9 and ss_tot > 0
    return {"slope": float(slope), "intercept": float(intercept), "r2": float(r2),
            "flagged": flagged or not decaying, "decaying": bool(decaying)}
