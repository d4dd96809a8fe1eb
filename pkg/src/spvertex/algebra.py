"""Fundamental Sp(2n) local operators, R-matrix and spin-chain Hamiltonian.

Operators on a pair of spaces are dense ``(da*db, da*db)`` complex arrays.
The pair index of ``|a, c>`` is ``a * db + c`` (left factor slowest) and
site labels ``1..2n`` map to indices ``0..2n-1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidRankError, SizeError
from .reps import RepLabel

DENSE_LIMIT = 2**16


@dataclass(frozen=True)
class ModelParams:
    n: int
    delta: int
    site_dim: int
    rho: int

    @property
    def eps(self) -> np.ndarray:
        """Sign sequence: +1 on the first n basis states, -1 on the rest."""
        return np.r_[np.ones(self.n), -np.ones(self.n)]


def make_model(n: int) -> ModelParams:
    if int(n) != n or n < 1:
        raise InvalidRankError(f"rank n must be a positive integer, got {n!r}")
    n = int(n)
    return ModelParams(n=n, delta=n + 1, site_dim=2 * n, rho=n + 1)


@dataclass(frozen=True)
class RFamily:
    """Matrix polynomial ``R(lam) = sum_k coeffs[k] * lam**k`` on rep_a x rep_b.

    ``singular_points`` lists ``(lam*, target)`` where R degenerates to a
    multiple of the projector onto ``target``.
    """

    rep_a: RepLabel
    rep_b: RepLabel
    coeffs: tuple
    singular_points: tuple = ()
    level: int = 1
    scalars: tuple = field(default=(), compare=False)

    @property
    def dim_a(self) -> int:
        return self.rep_a.dim

    @property
    def dim_b(self) -> int:
        return self.rep_b.dim

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, lam: complex) -> np.ndarray:
        out = np.zeros_like(self.coeffs[-1], dtype=complex)
        for c in reversed(self.coeffs):
            out = out * lam + c
        return out

    def tensor(self, lam: complex) -> np.ndarray:
        """R(lam) as a 4-index array ``[a_out, b_out, a_in, b_in]``."""
        da, db = self.dim_a, self.dim_b
        return self(lam).reshape(da, db, da, db)


def build_local_ops(params: ModelParams):
    """Identity, permutation, Temperley-Lieb and crossing matrices.

    E is ``-|u><u|`` with the antisymmetric singlet ``u = sum_a eps_a |a, 2n+1-a>``.
    """
    d = params.site_dim
    eps = params.eps
    ident = np.eye(d * d, dtype=complex)
    perm = np.zeros((d * d, d * d), dtype=complex)
    for a in range(d):
        for c in range(d):
            perm[a * d + c, c * d + a] = 1.0
    tl = np.zeros((d * d, d * d), dtype=complex)
    for a in range(d):
        for b in range(d):
            # (E)_{ac}^{bd} with c = 2n+1-a, d = 2n+1-b; sign eps_a * eps_d
            tl[a * d + (d - 1 - a), b * d + (d - 1 - b)] = eps[a] * eps[d - 1 - b]
    cross = np.zeros((d, d), dtype=complex)
    for i in range(d):
        cross[i, d - 1 - i] = eps[i]
    return ident, perm, tl, cross


def r_fundamental_family(params: ModelParams) -> RFamily:
    ident, perm, tl, _ = build_local_ops(params)
    delta = params.delta
    fund = RepLabel.fundamental(params.n, 1)
    points = [(-float(delta), RepLabel.trivial())]
    scalars = [2.0 * delta * (delta - 1)]
    if params.n >= 2:
        # for Sp(2) the antisymmetric-traceless part is empty and R(-1) = 0
        points.insert(0, (-1.0, RepLabel.fundamental(params.n, 2)))
        scalars.insert(0, -2.0 * (delta - 1))
    return RFamily(
        rep_a=fund,
        rep_b=fund,
        coeffs=(delta * perm, delta * ident + perm + tl, ident),
        singular_points=tuple(points),
        level=1,
        scalars=tuple(scalars),
    )


def r_fundamental(params: ModelParams, lam: complex) -> np.ndarray:
    ident, perm, tl, _ = build_local_ops(params)
    delta = params.delta
    return lam * (lam + delta) * ident + (lam + delta) * perm + lam * tl


def embed_pair(op: np.ndarray, dims: Sequence[int], i: int, j: int) -> np.ndarray:
    """Embed an operator on factors (i, j) of a three-factor space.

    ``op`` acts on ``dims[i] x dims[j]`` with factor i first.
    """
    if len(dims) != 3:
        raise ValueError("embed_pair handles three tensor factors")
    k = 3 - i - j
    op4 = op.reshape(dims[i], dims[j], dims[i], dims[j])
    out_idx = ["", "", ""]
    in_idx = ["", "", ""]
    out_idx[i], out_idx[j], out_idx[k] = "a", "b", "c"
    in_idx[i], in_idx[j], in_idx[k] = "d", "e", "f"
    spec = "abde,cf->" + "".join(out_idx) + "".join(in_idx)
    total = int(np.prod(dims))
    return np.einsum(spec, op4, np.eye(dims[k])).reshape(total, total)


def swap_factors(op: np.ndarray, da: int, db: int) -> np.ndarray:
    """Reorder an operator on ``da x db`` into one on ``db x da``."""
    return op.reshape(da, db, da, db).transpose(1, 0, 3, 2).reshape(da * db, da * db)


def partial_transpose_second(op: np.ndarray, da: int, db: int) -> np.ndarray:
    return op.reshape(da, db, da, db).transpose(0, 3, 2, 1).reshape(da * db, da * db)


def yang_baxter_defect(
    r_ab: Callable[[complex], np.ndarray],
    r_ac: Callable[[complex], np.ndarray],
    r_bc: Callable[[complex], np.ndarray],
    dims: Sequence[int],
    lam: complex,
    mu: complex,
) -> float:
    """Max-abs defect of R_ab(lam-mu) R_ac(lam) R_bc(mu) = R_bc(mu) R_ac(lam) R_ab(lam-mu)."""
    x12 = embed_pair(r_ab(lam - mu), dims, 0, 1)
    x13 = embed_pair(r_ac(lam), dims, 0, 2)
    x23 = embed_pair(r_bc(mu), dims, 1, 2)
    return float(np.max(np.abs(x12 @ x13 @ x23 - x23 @ x13 @ x12)))


def check_r_identities(params: ModelParams, lam: complex, mu: complex) -> dict:
    """Max-abs residuals of regularity, unitarity, crossing and Yang-Baxter."""
    d = params.site_dim
    delta = params.delta
    ident, perm, _, cross = build_local_ops(params)
    r = lambda x: r_fundamental(params, x)  # noqa: E731

    regularity = np.max(np.abs(r(0.0) - delta * perm))
    r21 = perm @ r(-lam) @ perm
    unitarity = np.max(np.abs(r(lam) @ r21 - (1 - lam**2) * (delta**2 - lam**2) * ident))
    v1 = np.kron(cross, np.eye(d))
    crossed = v1 @ partial_transpose_second(r(-lam - params.rho), d, d) @ np.linalg.inv(v1)
    crossing = np.max(np.abs(r(lam) - crossed))
    ybe = yang_baxter_defect(r, r, r, (d, d, d), lam, mu)
    return {
        "regularity": float(regularity),
        "unitarity": float(unitarity),
        "crossing": float(crossing),
        "yang_baxter": float(ybe),
    }


def apply_two_site(op4: np.ndarray, psi: np.ndarray, i: int, j: int) -> np.ndarray:
    """Apply a ``[o_i, o_j, i_i, i_j]`` operator to axes (i, j) of ``psi``."""
    out = np.tensordot(op4, psi, axes=([2, 3], [i, j]))
    return np.moveaxis(out, [0, 1], [i, j])


def build_hamiltonian(params: ModelParams, L: int) -> np.ndarray:
    """Dense periodic chain sum of ``I/delta + P - E/delta`` over all L bonds."""
    q = params.site_dim
    if L < 2:
        raise SizeError("the periodic chain needs L >= 2")
    if q**L > DENSE_LIMIT:
        raise SizeError(f"dense Hamiltonian of dimension {q**L} exceeds {DENSE_LIMIT}")
    ident, perm, tl, _ = build_local_ops(params)
    h = (ident / params.delta + perm - tl / params.delta).reshape(q, q, q, q)
    dim = q**L
    basis = np.eye(dim, dtype=complex).reshape((q,) * L + (dim,))
    out = np.zeros_like(basis)
    for i in range(L):
        out += apply_two_site(h, basis, i, (i + 1) % L)
    return out.reshape(dim, dim)
