import numpy as np
import pytest

from conftest import branch
from spvertex.algebra import make_model
from spvertex.errors import NormalizationError
from spvertex.verify import decay_fit, ladder_relations, verify_fusion_ladder, verify_inversion


def test_ladder_shapes():
    assert [r.name for r in ladder_relations(3)] == ["inversion", "step(1)", "top", "descend(1)", "last"]
    assert [r.name for r in ladder_relations(2)] == ["inversion", "top", "last"]


def test_dense_inversion_exact_at_zero():
    assert verify_inversion(make_model(3), 3, 0.0, mode="dense").relative_defect <= 1e-12


def test_inversion_decays():
    p = make_model(3)
    d2 = verify_inversion(p, 2, 0.2, branch=branch(3, 2)).relative_defect
    d4 = verify_inversion(p, 4, 0.2, branch=branch(3, 4)).relative_defect
    assert d4 < d2


def test_sp4_inversion():
    p = make_model(2)
    # at L=5 and 6 the Sp(4) ground state is a degenerate momentum pair
    d = [verify_inversion(p, L, 0.1, branch=branch(2, L)).relative_defect for L in (2, 3, 4)]
    assert d[1] <= 1e-1 and d[2] < d[1] < d[0]


def test_normalization_error():
    with pytest.raises(NormalizationError):
        verify_inversion(make_model(3), 2, 1.0, branch=branch(3, 2))


def test_ladder_at_four_sites():
    p = make_model(3)
    small = {r.identity_id: r.relative_defect for r in verify_fusion_ladder(p, 2, 0.2, branch=branch(3, 2))}
    rows = verify_fusion_ladder(p, 4, 0.2, branch=branch(3, 4))
    assert len(rows) == 5
    for r in rows:
        assert not r.flagged
        assert r.relative_defect <= 1e-1
        assert r.relative_defect < small[r.identity_id]


def test_sp4_ladder():
    rows = verify_fusion_ladder(make_model(2), 4, 0.15, branch=branch(2, 4))
    assert len(rows) == 3 and all(r.relative_defect <= 1e-1 for r in rows)


def test_decay_fit_exponential():
    Ls = np.arange(2, 8)
    fit = decay_fit(Ls, np.exp(-0.7 * Ls))
    assert abs(fit["slope"] + 0.7) < 1e-6 and fit["r2"] >= 0.999 and not fit["flagged"]


def test_decay_fit_constant_flagged():
    fit = decay_fit([2, 3, 4], [0.1, 0.1, 0.1])
    assert abs(fit["slope"]) < 1e-9 and fit["flagged"]


def test_decay_fit_skips_zeros():
    fit = decay_fit([2, 3, 4, 5], [1e-1, 0.0, 1e-3, 1e-4])
    assert fit["flagged"] and fit["slope"] < 0
    with pytest.raises(ValueError):
        decay_fit([2, 3], [0.1, 0.01])
