import io

import numpy as np
import pytest

from cloven.arity import Arity
from cloven.chain_complex import (
    SIGN_PREORDER,
    SIGN_RELATIVE,
    ChainComplexError,
    build_full_complex,
    sign_of,
    split_y_and_clov,
    subfamily_complex,
    survey_subfamilies,
)
from cloven.cuts_nerve import CutClass, build_nerve
from cloven.homology import matrix_rank
from cloven.planar_trees import PlanarTreeCell, enumerate_cells


def test_full_complex_examples():
    full = build_full_complex(Arity.of(1, 0))
    assert full.counts() == {0: 2, 1: 1}
    assert matrix_rank(full.delta(0)) == 1
    full = build_full_complex(Arity.of(0, 0))
    assert full.counts() == {0: 1}
    assert full.delta(0) == {}
    full = build_full_complex(Arity.of(0, 0, 0))
    assert full.counts() == {0: 3, 1: 3, 2: 1}
    assert matrix_rank(full.delta(0)) == 2 and matrix_rank(full.delta(1)) == 1


def test_sign_examples():
    a = Arity.of(0, 0, 0)
    for cell in enumerate_cells(a) + enumerate_cells(Arity.of(2, 1)):
        if cell.n_vertices == 2:
            assert sign_of(cell, 0) == 1
        for e in range(len(cell.edges)):
            assert sign_of(cell, e) in (1, -1)
    chain = PlanarTreeCell.from_key(a, "(L0<(L1)<(L2))")
    assert sorted(sign_of(chain, e) for e in range(2)) == [-1, 1]
    with pytest.raises(ValueError):
        sign_of(chain, 2)


def test_relative_sign_rule_fails_the_d_squared_gate():
    with pytest.raises(ChainComplexError, match="delta"):
        build_full_complex(Arity.of(0, 0, 0), rule=SIGN_RELATIVE)
    assert build_full_complex(Arity.of(0, 0, 0), rule=SIGN_PREORDER).d_squared_zero()


def test_split_examples():
    y, clov = split_y_and_clov(build_full_complex(Arity.of(0, 0)))
    assert y.counts() == {} and clov.counts() == {0: 1}
    y, clov = split_y_and_clov(build_full_complex(Arity.of(1, 0)))
    assert y.counts() == {0: 1} and clov.counts() == {0: 2}
    y, clov = split_y_and_clov(build_full_complex(Arity.of(0, 0, 0)))
    assert y.counts() == {0: 1} and clov.counts() == {0: 3, 1: 3}


@pytest.mark.parametrize("text", ["(3;0,0,0)", "(2;2,1)", "(4;1,0,0,0)", "(5;0,0,0,0,0)", "(3;2,1,0)"])
def test_invariants(text):
    a = Arity.parse(text)
    full = build_full_complex(a)
    y, clov = split_y_and_clov(full)
    for cx in (full, y, clov):
        assert cx.d_squared_zero() and cx.entries_are_units()
    g = full.graded
    src = np.repeat(np.arange(len(full.table)), np.diff(g.indptr))
    assert np.all(g.degree[g.indices] == g.degree[src] + 1)
    fc, yc, cc = full.counts(), y.counts(), clov.counts()
    for s in fc:
        assert fc[s] == yc.get(s - (a.k - 1), 0) + cc.get(s, 0)


def test_subfamily_examples():
    full = build_full_complex(Arity.of(1, 0))
    sub = subfamily_complex(full, [CutClass(0, 2)])
    assert [sub.basis(s) for s in sub.degrees()] == [["(L0>(L1L2))"]]
    full = build_full_complex(Arity.of(0, 0, 0))
    sub = subfamily_complex(full, [CutClass(0, 1), CutClass(1, 2)])
    assert sub.basis(0) == ["(L0<(L1)<(L2))"] and sub.counts() == {0: 1}
    # {g0,g1} of (2;1,0) isolates the input leaf 1, so no cell realizes it
    assert subfamily_complex(build_full_complex(Arity.of(1, 0)), [CutClass(0, 1)]).counts() == {}


@pytest.mark.parametrize("text", ["(4;0,0,0,0)", "(3;1,0,1)", "(2;2,2)"])
def test_survey_agrees_with_one_family_at_a_time(text):
    from cloven.cuts_nerve import family_from_mask
    from cloven.homology import cohomology

    a = Arity.parse(text)
    full = build_full_complex(a)
    survey = survey_subfamilies(full, build_nerve(a).masks())
    assert survey.all_acyclic() and survey.unlisted == 0
    for f, mask in enumerate(survey.masks.tolist()):
        sub = subfamily_complex(full, family_from_mask(mask, a.n_leaves))
        assert sum(sub.counts().values()) == survey.sizes[f]
        assert sub.d_squared_zero()
        h = cohomology(sub.graded)
        assert [s for s, b in h.betti.items() if b] == [min(sub.counts())]
        assert h.rank(min(sub.counts())) == 1 and h.torsion_free()


def test_survey_reports_defects_under_a_bad_sign_rule():
    a = Arity.of(0, 0, 0, 0, 0)
    full = build_full_complex(a, rule=SIGN_RELATIVE, check=False)
    survey = survey_subfamilies(full, build_nerve(a).masks())
    assert (survey.d_squared > 0).any()
    assert not survey.all_acyclic()


def test_matrix_market_export_and_hash():
    full = build_full_complex(Arity.of(1, 0))
    buf = io.StringIO()
    full.write_matrix_market(buf)
    lines = [ln for ln in buf.getvalue().splitlines() if not ln.startswith("%")]
    assert lines == ["0 (L0L1L2) (L0>(L1L2)) 1", "0 (L0L1L2) (L0L1<(L2)) 1"]
    assert full.matrix_hash() == build_full_complex(Arity.of(1, 0)).matrix_hash()
    big = build_full_complex(Arity.of(0, 0, 0, 0, 0))
    assert big.matrix_hash() == big.matrix_hash(chunk=97)
