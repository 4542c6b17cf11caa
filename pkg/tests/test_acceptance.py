"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL line.

The grid is every arity with k >= 2 and at most 8 leaves.  Reports are
computed once per cyclic-rotation class; criterion 10 checks that rotations
really do give identical results.
"""

import itertools

import numpy as np
import pytest

import cloven.koszul_report as kr
from cloven.arity import Arity
from cloven.chain_complex import build_cell_table, build_full_complex, split_y_and_clov
from cloven.cuts_nerve import CutClass, build_nerve, jointly_realizable, nerve_homology
from cloven.homology import GradedComplex, both_homologies, cohomology, smith_normal_form
from cloven.oracles import brute_force_cells, dense_smith_form
from cloven.planar_trees import enumerate_cells

GRID_LEAVES = 8
BUDGET_SECONDS = 15 * 60


@pytest.fixture(scope="module")
def grid():
    arities = kr.batch_arities(GRID_LEAVES)
    reps = kr.rotation_classes(arities)
    reports = {rep: kr.verify_arity(rep) for rep in reps}
    return arities, reports


def _report_of(reports, arity):
    return reports[arity.rotation_representative()]


def _failing(reports, check):
    return [str(a) for a, r in reports.items() if r.checks[check] is False]


def test_criterion_01_d_squared_zero(grid, record_criterion):
    arities, reports = grid
    bad = _failing(reports, "d_squared_zero")
    seconds = sum(r.timings.get(s, 0.0) for r in reports.values() for s in kr.D_SQUARED_STAGES)
    fams = sum(r.subfamilies["families"] for r in reports.values())
    ok = not bad and seconds < BUDGET_SECONDS
    detail = f"{len(reports)} rotation classes ({len(arities)} arities), {fams} subfamily complexes, {seconds:.0f}s"
    record_criterion(1, "delta^2 = 0 on Full, YPart, ClovQuotient and every subfamily, N <= 8", ok, detail)
    assert not bad, bad
    assert seconds < BUDGET_SECONDS


def test_criterion_02_full_contractible(grid, record_criterion):
    _, reports = grid
    bad = _failing(reports, "full_contractible")
    for r in reports.values():
        h = r.homology["Full"]
        assert {s: b for s, b in h["betti"].items() if b} == {"0": 1} and not h["torsion"]
    record_criterion(2, "Full cohomology is Z at s=0, zero elsewhere, torsion-free", not bad, f"{len(reports)} classes")
    assert not bad, bad


def test_criterion_03_bouquet(grid, record_criterion):
    _, reports = grid
    bad = _failing(reports, "clov_bouquet_shape") + _failing(reports, "clov_torsion_free")
    for a, r in reports.items():
        h = r.homology["ClovQuotientHomology"]
        nonzero = {int(s): b for s, b in h["betti"].items() if b}
        allowed = {0} if a.k == 2 else {0, a.k - 2}
        assert set(nonzero) <= allowed and not h["torsion"]
        if a.k >= 3:
            assert nonzero[0] == 1
    record_criterion(3, "Clov homology: Z in degree 0, free part only in degree k-2, no torsion", not bad)
    assert not bad, bad


def test_criterion_04_k2_rank_formula(grid, record_criterion):
    arities, reports = grid
    bad = []
    checked = 0
    for a in arities:
        if a.k != 2:
            continue
        checked += 1
        r = _report_of(reports, a)
        want = (a.inputs[0] + 1) * (a.inputs[1] + 1)
        if r.homology["ClovQuotientHomology"]["betti"].get("0") != want or r.checks["k2_rank_formula"] is not True:
            bad.append(str(a))
    ex = reports[Arity.of(1, 1)].clov_top_rank
    ok = not bad and ex == 4
    record_criterion(4, "rank H0(Clov) = (i1+1)(i2+1) for k=2, N <= 8", ok, f"{checked} arities, (2;1,1) -> {ex}")
    assert ok, bad


def test_criterion_05_y_concentration(grid, record_criterion):
    arities, reports = grid
    bad = _failing(reports, "y_concentrated_degree_zero")
    for a in arities:
        if a.k == 2:
            y0 = _report_of(reports, a).homology["YPart"]["betti"].get("0", 0)
            if y0 != (a.inputs[0] + 1) * (a.inputs[1] + 1) - 1:
                bad.append(str(a))
    record_criterion(5, "H^s(YPart) = 0 for s > 0; k=2 rank H0 = product - 1", not bad)
    assert not bad, bad


def test_criterion_06_nerve(grid, record_criterion):
    _, reports = grid
    bad = (
        _failing(reports, "nerve_matches_clov")
        + _failing(reports, "nerve_dimension_bound")
        + _failing(reports, "subfamilies_acyclic")
    )
    fams = sum(r.subfamilies["nonempty"] for r in reports.values())
    record_criterion(6, "nerve Betti = Clov Betti, nerve dim <= k-2, every subfamily acyclic", not bad, f"{fams} subfamilies")
    assert not bad, bad


def test_criterion_07_les_identities(grid, record_criterion):
    _, reports = grid
    bad = _failing(reports, "les_consistent")
    for a, r in reports.items():
        clov = r.homology["ClovQuotient"]["betti"]
        y0 = r.homology["YPart"]["betti"].get("0", 0)
        if a.k >= 3:
            assert clov.get(str(a.k - 2), 0) == y0
        else:
            assert clov.get("0", 0) == 1 + y0
    ranks = {str(a): r.clov_top_rank for a, r in reports.items() if a.n_leaves == a.k}
    record_criterion(7, "LES rank identities between Clov and YPart", not bad, f"top ranks at (k;0^k): {ranks}")
    assert not bad, bad


def test_criterion_08_micro_oracles(record_criterion):
    problems = []
    for arity, count in [(Arity.of(0, 0), 1), (Arity.of(1, 0), 3), (Arity.of(0, 0, 0), 7)]:
        brute = brute_force_cells(arity)
        fast = {c.key for c in enumerate_cells(arity)}
        if not (len(brute) == count and brute == fast):
            problems.append(f"{arity}: brute {len(brute)}, fast {len(fast)}")
    full = build_full_complex(Arity.of(1, 0))
    y, clov = split_y_and_clov(full)
    if full.counts() != {0: 2, 1: 1}:
        problems.append("(2;1,0) census")
    if [cohomology(c.graded).betti_list() for c in (full, y, clov)] != [[1, 0], [1], [2]]:
        problems.append("(2;1,0) homology tables")
    _, clov = split_y_and_clov(build_full_complex(Arity.of(0, 0, 0)))
    if both_homologies(clov.graded)[1].betti_list() != [1, 1]:
        problems.append("(3;0,0,0) Clov Betti")
    nerve = build_nerve(Arity.of(0, 0, 0))
    cycle = {(0, 1), (0, 2), (1, 2)}
    if nerve.counts() != [3, 3] or set(nerve.simplices[1]) != cycle or nerve_homology(nerve).betti_list() != [1, 1]:
        problems.append("(3;0,0,0) nerve is not a 3-cycle")
    record_criterion(8, "micro-oracles (2;0,0), (2;1,0), (3;0,0,0) against brute force", not problems, "; ".join(problems))
    assert not problems


def test_criterion_09_oracle_equivalence(record_criterion):
    arities = kr.batch_arities(7)
    mismatches = []
    subsets = 0
    for a in arities:
        n = a.n_leaves
        table = build_cell_table(a)
        realized = np.unique(table.cmask)
        classes = [CutClass(x, y) for x, y in itertools.combinations(range(n), 2)]
        for r in range(1, a.k):
            for fam in itertools.combinations(classes, r):
                mask = np.uint64(sum(c.bit for c in fam))
                by_cells = bool(np.any((realized & mask) == mask))
                subsets += 1
                if jointly_realizable(fam, a) != by_cells:
                    mismatches.append(f"{a} {{{','.join(map(str, fam))}}}")
    detail = f"{len(arities)} arities, {subsets} class subsets"
    record_criterion(9, "jointly_realizable == existence of a realizing cell, N <= 7", not mismatches, detail)
    assert not mismatches, mismatches[:5]


def _flip(g: GradedComplex, cells) -> GradedComplex:
    sign = np.ones(g.degree.shape[0], dtype=np.int64)
    sign[cells] = -1
    src = np.repeat(np.arange(g.degree.shape[0]), np.diff(g.indptr))
    data = (g.data.astype(np.int64) * sign[src] * sign[g.indices]).astype(g.data.dtype)
    return GradedComplex(g.degree, g.indptr, g.indices, data, g.tag, g.arity, g.members)


def test_criterion_10_robustness(record_criterion):
    rng = np.random.default_rng(1000)
    snf_bad = 0
    for _ in range(1000):
        rows, cols = rng.integers(1, 6, size=2)
        m = rng.integers(-5, 6, size=(rows, cols))
        m[rng.random(size=m.shape) < 0.3] = 0
        if smith_normal_form(m) != dense_smith_form(m.tolist()):
            snf_bad += 1

    flip_bad = []
    for text in ["(3;0,0,0)", "(2;2,1)", "(4;0,0,0,0)", "(3;1,0,1)", "(5;0,0,0,0,0)", "(4;1,0,1,0)"]:
        full = build_full_complex(Arity.parse(text))
        pieces = (full, *split_y_and_clov(full))
        base = [both_homologies(p.graded) for p in pieces]
        for _ in range(3):
            cells = rng.choice(len(full.table), size=int(rng.integers(1, len(full.table) + 1)), replace=False)
            for p, (co, ch) in zip(pieces, base):
                co2, ch2 = both_homologies(_flip(p.graded, cells))
                if (co2.betti, co2.torsion, ch2.torsion) != (co.betti, co.torsion, ch.torsion):
                    flip_bad.append(f"{text} {p.tag}")

    rot_bad = []
    rot_checked = 0
    for rep, members in kr.rotation_classes(kr.batch_arities(6)).items():
        for other in members:
            if other != rep:
                rot_checked += 1
                problem = kr.rotation_check(rep, other)
                if problem:
                    rot_bad.append(problem)

    ok = snf_bad == 0 and not flip_bad and not rot_bad
    detail = f"SNF mismatches {snf_bad}/1000, sign-flip failures {len(flip_bad)}, rotation failures {len(rot_bad)}/{rot_checked}"
    record_criterion(10, "SNF vs dense oracle; invariance under sign flips and rotations", ok, detail)
    assert ok, (flip_bad, rot_bad)
