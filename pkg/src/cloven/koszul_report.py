"""Per-arity verification certificates and batch sweeps.

A report is a plain dict (the structured record) built by
:func:`verify_arity`; :func:`render_text` only formats an existing record.
Records are deterministic: wall-clock timings are left out unless asked for.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from itertools import product
from typing import Any, Iterable, Iterator

import numpy as np

from .arity import Arity, SizeGuardError, check_size
from .chain_complex import (
    build_cell_table,
    build_full_complex,
    split_y_and_clov,
    survey_subfamilies,
)
from .cuts_nerve import build_nerve, family_from_mask, nerve_cochain_complex
from .homology import HomologySummary, both_homologies, chain_homology, cohomology, les_consistency
from . import kernels

__all__ = [
    "SCHEMA",
    "SCHEMA_VERSION",
    "CHECKS",
    "ReportError",
    "VerificationReport",
    "verify_arity",
    "batch",
    "single",
    "batch_arities",
    "rotation_classes",
    "rotation_check",
    "to_json",
    "render_text",
]

SCHEMA = "cloven.verification"
SCHEMA_VERSION = 1

CHECKS = (
    "d_squared_zero",
    "full_contractible",
    "y_concentrated_degree_zero",
    "clov_bouquet_shape",
    "clov_torsion_free",
    "nerve_matches_clov",
    "nerve_realizability",
    "les_consistent",
    "k2_rank_formula",
    "subfamilies_acyclic",
    "nerve_dimension_bound",
)


class ReportError(RuntimeError):
    """A resource or internal failure, tagged with the arity and the stage reached."""

    def __init__(self, arity: Arity, stage: str, cause: BaseException):
        super().__init__(f"{arity}: failed during {stage}: {type(cause).__name__}: {cause}")
        self.arity = arity
        self.stage = stage
        self.cause = cause


@dataclass
class VerificationReport:
    arity: Arity
    checks: dict[str, bool | None]
    witnesses: dict[str, str]
    census: dict[str, dict[str, int]]
    homology: dict[str, dict]
    clov_top_rank: int
    nerve: dict[str, Any]
    subfamilies: dict[str, int]
    matrix_hashes: dict[str, str]
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def all_pass(self) -> bool:
        return all(v is not False for v in self.checks.values())

    def failures(self) -> list[str]:
        return [name for name, v in self.checks.items() if v is False]

    def to_record(self, timings: bool = False) -> dict:
        a = self.arity
        rec = {
            "arity": str(a),
            "k": a.k,
            "inputs": list(a.inputs),
            "n_leaves": a.n_leaves,
            "all_pass": self.all_pass,
            "checks": dict(self.checks),
            "witnesses": dict(self.witnesses),
            "census": self.census,
            "homology": self.homology,
            "clov_top_rank": self.clov_top_rank,
            "nerve": self.nerve,
            "subfamilies": self.subfamilies,
            "matrix_hashes": self.matrix_hashes,
        }
        if timings:
            rec["timings"] = {k: round(v, 3) for k, v in self.timings.items()}
        return rec


def _keyed(counts: dict[int, int]) -> dict[str, int]:
    return {str(s): int(n) for s, n in sorted(counts.items())}


def _only_degrees(h: HomologySummary, allowed: Iterable[int]) -> list[int]:
    allowed = set(allowed)
    return [s for s, b in sorted(h.betti.items()) if b and s not in allowed]


class _Stages:
    def __init__(self, arity: Arity):
        self.arity = arity
        self.timings: dict[str, float] = {}

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        t0 = time.perf_counter()
        try:
            yield
        except (MemoryError, OverflowError, SizeGuardError) as exc:
            raise ReportError(self.arity, name, exc) from exc
        spent = time.perf_counter() - t0
        if name == "subfamilies":
            # the survey's own d_squared share is booked separately
            spent -= self.timings.get("subfamily_d_squared", 0.0)
        self.timings[name] = self.timings.get(name, 0.0) + spent


D_SQUARED_STAGES = ("enumerate", "complexes", "d_squared", "subfamily_d_squared")


def verify_arity(arity: Arity | str, max_n: int | None = None) -> VerificationReport:
    """Run enumeration, complexes, homology, nerve and every cross-check."""
    arity = Arity.parse(arity) if isinstance(arity, str) else arity
    check_size(arity, max_n)
    st = _Stages(arity)
    k = arity.k
    checks: dict[str, bool | None] = {}
    wit: dict[str, str] = {}

    with st.stage("enumerate"):
        table = build_cell_table(arity, max_n)
    with st.stage("complexes"):
        full = build_full_complex(arity, max_n, check=False, table=table)
        y, clov = split_y_and_clov(full)
    with st.stage("d_squared"):
        d2_problems = []
        for cx in (full, y, clov):
            w = cx.d_squared_witness()
            if w is not None:
                d2_problems.append(f"{cx.tag}: {w[0]} -> {w[1]}")
        g = full.graded
        n_inc, src = kernels.mask_inclusion_defects(g.indptr, g.indices, table.cmask)
        if n_inc:
            d2_problems.append(f"cut classes not inherited by a contraction of {table.key(int(src))}")
    with st.stage("nerve"):
        nerve = build_nerve(arity, max_n)
        nerve_gc = nerve_cochain_complex(nerve)
    with st.stage("subfamilies"):
        survey = survey_subfamilies(full, nerve.masks())
        st.timings["subfamily_d_squared"] = survey.seconds["d_squared"]
        bad_fam = [f for f in survey.not_acyclic if survey.d_squared[f] > 0]
        if bad_fam:
            classes = ",".join(str(c) for c in family_from_mask(int(survey.masks[bad_fam[0]]), arity.n_leaves))
            d2_problems.append(f"SubFamily({classes})")
    checks["d_squared_zero"] = not d2_problems
    if d2_problems:
        wit["d_squared_zero"] = "; ".join(d2_problems[:3])

    with st.stage("homology"):
        h_full = cohomology(full.graded)
        h_y = cohomology(y.graded)
        h_clov_co, h_clov = both_homologies(clov.graded)
        h_nerve = chain_homology(nerve_gc)

    nz = h_full.nonzero_degrees()
    checks["full_contractible"] = nz == [0] and h_full.rank(0) == 1 and h_full.torsion_free()
    if not checks["full_contractible"]:
        wit["full_contractible"] = f"betti {h_full.betti_list()}, torsion {h_full.torsion}"

    y_extra = _only_degrees(h_y, [0])
    checks["y_concentrated_degree_zero"] = not y_extra and h_y.torsion_free()
    if not checks["y_concentrated_degree_zero"]:
        wit["y_concentrated_degree_zero"] = f"Y betti {h_y.betti_list()}, torsion {h_y.torsion}"

    allowed = [0] if k == 2 else [0, k - 2]
    extra = _only_degrees(h_clov, allowed)
    shape = not extra and (k == 2 or h_clov.rank(0) == 1)
    checks["clov_bouquet_shape"] = shape
    if not shape:
        wit["clov_bouquet_shape"] = f"Clov homology betti {h_clov.betti_list()}"

    checks["clov_torsion_free"] = h_clov.torsion_free() and h_clov_co.torsion_free()
    if not checks["clov_torsion_free"]:
        wit["clov_torsion_free"] = f"homology torsion {h_clov.torsion}, cohomology torsion {h_clov_co.torsion}"

    nerve_b = {s: b for s, b in h_nerve.betti.items() if b}
    clov_b = {s: b for s, b in h_clov.betti.items() if b}
    checks["nerve_matches_clov"] = nerve_b == clov_b and h_nerve.torsion == h_clov.torsion
    if not checks["nerve_matches_clov"]:
        wit["nerve_matches_clov"] = f"nerve betti {nerve_b} vs Clov betti {clov_b}"

    real = survey.unlisted == 0 and not survey.unrealized
    checks["nerve_realizability"] = real
    if not real:
        n = arity.n_leaves
        if survey.unlisted:
            fam = ",".join(str(c) for c in family_from_mask(survey.unlisted_example, n))
            wit["nerve_realizability"] = f"a cell realizes {{{fam}}} but the nerve lacks a subset of it"
        else:
            fam = ",".join(str(c) for c in family_from_mask(survey.unrealized[0], n))
            wit["nerve_realizability"] = f"nerve simplex {{{fam}}} has no realizing cell"

    les = les_consistency(h_y, h_clov_co, h_full, k)
    checks["les_consistent"] = les.ok
    if not les.ok:
        wit["les_consistent"] = les.witness or ""

    if k == 2:
        want = (arity.inputs[0] + 1) * (arity.inputs[1] + 1)
        ok = h_clov.rank(0) == want and h_y.rank(0) == want - 1
        checks["k2_rank_formula"] = ok
        if not ok:
            wit["k2_rank_formula"] = f"rank H0(Clov)={h_clov.rank(0)}, rank H0(Y)={h_y.rank(0)}, expected {want}, {want - 1}"
    else:
        checks["k2_rank_formula"] = None

    bad = [f for f in survey.not_acyclic if survey.d_squared[f] == 0]
    checks["subfamilies_acyclic"] = not bad
    if bad:
        f = bad[0]
        classes = ",".join(str(c) for c in family_from_mask(int(survey.masks[f]), arity.n_leaves))
        wit["subfamilies_acyclic"] = (
            f"SubFamily({classes}): {int(survey.n_aces[f])} critical cells, "
            f"first in degree {int(survey.ace_degree[f])}, bottom degree {int(survey.min_degree[f])}"
        )

    checks["nerve_dimension_bound"] = nerve.dimension <= k - 2
    if not checks["nerve_dimension_bound"]:
        wit["nerve_dimension_bound"] = f"nerve dimension {nerve.dimension} > {k - 2}"

    with st.stage("hashes"):
        hashes = {"Full": full.matrix_hash(), "YPart": y.matrix_hash(), "ClovQuotient": clov.matrix_hash()}

    return VerificationReport(
        arity=arity,
        checks={name: checks[name] for name in CHECKS},
        witnesses={name: wit[name] for name in CHECKS if name in wit},
        census={
            "Full": _keyed(full.counts()),
            "YPart": _keyed(y.counts()),
            "ClovQuotient": _keyed(clov.counts()),
            "total": len(table),
        },
        homology={
            "Full": h_full.to_record(),
            "YPart": h_y.to_record(),
            "ClovQuotient": h_clov_co.to_record(),
            "ClovQuotientHomology": h_clov.to_record(),
            "Nerve": h_nerve.to_record(),
        },
        clov_top_rank=h_clov.rank(k - 2),
        nerve={
            "vertices": len(nerve.vertices),
            "simplices": nerve.counts(),
            "dimension": nerve.dimension,
            "facets": len(nerve.facets()),
        },
        subfamilies={
            "families": survey.n_families,
            "nonempty": int(np.count_nonzero(survey.sizes)),
            "largest": int(survey.sizes.max()) if survey.n_families else 0,
            "needed_full_reduction": int(np.count_nonzero(survey.n_aces > 1)),
        },
        matrix_hashes=hashes,
        timings=st.timings,
    )


# -- batches -----------------------------------------------------------------


def batch_arities(max_leaves: int, k_min: int = 2, k_max: int | None = None) -> list[Arity]:
    """Every arity with ``k_min <= k <= k_max`` and at most ``max_leaves`` leaves."""
    k_max = max_leaves if k_max is None else min(k_max, max_leaves)
    out = []
    for n in range(2, max_leaves + 1):
        for k in range(max(k_min, 2), min(k_max, n) + 1):
            for inputs in product(range(n - k + 1), repeat=k):
                if sum(inputs) == n - k:
                    out.append(Arity(k, tuple(inputs)))
    return sorted(out, key=lambda a: (a.n_leaves, a.k, tuple(-i for i in a.inputs)))


def rotation_classes(arities: Iterable[Arity]) -> dict[Arity, list[Arity]]:
    """Group arities by rotation representative, preserving first-seen order."""
    groups: dict[Arity, list[Arity]] = {}
    for a in arities:
        groups.setdefault(a.rotation_representative(), []).append(a)
    return groups


def rotation_check(rep: Arity, other: Arity, max_n: int | None = None) -> str | None:
    """Cell-level isomorphism and homology agreement between two rotations; None if they agree."""
    from .planar_trees import rotate_cell

    steps = next((s for s in range(rep.k) if rep.rotated(s) == other), None)
    if steps is None:
        return f"{other} is not a rotation of {rep}"
    t_rep = build_cell_table(rep, max_n)
    t_other = build_cell_table(other, max_n)
    if len(t_rep) != len(t_other):
        return f"{rep} has {len(t_rep)} cells, {other} has {len(t_other)}"
    images = sorted(rotate_cell(t_rep.cell(i), steps).key for i in range(len(t_rep)))
    keys = [t_other.key(i) for i in range(len(t_other))]
    if images != keys:
        return f"rotating the cells of {rep} does not give the cells of {other}"
    for t in (t_rep, t_other):
        if t.census() != t_rep.census():
            return f"syzygy census differs between {rep} and {other}"
    hs = []
    for a, t in ((rep, t_rep), (other, t_other)):
        full = build_full_complex(a, max_n, table=t)
        y, clov = split_y_and_clov(full)
        hs.append([cohomology(c.graded).to_record() for c in (full, y, clov)])
    if hs[0] != hs[1]:
        return f"homology tables differ between {rep} and {other}"
    return None


def _run_one(args: tuple[str, int | None, bool]) -> dict:
    text, max_n, timings = args
    arity = Arity.parse(text)
    try:
        return verify_arity(arity, max_n).to_record(timings)
    except ReportError as exc:
        return {"arity": str(arity), "all_pass": False, "error": str(exc), "stage": exc.stage}


ROTATION_SAMPLE_MAX_N = 6


def batch(
    max_leaves: int,
    k_min: int = 2,
    k_max: int | None = None,
    max_n: int | None = None,
    jobs: int = 1,
    timings: bool = False,
) -> dict:
    """Reports for every arity up to rotation, plus a rotation cross-check on a sample.

    The sample is the first non-representative rotation of each class with
    at most ``ROTATION_SAMPLE_MAX_N`` leaves.
    """
    arities = batch_arities(max_leaves, k_min, k_max)
    for a in arities:
        check_size(a, max_n)
    groups = rotation_classes(arities)
    listing = [{"arity": str(a), "representative": str(a.rotation_representative())} for a in arities]
    for item in listing:
        item["rotation_of_other"] = item["arity"] != item["representative"]
    work = [(str(rep), max_n, timings) for rep in groups]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(_run_one, work))
    else:
        reports = [_run_one(w) for w in work]
    rot = []
    for rep, members in groups.items():
        others = [a for a in members if a != rep]
        if others and rep.n_leaves <= ROTATION_SAMPLE_MAX_N:
            problem = rotation_check(rep, others[0], max_n)
            rot.append({"representative": str(rep), "rotation": str(others[0]), "agrees": problem is None})
            if problem:
                rot[-1]["witness"] = problem
    return {
        "schema": SCHEMA,
        "version": SCHEMA_VERSION,
        "kind": "batch",
        "max_leaves": max_leaves,
        "k_range": [k_min, k_max if k_max is not None else max_leaves],
        "all_pass": all(r["all_pass"] for r in reports) and all(c["agrees"] for c in rot),
        "arities": listing,
        "rotation_checks": rot,
        "reports": reports,
    }


def single(arity: Arity, max_n: int | None = None, timings: bool = False) -> dict:
    rec = _run_one((str(arity), max_n, timings))
    return {"schema": SCHEMA, "version": SCHEMA_VERSION, "kind": "single", "all_pass": rec["all_pass"], "reports": [rec]}


def to_json(document: dict) -> str:
    return json.dumps(document, indent=2, ensure_ascii=False) + "\n"


# -- text rendering ----------------------------------------------------------


def _betti_line(rec: dict) -> str:
    return " ".join(f"{s}:{b}" for s, b in rec["betti"].items() if b) or "0"


def _render_report(rec: dict) -> list[str]:
    if "error" in rec:
        return [f"{rec['arity']}  ERROR  {rec['error']}"]
    lines = [f"{rec['arity']}  {'PASS' if rec['all_pass'] else 'FAIL'}  cells={rec['census']['total']}"]
    census = " ".join(f"s={s}: {n}" for s, n in rec["census"]["Full"].items())
    lines.append(f"  census        {census}")
    h = rec["homology"]
    lines.append(f"  Full          betti {_betti_line(h['Full'])}")
    lines.append(f"  YPart         betti {_betti_line(h['YPart'])}  rank H^0 = {h['YPart']['betti'].get('0', 0)}")
    lines.append(f"  ClovQuotient  betti {_betti_line(h['ClovQuotientHomology'])}  rank in degree {rec['k'] - 2} = {rec['clov_top_rank']}")
    nv = rec["nerve"]
    lines.append(f"  Nerve         betti {_betti_line(h['Nerve'])}  dim {nv['dimension']}  simplices {nv['simplices']}")
    lines.append(f"  SubFamilies   {rec['subfamilies']['nonempty']} nonempty of {rec['subfamilies']['families']}")
    for name, ok in rec["checks"].items():
        mark = "n/a" if ok is None else ("ok" if ok else "FAILED")
        line = f"    {name:<28} {mark}"
        if name in rec["witnesses"]:
            line += f"  ({rec['witnesses'][name]})"
        lines.append(line)
    if "timings" in rec:
        lines.append("  timings       " + " ".join(f"{k}={v:.2f}s" for k, v in rec["timings"].items()))
    return lines


def render_text(document: dict) -> str:
    lines = [f"{SCHEMA} v{document['version']}  {document['kind']}  all_pass={document['all_pass']}"]
    if document["kind"] == "batch":
        for item in document["arities"]:
            if item["rotation_of_other"]:
                lines.append(f"  {item['arity']} is a rotation of {item['representative']}")
        for c in document["rotation_checks"]:
            lines.append(
                f"  rotation check {c['representative']} ~ {c['rotation']}: {'ok' if c['agrees'] else 'FAILED'}"
                + (f" ({c['witness']})" if "witness" in c else "")
            )
    for rec in document["reports"]:
        lines.extend(_render_report(rec))
    return "\n".join(lines) + "\n"
