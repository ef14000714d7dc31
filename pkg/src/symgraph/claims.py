"""Claim manifest, claim runners and report records.

A claim binds an id to one of a handful of operations plus parameters and
an expected result.  The manifest ships as ``symgraph/data/claims.json``;
extra claims can be added there without touching code, as long as they use
an existing ``operation``.

Report bodies are deterministic for a fixed seed: everything except
``wall_time_s`` is a pure function of the manifest entry and the seed.
"""

from __future__ import annotations

import fnmatch
import json
import logging
import math
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Optional

from .atlas import (
    ORDER_CONSTANTS,
    STABILIZER_ORDERS,
    STABILIZER_TYPES,
    load_atlas_group,
    stabilizer_model,
)
from .bsgs import DEFAULT_SCAN_BUDGET, PermGroup
from .cosetgraph import arc_orbit_count, build_coset_graph, is_connected, semiregular_parity, semiregular_permutation, valency
from .errors import (
    OrderMismatch,
    ScanBudgetExceeded,
    SymGraphError,
    UnknownClaim,
    UnknownGroup,
)
from .perm import Permutation
from .smallgroup import rows_orders
from .subgroups import (
    Sylow7Census,
    enumerate_solvable_subgroups,
    feasibility_checks,
    feasible_elements,
    index7_subgroup_classes,
    is_feasible,
    iso_type_identify,
    sylow7_count,
)

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
SEED_ENV = "SYMGRAPH_SEED"

PASS = "PASS"
FAIL = "FAIL"
DISCREPANCY = "DISCREPANCY-NOTED"
SKIPPED_LOAD = "SKIPPED(load-error)"
SKIPPED_BUDGET = "SKIPPED(budget)"


@dataclass
class Claim:
    id: str
    label: str
    location: str
    kind: str
    operation: str
    parameters: dict
    expected: dict
    seed: int = 0
    budget: int = DEFAULT_SCAN_BUDGET
    time_limit_s: Optional[float] = None
    notes: str = ""
    discrepancy: str = ""

    @classmethod
    def from_json(cls, obj: dict) -> Claim:
        return cls(
            id=obj["id"], label=obj.get("label", obj["id"]), location=obj.get("location", ""),
            kind=obj["kind"], operation=obj["operation"], parameters=obj.get("parameters", {}),
            expected=obj["expected"], seed=int(obj.get("seed", 0)),
            budget=int(obj.get("budget", DEFAULT_SCAN_BUDGET)),
            time_limit_s=obj.get("time_limit_s"), notes=obj.get("notes", ""),
            discrepancy=obj.get("discrepancy", ""),
        )


@dataclass
class ClaimReport:
    claim_id: str
    label: str
    location: str
    kind: str
    status: str
    expected: dict
    computed: dict
    witness: dict
    seed: int
    seed_source: str
    notes: list = field(default_factory=list)
    wall_time_s: float = 0.0

    def body(self) -> dict:
        """Everything but the wall time (the reproducible part)."""
        return {
            "schema_version": SCHEMA_VERSION,
            "claim_id": self.claim_id,
            "label": self.label,
            "location": self.location,
            "kind": self.kind,
            "status": self.status,
            "expected": self.expected,
            "computed": self.computed,
            "witness": self.witness,
            "seed": self.seed,
            "seed_source": self.seed_source,
            "notes": list(self.notes),
        }

    def to_json(self) -> dict:
        out = self.body()
        out["wall_time_s"] = round(self.wall_time_s, 3)
        return out

    def body_bytes(self) -> bytes:
        return json.dumps(self.body(), sort_keys=True).encode()


# ---- manifest ---------------------------------------------------------------

def load_manifest(path=None) -> list[Claim]:
    if path is None:
        text = resources.files("symgraph.data").joinpath("claims.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    data = json.loads(text)
    if data.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported manifest schema {data.get('schema_version')!r}")
    claims = [Claim.from_json(c) for c in data["claims"]]
    ids = [c.id for c in claims]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate claim ids in manifest")
    for c in claims:
        if c.operation not in OPERATIONS:
            raise ValueError(f"claim {c.id}: unknown operation {c.operation!r}")
    return claims


def find_claim(claim_id: str, claims: Optional[list[Claim]] = None) -> Claim:
    for c in claims if claims is not None else load_manifest():
        if claim_id in (c.id, c.label):
            return c
    raise UnknownClaim(claim_id)


def effective_seed(claim: Claim) -> tuple[int, str]:
    env = os.environ.get(SEED_ENV)
    if env is not None and env.strip():
        return int(env), "env"
    return claim.seed, "manifest"


# ---- shared heavy data ------------------------------------------------------

class GroupLoadError(SymGraphError):
    """A named group could not be built from the atlas."""


class _Context:
    """Per-run cache so claims on the same ambient group share one census."""

    def __init__(self, data_dir=None, workers: int = 1):
        self.data_dir = data_dir
        self.workers = workers
        self._lock = threading.Lock()
        self._keys: dict = {}
        self._values: dict = {}

    def _once(self, key, make: Callable):
        with self._lock:
            lock = self._keys.setdefault(key, threading.Lock())
        with lock:
            if key not in self._values:
                self._values[key] = make()
            return self._values[key]

    def group(self, name: str) -> PermGroup:
        def load():
            try:
                return load_atlas_group(name, self.data_dir)
            except (UnknownGroup, OrderMismatch, OSError, ValueError) as exc:
                raise GroupLoadError(f"{name}: {type(exc).__name__}: {exc}") from exc
        return self._once(("group", name), load)

    def census(self, name: str, seed: int, budget: int) -> Sylow7Census:
        return self._once(
            ("census", name, seed, budget),
            lambda: Sylow7Census.build(self.group(name), name, seed=seed, budget=budget, workers=self.workers),
        )


def _class_json(c) -> dict:
    d = c.to_json()
    d["ambient"] = c.ambient
    return d


def _resolve_stabilizer(ctx: _Context, g: PermGroup, group_name: str, spec: str, seed: int, budget: int) -> tuple[PermGroup, dict]:
    """Stabilizer spec: ``point:K`` (1-based), ``census:TYPE`` or ``gens:CYC;CYC``."""
    kind, _, arg = spec.partition(":")
    if kind == "point":
        return g.point_stabilizer(int(arg) - 1), {"spec": spec}
    if kind == "census":
        classes = ctx.census(group_name, seed, budget).census(arg)
        if not classes:
            raise SymGraphError(f"no subgroup of type {arg} in {group_name}")
        return classes[0].representative, {"spec": spec, "class": _class_json(classes[0])}
    if kind == "gens":
        gens = [Permutation.from_cycles(c, g.degree) for c in arg.split(";") if c.strip()]
        return PermGroup(gens, g.degree), {"spec": spec}
    raise ValueError(f"bad stabilizer spec {spec!r}")


# ---- operations -------------------------------------------------------------
# each returns (computed, witness, notes)

def _op_solvable_census(claim: Claim, ctx: _Context, seed: int):
    p = claim.parameters
    g = ctx.group(p["group"])
    order = int(p["order"])
    classes = enumerate_solvable_subgroups(g, order, p["group"], label=False, target_order=order)
    hits = [c for c in classes if c.order == order]
    explored = sorted({c.order for c in classes})
    witness = {
        "group_order": g.order(),
        "index": g.order() // order,
        "classes_explored": len(classes),
        "orders_explored": explored,
        "classes": [_class_json(c) for c in hits],
    }
    return {"count": len(hits)}, witness, []


def _op_sylow7_census(claim: Claim, ctx: _Context, seed: int):
    p = claim.parameters
    cen = ctx.census(p["group"], seed, claim.budget)
    counts, classes = {}, {}
    for ty in p["types"]:
        found = cen.census(ty)
        counts[ty] = len(found)
        classes[ty] = [_class_json(c) for c in found]
    extra = {}
    for ty in p.get("extra_types", []):
        found = cen.census(ty)
        extra[ty] = {"count": len(found), "classes": [_class_json(c) for c in found]}
    witness = {
        "group_order": cen.ambient.order(),
        "sylow7_generator": cen.p_generator.to_cycles(),
        "random_draws": cen.draws,
        "normalizer_order": cen.normalizer.order(),
        "normalizer_generators": [x.to_cycles() for x in cen.normalizer.generators],
        "classes": classes,
    }
    notes = []
    if extra:
        witness["extra_types"] = extra
        notes.append("extra labels: " + ", ".join(f"{k}={v['count']}" for k, v in extra.items()))
    return {"counts": counts}, witness, notes


def _op_feasible_search(claim: Claim, ctx: _Context, seed: int):
    p = claim.parameters
    g = ctx.group(p["group"])
    h, hinfo = _resolve_stabilizer(ctx, g, p["group"], p["stabilizer"], seed, claim.budget)
    stats: dict = {}
    found = feasible_elements(g, h, budget=claim.budget, workers=ctx.workers, stats=stats)
    witness = {
        "stabilizer": hinfo,
        "stabilizer_generators": [x.to_cycles() for x in h.generators],
        "stabilizer_order": h.order(),
        "search": stats,
        "feasible": [f.to_json() for f in found],
    }
    return {"count": len(found)}, witness, []


def _op_stabilizer_types(claim: Claim, ctx: _Context, seed: int):
    bound = int(claim.parameters["bound"])
    rows, counts = {}, {}
    for label in STABILIZER_TYPES:
        m = stabilizer_model(label)
        counts[label] = sylow7_count(m)
        rows[label] = {"order": m.order(), "degree": m.degree, "divides_bound": bound % m.order() == 0,
                       "identified_as": iso_type_identify(m)}
    computed = {
        "all_divide_bound": all(r["divides_bound"] for r in rows.values())
        and all(r["order"] == STABILIZER_ORDERS[k] for k, r in rows.items()),
        "sylow7_counts": counts,
    }
    return computed, {"types": rows}, []


def _op_parity(claim: Claim, ctx: _Context, seed: int):
    p = claim.parameters
    k = int(p.get("orbit_count", 7))
    parities, witness = {}, {}
    for m in p["orbit_sizes"]:
        formula = semiregular_parity(int(m), k)
        explicit = semiregular_permutation(int(m), k).parity()
        if formula != explicit:
            raise RuntimeError(f"parity formula disagrees with explicit permutation at m={m}")
        parities[str(m)] = formula
        witness[str(m)] = {"degree": m * k, "cycles": k, "transpositions": k * (m - 1), "parity": explicit}
    return {"parities": parities}, witness, []


def _op_table_indices(claim: Claim, ctx: _Context, seed: int):
    p = claim.parameters
    cap, txt = int(p["caption_bound"]), int(p["text_bound"])
    rows, ok, capok = [], True, True
    for T, M, listed in p["rows"]:
        idx = ORDER_CONSTANTS[T] // ORDER_CONSTANTS[M]
        exact = ORDER_CONSTANTS[T] % ORDER_CONSTANTS[M] == 0
        rows.append({"T": T, "M": M, "listed": listed, "computed": idx, "match": exact and idx == listed,
                     "divides_caption_bound": cap % idx == 0, "divides_text_bound": txt % idx == 0})
        ok &= exact and idx == listed
        capok &= cap % idx == 0
    notes = ["the caption bound 2^2.3^3.7 differs from the 2^2.3^2.7 used in the text; every listed index divides both"
             if all(r["divides_text_bound"] for r in rows) else "some index does not divide 2^2.3^2.7"]
    return {"all_match": ok, "all_divide_caption_bound": capok}, {"rows": rows}, notes


def _factor(n: int) -> dict:
    out, d = {}, 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def _op_order_factorization(claim: Claim, ctx: _Context, seed: int):
    p = claim.parameters
    primes = set(p["primes"])
    rows, all_ok, mismatches = {}, True, []
    for name in p["groups"]:
        order = ctx.group(name).order()
        fac = _factor(order)
        ok = set(fac) <= primes
        all_ok &= ok
        row = {"order": order, "factorization": {str(k): v for k, v in sorted(fac.items())}, "only_237": ok}
        stated = p.get("stated", {}).get(name)
        if stated is not None:
            stated_val = math.prod(int(q) ** e for q, e in stated.items())
            row["stated"] = stated
            row["stated_value"] = stated_val
            row["stated_matches"] = stated_val == order
            if stated_val != order:
                mismatches.append(name)
        rows[name] = row
    notes = [f"stated factorization of {n} does not match its order" for n in mismatches]
    return {"all_237": all_ok}, {"groups": rows, "stated_mismatches": mismatches}, notes


def _op_admissible_lists(claim: Claim, ctx: _Context, seed: int):
    p = claim.parameters
    bound, ab = int(p["bound"]), int(p["arc_transitive_bound"])
    admissible = {7} | {n for n in range(14, bound + 1) if bound % n == 0}
    # arc-transitive case: n = |T:G| = |T_v|/|G_v| divides 2^2.3^2, and A_{n-1} simple
    arc_candidates = [n for n in range(6, ab + 1) if ab % n == 0]
    arc = sorted(set(arc_candidates) & admissible)
    # regular case: n = |T_v| is a stabilizer order; drop n when the index-7
    # subgroup L is cyclic of order m with 7 m-cycles forming an odd permutation
    stab_orders = sorted(STABILIZER_ORDERS.values())
    candidates = [n for n in stab_orders if n in admissible]
    removed, per_type = [], {}
    for label in STABILIZER_TYPES:
        n = STABILIZER_ORDERS[label]
        Ls = index7_subgroup_classes(stabilizer_model(label))
        cyclic = all(int(rows_orders(L.elements_array()).max()) == L.order() for L in Ls)
        m = n // 7
        odd = cyclic and semiregular_parity(m) == "odd"
        per_type[label] = {"n": n, "L_orders": sorted({L.order() for L in Ls}), "L_cyclic": cyclic,
                           "L_parity": semiregular_parity(m) if cyclic else None}
        if odd:
            removed.append(n)
    regular = [n for n in candidates if n not in removed]
    # stronger observation: an involution of a regular H is n/2 transpositions
    inv_odd = [n for n in stab_orders if n % 2 == 0 and (n // 2) % 2 == 1]
    witness = {
        "admissible_set": sorted(admissible),
        "arc_transitive_candidates": arc_candidates,
        "regular_candidates": candidates,
        "removed_by_cyclic_L_parity": sorted(removed),
        "types": per_type,
        "observation_involution_parity_excludes": inv_odd,
    }
    notes = []
    extra = sorted(set(inv_odd) - set(removed))
    if extra:
        notes.append(
            f"observation: an involution of a regular stabilizer of order n is n/2 disjoint transpositions, "
            f"odd when n = 2 mod 4; this also rules out n = {extra}"
        )
    return {"arc_transitive": arc, "regular": regular}, witness, notes


def _op_positive_control(claim: Claim, ctx: _Context, seed: int):
    p = claim.parameters
    g = ctx.group(p["group"])
    h, hinfo = _resolve_stabilizer(ctx, g, p["group"], p["stabilizer"], seed, claim.budget)
    label = iso_type_identify(h)
    found = feasible_elements(g, h, budget=claim.budget)
    computed = {"has_feasible": bool(found)}
    witness = {"stabilizer": hinfo, "stabilizer_type": label,
               "stabilizer_generators": [x.to_cycles() for x in h.generators],
               "feasible": [f.to_json() for f in found]}
    notes = []
    if label != p.get("stabilizer_type", label):
        notes.append(f"stabilizer identified as {label}")
    if found:
        cg = build_coset_graph(g, h, found[0].g, group_name=p["group"])
        nv = cg.vertex_count
        k = valency(cg)
        computed.update({
            "vertex_count": nv, "valency": k, "connected": is_connected(cg),
            "arc_orbits": arc_orbit_count(cg, g), "complete_graph": k == nv - 1,
        })
        witness["graph"] = cg.to_json()
    return computed, witness, notes


OPERATIONS = {
    "solvable-census-order": _op_solvable_census,
    "sylow7-census": _op_sylow7_census,
    "feasible-search": _op_feasible_search,
    "stabilizer-types": _op_stabilizer_types,
    "parity": _op_parity,
    "table-indices": _op_table_indices,
    "order-factorization": _op_order_factorization,
    "admissible-lists": _op_admissible_lists,
    "positive-control": _op_positive_control,
}


# ---- running ----------------------------------------------------------------

def _execute(claim: Claim, ctx: _Context) -> ClaimReport:
    seed, source = effective_seed(claim)
    t0 = time.perf_counter()
    logger.info("claim %s (%s) starting", claim.id, claim.label)
    notes = []
    computed: dict = {}
    witness: dict = {}
    try:
        computed, witness, notes = OPERATIONS[claim.operation](claim, ctx, seed)
        if computed != claim.expected:
            status = FAIL
        elif claim.discrepancy:
            status = DISCREPANCY
            notes = [claim.discrepancy] + notes
        else:
            status = PASS
    except GroupLoadError as exc:
        status = SKIPPED_LOAD
        notes.append(str(exc))
    except ScanBudgetExceeded as exc:
        status = SKIPPED_BUDGET
        notes.append(str(exc))
    except Exception as exc:  # a failing claim is data, not a crash
        logger.exception("claim %s raised", claim.id)
        status = FAIL
        notes.append(f"error: {type(exc).__name__}: {exc}")
    if claim.notes:
        notes.append(claim.notes)
    elapsed = time.perf_counter() - t0
    logger.info("claim %s: %s in %.1fs", claim.id, status, elapsed)
    return ClaimReport(
        claim_id=claim.id, label=claim.label, location=claim.location, kind=claim.kind,
        status=status, expected=claim.expected, computed=computed, witness=witness,
        seed=seed, seed_source=source, notes=notes, wall_time_s=elapsed,
    )


def run_claim(claim_id: str, data_dir=None, manifest=None, workers: int = 1) -> ClaimReport:
    claims = load_manifest(manifest)
    return _execute(find_claim(claim_id, claims), _Context(data_dir, workers))


def run_suite(
    filter_glob: Optional[str] = None, parallel: bool = False, data_dir=None,
    manifest=None, workers: int = 1,
) -> tuple[list[ClaimReport], int]:
    """Run every (matching) claim; returns the reports and the exit code."""
    claims = load_manifest(manifest)
    if filter_glob:
        claims = [c for c in claims if fnmatch.fnmatchcase(c.id, filter_glob) or fnmatch.fnmatchcase(c.label, filter_glob)]
    ctx = _Context(data_dir, workers)
    if parallel and len(claims) > 1:
        with ThreadPoolExecutor(max_workers=min(8, len(claims))) as pool:
            reports = list(pool.map(lambda c: _execute(c, ctx), claims))
    else:
        reports = [_execute(c, ctx) for c in claims]
    return reports, exit_code(reports)


def exit_code(reports: list[ClaimReport]) -> int:
    return 1 if any(r.status == FAIL for r in reports) else 0


def suite_json(reports: list[ClaimReport]) -> dict:
    counts: dict = {}
    for r in reports:
        counts[r.status] = counts.get(r.status, 0) + 1
    return {
        "schema_version": SCHEMA_VERSION,
        "summary": {"claims": len(reports), "statuses": counts, "exit_code": exit_code(reports)},
        "reports": [r.to_json() for r in reports],
    }


# ---- witness re-validation --------------------------------------------------

def revalidate(report: ClaimReport | dict, data_dir=None) -> list[str]:
    """Re-check every witness in a report from scratch; returns problems found."""
    rep = report.to_json() if isinstance(report, ClaimReport) else report
    w = rep.get("witness") or {}
    problems = []

    def check_class(c: dict, ambient: PermGroup, where: str):
        gens = [Permutation.from_cycles(x, ambient.degree) for x in c["generators"]]
        s = PermGroup(gens, ambient.degree)
        if not s.is_subgroup_of(ambient):
            problems.append(f"{where}: not a subgroup")
        if s.order() != c["order"] or ambient.order() % s.order():
            problems.append(f"{where}: order {s.order()} vs {c['order']}")
        if c["iso_label"] in STABILIZER_ORDERS or c["iso_label"] == "F_21xZ_6":
            if iso_type_identify(s) != c["iso_label"]:
                problems.append(f"{where}: not isomorphic to {c['iso_label']}")
        if c["class_size"] * c["normalizer_order"] != ambient.order():
            problems.append(f"{where}: class size times normalizer order is not |G|")

    classes = w.get("classes") or []
    flat = classes if isinstance(classes, list) else [c for v in classes.values() for c in v]
    for k, c in enumerate(flat):
        check_class(c, load_atlas_group(c["ambient"], data_dir), f"class {k}")
    for ty, ex in (w.get("extra_types") or {}).items():
        for k, c in enumerate(ex["classes"]):
            check_class(c, load_atlas_group(c["ambient"], data_dir), f"{ty} class {k}")
    stab = w.get("stabilizer") or {}
    if "class" in stab:
        c = stab["class"]
        check_class(c, load_atlas_group(c["ambient"], data_dir), "stabilizer class")
    if w.get("feasible"):
        group_name = stab.get("class", {}).get("ambient") or _claim_group(rep["claim_id"])
        g = load_atlas_group(group_name, data_dir)
        h = PermGroup([Permutation.from_cycles(x, g.degree) for x in w["stabilizer_generators"]], g.degree)
        for k, f in enumerate(w["feasible"]):
            t = Permutation.from_cycles(f["element"], g.degree)
            checks = feasibility_checks(g, h, t)
            if not is_feasible(checks):
                problems.append(f"feasible element {k} fails {checks}")
    return problems


def _claim_group(claim_id: str) -> str:
    return find_claim(claim_id).parameters["group"]
