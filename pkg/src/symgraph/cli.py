"""Command line entry point.

    symgraph verify run C5
    symgraph verify suite --filter 'a12-*' --parallel --json out.json
    symgraph atlas list
    symgraph atlas show "PSU(3,3)"
    symgraph coset-graph --group "PSL(2,7)" --stabilizer point:1 --element "(1 2)(3 4)(5 7)(6 8)" --out k8.txt
    symgraph feasible-search --group "PSL(2,7)" --stabilizer point:1

Stabilizer specs: ``point:K`` (stabilizer of the 1-based point K),
``gens:CYC;CYC`` (generators in cycle notation) or ``census:TYPE`` (the
first class of that stabilizer type found by the Sylow-7 census).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import claims as cl
from .atlas import atlas_specs, load_atlas_group
from .cosetgraph import arc_orbit_count, build_coset_graph, is_connected, valency
from .errors import SymGraphError
from .perm import Permutation
from .subgroups import feasible_elements, iso_type_identify


def _print_report(r: cl.ClaimReport) -> None:
    print(f"{r.label:4s} {r.claim_id:24s} {r.status:20s} {json.dumps(r.computed, sort_keys=True)}  [{r.wall_time_s:.1f}s]")
    for note in r.notes:
        print(f"       note: {note}")


def cmd_verify_run(args) -> int:
    r = cl.run_claim(args.claim, data_dir=args.data_dir, workers=args.workers)
    if args.json:
        _write_json(args.json, r.to_json())
    else:
        print(json.dumps(r.to_json(), indent=2))
    return cl.exit_code([r])


def cmd_verify_suite(args) -> int:
    reports, code = cl.run_suite(args.filter, parallel=args.parallel, data_dir=args.data_dir, workers=args.workers)
    for r in reports:
        _print_report(r)
    doc = cl.suite_json(reports)
    print(f"{len(reports)} claims: " + ", ".join(f"{k}={v}" for k, v in sorted(doc["summary"]["statuses"].items())))
    if args.json:
        _write_json(args.json, doc)
    return code


def _write_json(path: str, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_atlas_list(args) -> int:
    for name, spec in sorted(atlas_specs(args.data_dir).items()):
        print(f"{name:16s} degree {spec.degree:4d}  order {spec.expected_order}  ({spec.provenance})")
    return 0


def cmd_atlas_show(args) -> int:
    specs = atlas_specs(args.data_dir)
    if args.name not in specs:
        print(f"unknown group {args.name!r}", file=sys.stderr)
        return 2
    spec = specs[args.name]
    g = load_atlas_group(args.name, args.data_dir)
    out = spec.to_json()
    out["provenance"] = spec.provenance
    out["computed_order"] = g.order()
    out["base"] = list(g.bsgs.base)
    out["orbit_lengths"] = [len(o) for o in g.bsgs.orbits]
    print(json.dumps(out, indent=2))
    return 0


def _stabilizer(g, group_name: str, spec: str, args):
    ctx = cl._Context(args.data_dir, args.workers)
    ctx._values[("group", group_name)] = g
    return cl._resolve_stabilizer(ctx, g, group_name, spec, args.seed, args.budget)[0]


def cmd_coset_graph(args) -> int:
    g = load_atlas_group(args.group, args.data_dir)
    h = _stabilizer(g, args.group, args.stabilizer, args)
    t = Permutation.from_cycles(args.element, g.degree)
    cg = build_coset_graph(g, h, t, group_name=args.group)
    k = valency(cg)
    summary = {"vertex_count": cg.vertex_count, "valency": k, "connected": is_connected(cg)}
    if cg.vertex_count <= 10**4:
        summary["arc_orbits"] = arc_orbit_count(cg, g)
    if args.out:
        cg.save(args.out)
        summary["written"] = args.out
    print(json.dumps(summary))
    return 0


def cmd_feasible_search(args) -> int:
    g = load_atlas_group(args.group, args.data_dir)
    h = _stabilizer(g, args.group, args.stabilizer, args)
    stats: dict = {}
    found = feasible_elements(g, h, budget=args.budget, workers=args.workers, stats=stats)
    out = {
        "group": args.group,
        "stabilizer_order": h.order(),
        "stabilizer_type": iso_type_identify(h) if h.order() <= 252 else None,
        "search": stats,
        "feasible": [f.to_json() for f in found],
    }
    print(json.dumps(out, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="symgraph", description="Permutation groups, coset graphs and claim verification.")
    ap.add_argument("--data-dir", default=None, help="replacement directory of group files")
    ap.add_argument("--workers", type=int, default=1, help="threads for element scans")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="run claims from the manifest")
    vsub = verify.add_subparsers(dest="verify_command", required=True)
    run = vsub.add_parser("run", help="run one claim by id or label")
    run.add_argument("claim")
    run.add_argument("--json", metavar="PATH")
    run.set_defaults(func=cmd_verify_run)
    suite = vsub.add_parser("suite", help="run every claim (optionally filtered)")
    suite.add_argument("--filter", metavar="GLOB")
    suite.add_argument("--parallel", action="store_true")
    suite.add_argument("--json", metavar="PATH")
    suite.set_defaults(func=cmd_verify_suite)

    atlas = sub.add_parser("atlas", help="named groups")
    asub = atlas.add_subparsers(dest="atlas_command", required=True)
    asub.add_parser("list").set_defaults(func=cmd_atlas_list)
    show = asub.add_parser("show")
    show.add_argument("name")
    show.set_defaults(func=cmd_atlas_show)

    for name, func, helptext in (
        ("coset-graph", cmd_coset_graph, "build Cos(G, H, HtH) and export it"),
        ("feasible-search", cmd_feasible_search, "search feasible 2-elements for (G, H)"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--group", required=True)
        p.add_argument("--stabilizer", required=True, help="point:K | gens:CYC;CYC | census:TYPE")
        p.add_argument("--seed", type=int, default=7)
        p.add_argument("--budget", type=int, default=cl.DEFAULT_SCAN_BUDGET)
        if name == "coset-graph":
            p.add_argument("--element", required=True, help="t in cycle notation (1-based)")
            p.add_argument("--out", help="output path: .json for JSON, anything else for an edge list")
        p.set_defaults(func=func)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s")
    try:
        return args.func(args)
    except SymGraphError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
