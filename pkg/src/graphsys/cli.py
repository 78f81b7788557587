"""Unified command-line entry point.

Exit codes: 0 success, 2 validation error, 3 scale-guard refusal, 64 usage
errors.  Randomized subcommands take --seed (default 0, never wall-clock);
numeric output is fixed at 12 decimal places.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .combinatorics import PreColoring, multigraph_from_json, parallel_edges, star_graph
from .cutnorm import cut_norm_exact, cut_norm_heuristic, d_box_bounds, delta_box_bounds
from .density import DensityRequest, count_rainbow_copies
from .errors import ScaleGuardError, ValidationError
from .extremal import build_program, enumerate_zero_structures, export_program, pi_star_tree
from .graphon import GraphSystem, StepGraphonSystem, from_graph_system, is_admissible, is_classical
from .masks import mask_key, nonempty_masks
from .regularity import weak_regularity_partition
from .sampling import convergence_trace, sample_system, sample_weighted, trace_to_csv
from .search import construction_bipartite, construction_lemma72, construction_thm14, exact_extremal_number, find_rainbow_copy

SCHEMA_VERSION = 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(64)


def _fmt(x: float) -> str:
    return f"{x:.12f}"


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc


def _write_out(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        print(text)


def _load_system(path: str) -> StepGraphonSystem:
    return StepGraphonSystem.from_json(_read(path))


def _load_graph(path: str) -> GraphSystem:
    return GraphSystem.from_json(_read(path))


def _load_template(path: str, k: int | None = None):
    H, psi = multigraph_from_json(_read(path))
    if psi is None:
        if k is None:
            raise ValidationError("template carries no coloring and no --k was given")
        psi = PreColoring.empty(k)
    elif k is not None and psi.k != k:
        psi = PreColoring(dict(psi.assignments), k, psi.rainbow_flag)
        psi.validate_for(H)
    return H, psi


def build_parser() -> _Parser:
    parser = _Parser(prog="graphsys", description=__doc__)
    parser.add_argument("--version", action="version",
                        version=f"graphsys {__version__} (schema {SCHEMA_VERSION})")
    parser.add_argument("--threads", type=int, default=None,
                        help="cap worker parallelism (results are independent of it)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("density", help="rainbow/colored/induced density of a template")
    p.add_argument("--template", required=True)
    p.add_argument("--system", required=True)
    p.add_argument("--mode", choices=["rainbow", "colored", "induced"], default="rainbow")
    p.add_argument("--k", type=int, default=None)

    p = sub.add_parser("cutnorm", help="cut norm of a system or d_box/delta of a pair")
    p.add_argument("--a", required=True)
    p.add_argument("--b", default=None)
    p.add_argument("--exact", action="store_true")
    p.add_argument("--heuristic", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=20)

    p = sub.add_parser("sample", help="sample G(n, W) or H_S(n, W)")
    p.add_argument("--system", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.add_argument("--weighted", action="store_true", help="emit part labels and stop after stage one")

    p = sub.add_parser("trace", help="delta interval of G(n, W) vs W over n")
    p.add_argument("--system", required=True)
    p.add_argument("--ns", required=True, help="comma list, e.g. 100,200,400")
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", default=None)

    p = sub.add_parser("regularity", help="weak regularity partition of a graph system")
    p.add_argument("--graph", required=True)
    p.add_argument("--parts", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=0.05)
    p.add_argument("--out", default=None)

    p = sub.add_parser("search", help="find one rainbow copy of a template")
    p.add_argument("--graph", required=True)
    p.add_argument("--template", required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--count", action="store_true")

    p = sub.add_parser("extremal-exact", help="tiny exact rainbow extremal number")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--template", required=True)
    p.add_argument("--allow-random", action="store_true")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("pi-star", help="tree rainbow Turan density at a fixed part count")
    p.add_argument("--tree", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--export-programs", default=None, metavar="DIR")

    p = sub.add_parser("construct", help="paper constructions as system JSON")
    p.add_argument("--kind", choices=["star-free", "bipartite", "cover"], required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--l", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--alphas", default=None, help="comma list for the cover construction")
    p.add_argument("--out", default=None)

    p = sub.add_parser("check", help="admissibility/classicality verdict for a system")
    p.add_argument("--system", required=True)
    p.add_argument("--tol", type=float, default=1e-9)

    return parser


def _cmd_density(args) -> int:
    system = _load_system(args.system)
    H, psi = _load_template(args.template, args.k or system.k)
    print(_fmt(DensityRequest(H, psi, system, args.mode).evaluate()))
    return 0


def _cmd_cutnorm(args) -> int:
    A = _load_system(args.a)
    if args.b:
        B = _load_system(args.b)
        if A.m == B.m and np.abs(A.sizes - B.sizes).max() < 1e-9:
            lo, hi = d_box_bounds(A, B, restarts=args.restarts, seed=args.seed)
            label = "d_box"
        else:
            lo, hi = delta_box_bounds(A, B, restarts=max(args.restarts, 20), seed=args.seed)
            label = "delta_box"
        print(f"{label} in [{_fmt(lo)}, {_fmt(hi)}]")
        return 0
    tables = [A.block(mask) for mask in nonempty_masks(A.k)]
    if args.heuristic and not args.exact:
        res = cut_norm_heuristic(tables, A.sizes, restarts=args.restarts, seed=args.seed)
    else:
        res = cut_norm_exact(tables, A.sizes)
    print(_fmt(res.value))
    print(f"S={list(res.S)} T={list(res.T)}")
    return 0


def _cmd_sample(args) -> int:
    system = _load_system(args.system)
    if args.weighted:
        H = sample_weighted(args.n, system, seed=args.seed)
        doc = {"n": H.n, "k": H.k, "parts": H.part_labels.tolist(),
               "tables": {mask_key(mask): H.tables[mask].tolist() for mask in sorted(H.tables)}}
        _write_out(json.dumps(doc, indent=2), args.out)
        return 0
    G = sample_system(args.n, system, seed=args.seed)
    _write_out(G.to_json(), args.out)
    return 0


def _cmd_trace(args) -> int:
    system = _load_system(args.system)
    ns = [int(x) for x in args.ns.split(",") if x.strip()]
    rows = convergence_trace(system, ns, seeds=args.seeds, seed0=args.seed)
    csv_text = trace_to_csv(rows)
    if args.csv:
        Path(args.csv).write_text(csv_text)
    else:
        sys.stdout.write(csv_text)
    return 0


def _cmd_regularity(args) -> int:
    G = _load_graph(args.graph)
    res = weak_regularity_partition(G, args.parts, seed=args.seed, tol=args.tol)
    doc = {
        "parts": res.partition,
        "certificate": {"d_box_lower": res.lower, "d_box_upper": res.upper},
        "round_discrepancies": res.rounds,
    }
    _write_out(json.dumps(doc, indent=2), args.out)
    return 0


def _cmd_search(args) -> int:
    G = _load_graph(args.graph)
    H, psi = _load_template(args.template, args.k or G.k)
    if args.count:
        print(count_rainbow_copies(G, H, psi))
        return 0
    emb = find_rainbow_copy(G, H, psi)
    if emb is None:
        print("none")
    else:
        print(json.dumps({"vertices": emb.vertex_map, "colors": emb.edge_colors}))
    return 0


def _cmd_extremal(args) -> int:
    H, psi = _load_template(args.template, args.k)
    res = exact_extremal_number(args.n, args.k, H, psi,
                                allow_random=args.allow_random, seed=args.seed)
    kind = "exact" if res.exact else "lower-bound"
    print(f"{res.value} ({kind})")
    return 0


def _cmd_pi_star(args) -> int:
    T, psi = _load_template(args.tree, args.k)
    structures = enumerate_zero_structures(T, psi, args.k, args.m)
    res = pi_star_tree(T, psi, args.k, args.m, seed=args.seed, structures=structures)
    print(_fmt(res.value))
    print(f"lower bound (exact if m >= theorem bound); {res.n_structures} structures")
    if res.structure is not None:
        print(f"structure {list(res.structure.encode())} point {[round(float(x), 9) for x in res.point]}")
    if args.export_programs:
        outdir = Path(args.export_programs)
        outdir.mkdir(parents=True, exist_ok=True)
        for idx, S in enumerate(structures):
            P = build_program(S)
            (outdir / f"program_{idx:04d}.json").write_text(P.to_json())
            (outdir / f"program_{idx:04d}.txt").write_text(export_program(P))
    return 0


def _cmd_construct(args) -> int:
    if args.kind == "star-free":
        system = construction_lemma72(args.k)
    elif args.kind == "bipartite":
        if args.l is None:
            raise ValidationError("bipartite construction needs --l")
        system = construction_bipartite(args.k, args.l)
    else:
        if args.n is None or args.alphas is None:
            raise ValidationError("cover construction needs --n and --alphas")
        alphas = [float(x) for x in args.alphas.split(",")]
        G = construction_thm14(args.n, alphas)
        _write_out(G.to_json(), args.out)
        return 0
    _write_out(system.to_json(), args.out)
    return 0


def _cmd_check(args) -> int:
    system = _load_system(args.system)
    ok, witness = is_admissible(system, tol=args.tol)
    if ok:
        print("admissible")
    else:
        value, mask, cell = witness
        print(f"not admissible: overline[{mask_key(mask)}]{list(cell)} = {_fmt(value)}")
    print("classical" if is_classical(system, tol=max(args.tol, 1e-9)) else "not classical")
    return 0


_COMMANDS = {
    "density": _cmd_density,
    "cutnorm": _cmd_cutnorm,
    "sample": _cmd_sample,
    "trace": _cmd_trace,
    "regularity": _cmd_regularity,
    "search": _cmd_search,
    "extremal-exact": _cmd_extremal,
    "pi-star": _cmd_pi_star,
    "construct": _cmd_construct,
    "check": _cmd_check,
}


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.threads is not None and args.threads < 1:
        sys.stderr.write("error: --threads must be positive\n")
        return 2
    try:
        return _COMMANDS[args.command](args)
    except ValidationError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except ScaleGuardError as exc:
        sys.stderr.write(f"refused: {exc}\n")
        return 3


def main() -> None:
    raise SystemExit(dispatch())


def golden_dir() -> Path:
    """Directory of pinned golden values; overridable via RT_DATA_DIR."""
    env = os.environ.get("RT_DATA_DIR")
    if env:
        return Path(env)
    return Path(__file__).resolve().parent / "golden"


def load_golden(name: str) -> dict:
    path = golden_dir() / name
    try:
        return json.loads(path.read_text())
    except OSError as exc:
        raise ValidationError(f"missing golden file {path}: {exc}") from exc


if __name__ == "__main__":
    main()
