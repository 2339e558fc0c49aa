"""Command-line entry point: ``hypersym <subcommand> [flags]``.

Exit codes: 0 success, 1 verification failure, 2 usage or input/output error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import data, suite
from .augment import MODES, AugmentationPlan, augment, expected_stationary, solve_unbiased
from .core import DisconnectedError, Hypergraph, HypergraphError, connected_components, is_connected
from .refine import UNTIL_CONVERGENCE, color_classes, gwl1
from .symmetry import component_statistics, find_symmetries, statistics_csv

log = logging.getLogger("hypersym")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------- JSON

def _encode(obj) -> str:
    """Sorted-key JSON with floats printed to 17 significant digits."""
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(obj[k])}" for k in sorted(obj, key=str)) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(x) for x in obj) + "]"
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist())
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(bool(obj) if obj is not None else None)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            raise ValueError(f"cannot encode non-finite float {x}")
        s = format(x, ".17g")
        return s if any(ch in s for ch in ".en") else s + ".0"
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj) -> str:
    return _encode(obj) + "\n"


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------- parsing helpers

def _budget(text: str):
    if text == UNTIL_CONVERGENCE:
        return UNTIL_CONVERGENCE
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--L must be a positive integer or {UNTIL_CONVERGENCE!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("--L must be at least 1")
    return value


def _probability(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= x <= 1.0:
        raise argparse.ArgumentTypeError("probabilities must lie in [0, 1]")
    return x


def _read_q(spec: str, k: int) -> tuple[float, ...] | str:
    """Scalar, ``solve``, or a file holding a JSON list or whitespace-separated numbers."""
    if spec == "solve":
        return spec
    if not Path(spec).is_file():
        try:
            return (_probability(spec),) * k
        except argparse.ArgumentTypeError as exc:
            raise UsageError(f"--q {spec!r}: {exc}; expected a probability, a file or 'solve'") from None
    text = Path(spec).read_text()
    try:
        values = json.loads(text)
        values = values if isinstance(values, list) else [values]
    except json.JSONDecodeError:
        values = text.split()
    try:
        q = tuple(_probability(str(v)) for v in values)
    except argparse.ArgumentTypeError as exc:
        raise UsageError(f"--q file {spec}: {exc}") from None
    if len(q) == 1:
        q = q * k
    if len(q) != k:
        raise UsageError(f"--q file has {len(q)} values for {k} components")
    return q


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("HYPERSYM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"HYPERSYM_THREADS must be an integer, got {env!r}") from None
    return 1


def _seed(args) -> int:
    if args.seed is None:
        if args.strict:
            raise UsageError(f"--strict requires --seed for {args.command}")
        return 0
    return args.seed


def _load(args) -> data.TemporalHypergraph:
    if not args.input:
        raise UsageError("--input is required")
    return data.load(args.input, args.format)


# --------------------------------------------------------------------------- subcommands

def cmd_validate(args) -> int:
    th = _load(args)
    h = th.hypergraph
    comps = connected_components(h)
    dual_ok = all(e in h.vertex_incidence[v] for e, edge in enumerate(h.edges) for v in edge) \
        and sum(len(x) for x in h.vertex_incidence) == h.nnz
    out = {"n": h.n, "m": h.m, "nnz": h.nnz, "dropped_singletons": th.dropped_small,
           "merged_duplicates": th.merged_duplicates, "connected": bool(h.n and is_connected(h)),
           "components": comps.count, "dual_index_consistent": dual_ok,
           "edge_size_max": int(h.edge_sizes.max()) if h.m else 0}
    _emit(dumps(out), args.output)
    if not dual_ok or (args.strict and (th.dropped_small or th.merged_duplicates)):
        return EXIT_FAIL
    return EXIT_OK


def cmd_refine(args) -> int:
    h = _load(args).hypergraph
    ch = gwl1(h, L=args.L)
    iters = []
    for i in range(ch.iterations + 1):
        edges: dict[int, list[int]] = {}
        for e, c in enumerate(ch.edges(i).tolist()):
            edges.setdefault(c, []).append(e)
        iters.append({"iteration": i,
                      "node_classes": sorted(color_classes(ch, i).values()),
                      "edge_classes": sorted(edges.values())})
    _emit(dumps({"L": args.L, "converged_at": ch.converged_at, "iterations": iters}), args.output)
    return EXIT_OK


def cmd_find(args) -> int:
    h = _load(args).hypergraph
    _emit(dumps(find_symmetries(h, L=args.L, guard=args.guard).to_dict()), args.output)
    return EXIT_OK


def _cover_times(th: data.TemporalHypergraph, report, added, g: Hypergraph) -> list[float]:
    """Kept hyperedges keep their time; a new cover gets its component's latest time."""
    when = dict(zip(th.hypergraph.edges, th.timestamps.tolist()))
    cover_time = {report.components[i].vertices: max(when[th.hypergraph.edges[e]]
                                                     for e in report.components[i].edge_ids)
                  for i in added if report.components[i].edge_ids}
    fallback = max(when.values(), default=0.0)
    return [when.get(e, cover_time.get(e, fallback)) for e in g.edges]


def cmd_augment(args) -> int:
    th = _load(args)
    h = th.hypergraph
    seed = _seed(args) if args.mode == "sample" else (args.seed or 0)
    report = find_symmetries(h, L=args.L, guard=args.guard)
    q = _read_q(args.q, len(report)) if args.mode == "sample" else (1.0,) * len(report)
    provenance: dict = {"mode": args.mode, "p": args.p if args.mode == "sample" else None, "seed": seed,
                        "L": args.L, "guard": args.guard,
                        "components": [list(c.vertices) for c in report.components]}
    if q == "solve":
        sol = solve_unbiased(h, report, args.p, seed=seed, allow_disconnected=not is_connected(h))
        if not sol.feasible:
            provenance["solve"] = {"feasible": False, "q": list(sol.q), "infeasible": list(sol.infeasible)}
            sys.stderr.write(dumps(provenance))
            log.error("no feasible attach probabilities at p=%s (components %s)", args.p, sol.infeasible)
            return EXIT_FAIL
        q = sol.q
        provenance["solve"] = {"feasible": True, "method": sol.method,
                               "max_abs_bias": float(np.abs(sol.bias).max())}
    plan = AugmentationPlan(args.p if args.mode == "sample" else 0.0, tuple(q), seed, args.mode)
    result = augment(h, report, plan)
    g = result.hypergraph
    provenance.update({"q": list(q), "dropped_edges": list(result.dropped_edges),
                       "added_covers": [list(report.components[i].vertices) for i in result.added_covers]})
    if args.samples:
        if args.mode != "sample":
            raise UsageError("--samples only applies to --mode sample")
        est = expected_stationary(h, report, plan, args.samples, workers=_threads(args),
                                  allow_disconnected=True)
        provenance["expected_stationary"] = {"mean": est.mean, "stderr": est.stderr, "samples": args.samples}
    out_th = data.TemporalHypergraph(g, _cover_times(th, report, result.added_covers, g),
                                     synthetic_times=th.synthetic_times)
    fmt = data.resolve_format(args.input, args.format)
    if fmt == "simplex":
        if not args.output:
            raise UsageError("simplex output needs --output PREFIX")
        data.write_simplex_files(out_th, args.output)
        Path(f"{args.output}-provenance.json").write_text(dumps(provenance))
    elif args.output:
        Path(args.output).write_text(dumps(data.to_json_obj(out_th)))
        Path(f"{args.output}.provenance.json").write_text(dumps(provenance))
    else:
        sys.stdout.write(dumps({"hypergraph": data.to_json_obj(out_th), "provenance": provenance}))
    return EXIT_OK


def cmd_split(args) -> int:
    th = _load(args)
    spec = data.SplitSpec(args.train_pct, args.val_pct, args.k, args.negative_ratio, _seed(args))
    _emit(dumps(data.temporal_split(th, spec).to_dict()), args.output)
    return EXIT_OK


def cmd_stats(args) -> int:
    if not args.input:
        raise UsageError("--input is required")
    paths = args.input
    hs, reports, names = [], [], []
    for p in paths:
        h = data.load(p, args.format).hypergraph
        hs.append(h)
        reports.append(find_symmetries(h, L=args.L, guard=args.guard))
        names.append(Path(p).name.removesuffix(".json"))
    _emit(statistics_csv(component_statistics(reports, hs, names)), args.output)
    return EXIT_OK


def cmd_verify(args) -> int:
    if not args.fixtures and not args.input:
        raise UsageError("verify needs --fixtures and/or --input")
    checks = []
    if args.fixtures:
        checks += suite.fixture_suite()
    if args.input:
        checks += suite.input_suite(_load(args).hypergraph)
    results = suite.run(checks)
    for c in results:
        print(c.line())
    failed = [c for c in results if not c.passed]
    if failed:
        sys.stdout.write(dumps({"counterexamples": [{"check": c.name, **(c.counterexample or {})}
                                                    for c in failed]}))
        return EXIT_FAIL
    return EXIT_OK


COMMANDS = {"validate": cmd_validate, "refine": cmd_refine, "find-symmetry": cmd_find,
            "augment": cmd_augment, "split": cmd_split, "stats": cmd_stats, "verify": cmd_verify}


def _add_common(p: argparse.ArgumentParser, many_inputs: bool = False) -> None:
    p.add_argument("--input", nargs="+" if many_inputs else None,
                   help="JSON file or simplex-list prefix" + (" (one or more)" if many_inputs else ""))
    p.add_argument("--format", choices=["auto", "json", "simplex"], default="auto")
    p.add_argument("--output", help="output path (default: stdout)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--strict", action="store_true", help="require explicit seeds; fail on dropped input")
    p.add_argument("--threads", type=int, default=None, help="worker cap (env HYPERSYM_THREADS)")
    p.add_argument("-v", "--verbose", action="count", default=0)


def _add_refinement(p: argparse.ArgumentParser) -> None:
    p.add_argument("--L", type=_budget, default=2, help=f"iterations or {UNTIL_CONVERGENCE!r}")
    p.add_argument("--guard", action=argparse.BooleanOptionalAction, default=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hypersym", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    _add_common(sub.add_parser("validate", help="check and summarise an input hypergraph"))

    r = sub.add_parser("refine", help="GWL-1 colour classes per iteration")
    _add_common(r)
    r.add_argument("--L", type=_budget, default=UNTIL_CONVERGENCE, help=f"iterations or {UNTIL_CONVERGENCE!r}")

    f = sub.add_parser("find-symmetry", help="symmetric components as JSON")
    _add_common(f)
    _add_refinement(f)

    a = sub.add_parser("augment", help="attach, replace or sample covers")
    _add_common(a)
    _add_refinement(a)
    a.add_argument("--mode", choices=["attach", "replace", "sample"], default="attach")
    a.add_argument("--p", type=_probability, default=0.0, help="drop probability (sample mode)")
    a.add_argument("--q", default="1.0", help="attach probability: scalar, file, or 'solve'")
    a.add_argument("--samples", type=int, default=0, help="also estimate the expected stationary distribution")

    s = sub.add_parser("split", help="temporal link-prediction split")
    _add_common(s)
    s.add_argument("--k", type=int, default=3)
    s.add_argument("--train-pct", type=float, default=0.80)
    s.add_argument("--val-pct", type=float, default=0.85)
    s.add_argument("--negative-ratio", type=float, default=1.0)

    st = sub.add_parser("stats", help="component statistics CSV")
    _add_common(st, many_inputs=True)
    _add_refinement(st)

    v = sub.add_parser("verify", help="run the oracle checks")
    _add_common(v)
    v.add_argument("--fixtures", action="store_true", help="run over the built-in fixture corpus")
    return parser


_MODE_NAMES = {"attach": "attach_only", "replace": "replace", "sample": "sample"}


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "augment":
        args.mode = _MODE_NAMES[args.mode]
        assert args.mode in MODES
    try:
        return COMMANDS[args.command](args)
    except (UsageError, OSError, data.DataFormatError, HypergraphError, DisconnectedError, ValueError) as exc:
        sys.stderr.write(f"hypersym {args.command}: {exc}\n")
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())
