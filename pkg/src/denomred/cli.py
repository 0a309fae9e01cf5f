"""Command line: ``denomred <command> [graph source] [options]``.

Exit status is 0 on success, 1 when a verification fails or a computation
gives up, 2 on bad usage or bad input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from . import errors
from .counting import count_projective, cw_congruence
from .dodgson import dodgson, psi
from .graph import Graph, build_graph, catalog, parse_graph_text, parse_two_digit
from .poly import format_poly
from .reduction import DEFAULT_BUDGET, SHORT_KIND, classify, predict_weight, run_reduction, trace_document

INPUT_ERRORS = (
    errors.UnknownName,
    errors.ParseError,
    errors.BadKey,
    errors.InactiveEdge,
    errors.TadpoleEdge,
    errors.EmptyGraph,
    errors.Disconnected,
    errors.PrimeRequired,
    errors.PreconditionViolated,
    errors.DegreeTooLarge,
)


class UsageError(Exception):
    pass


def _int_list(text: str) -> List[int]:
    text = text.strip()
    if text in ("", "-"):
        return []
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _default_budget() -> int:
    raw = os.environ.get("DENOMRED_BUDGET")
    if raw is None:
        return DEFAULT_BUDGET
    try:
        return _positive(raw)
    except argparse.ArgumentTypeError:
        raise UsageError(f"DENOMRED_BUDGET must be a positive integer, got {raw!r}") from None


def _add_graph(p: argparse.ArgumentParser) -> None:
    src = p.add_argument_group("graph source (exactly one)")
    src.add_argument("--catalog", metavar="NAME", help="wheel, cycle or g8")
    src.add_argument("--n", type=_positive, help="size parameter for --catalog")
    src.add_argument("--graph", metavar="FILE", help="file with one 'u v' edge per line")
    src.add_argument("--two-digit", metavar="EDGES", help="edges as two-digit tokens, e.g. 12,23,31")


def _add_format(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("text", "structured"), default="text")


def _graph(args) -> Graph:
    given = [x for x in (args.catalog, args.graph, args.two_digit) if x is not None]
    if len(given) != 1:
        raise UsageError("give exactly one of --catalog, --graph, --two-digit")
    if args.n is not None and args.catalog is None:
        raise UsageError("--n only applies to --catalog")
    if args.catalog is not None:
        return catalog(args.catalog, args.n)
    if args.graph is not None:
        path = Path(args.graph)
        if not path.exists():
            raise UsageError(f"--graph: no such file {args.graph}")
        g = parse_graph_text(path.read_text())
        return Graph(g.num_vertices, g.edges, g.removed, path.stem)
    return build_graph(parse_two_digit(args.two_digit), name="graph")


def _emit(args, text: str, doc: dict) -> None:
    if args.format == "structured":
        sys.stdout.write(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _graph_doc(g: Graph) -> dict:
    return {"name": g.name, "edges": [[u, v] for u, v, _ in g.edges]}


# commands


def cmd_psi(args) -> int:
    g = _graph(args)
    f = psi(g)
    _emit(args, format_poly(f), {"command": "psi", "graph": _graph_doc(g), "psi": format_poly(f), "terms": len(f)})
    return 0


def cmd_dodgson(args) -> int:
    g = _graph(args)
    f = dodgson(g, args.I, args.J, args.K)
    doc = {"command": "dodgson", "graph": _graph_doc(g), "I": args.I, "J": args.J, "K": args.K, "poly": format_poly(f)}
    _emit(args, format_poly(f), doc)
    return 0


def _trace_text(t) -> str:
    lines = [f"graph {t.graph.name or 'graph'}, order {','.join(map(str, t.order))}"]
    for m, s in enumerate(t.all_steps, start=1):
        body = format_poly(s.poly) if s.defined else "undefined"
        lines.append(f"D{m}  a{s.variable}  {s.kind:<11} {body}")
    last = t.last
    if last.defined and len(last.poly.variables()) == 2:
        x, y = last.poly.variables()
        lines.append(f"terminal bidegree ({last.poly.degree(x)},{last.poly.degree(y)})")
    lines.append("kinds " + ",".join(SHORT_KIND[k] for k in t.kinds))
    lines.append(f"status {t.status}")
    return "\n".join(lines)


def cmd_reduce(args) -> int:
    g = _graph(args)
    t = run_reduction(g, args.order, stop=args.stop)
    doc = trace_document(t)
    doc["command"] = "reduce"
    _emit(args, _trace_text(t), doc)
    return 0


def cmd_classify(args) -> int:
    g = _graph(args)
    budget = args.budget if args.budget is not None else _default_budget()
    try:
        c = classify(g, budget)
    except errors.BudgetExhausted as exc:
        sys.stderr.write(f"search budget {budget} exhausted after {exc.visited} states; best: {exc.best.describe()}\n")
        return 1
    label = predict_weight(c, g, strict=False)
    doc = {
        "command": "classify",
        "graph": _graph_doc(g),
        "verdict": c.verdict,
        "witness": list(c.witness) if c.witness else None,
        "depth": c.depth,
        "visited": c.visited,
        "weight": label,
    }
    _emit(args, c.describe() + f"\nweight: {label}", doc)
    return 0


def cmd_count(args) -> int:
    g = _graph(args)
    rows, doc_rows = [], []
    ok = True
    for p in args.primes:
        if args.budget is not None or g.loop_number == 0:
            count = count_projective([psi(g)], g.edge_ids, p, args.budget, args.threads)
            holds = None
        else:
            holds, count, _ = cw_congruence(g, p, workers=args.threads)
            ok &= holds
        rows.append(f"p={p}  |X_G(F_p)| = {count}" + ("" if holds is None else f"  mod p: {count % p} ({'ok' if holds else 'FAIL'})"))
        doc_rows.append({"p": p, "count": count, "congruence": holds})
    doc = {"command": "count", "graph": _graph_doc(g), "ambient_dimension": g.num_edges - 1, "counts": doc_rows}
    _emit(args, "\n".join(rows), doc)
    return 0 if ok else 1


def cmd_verify(args) -> int:
    from .verify import format_report, run_suite

    checks = run_suite(args.level, workers=args.threads)
    sys.stdout.write(format_report(checks, structured=args.format == "structured"))
    return 0 if all(c.ok for c in checks) else 1


def cmd_g8(args) -> int:
    from .g8pipeline import run_pipeline

    rep = run_pipeline(args.primes, outdir=Path(args.outdir) if args.outdir else None, workers=args.threads)
    if args.format == "structured":
        sys.stdout.write(rep.dumps())
    else:
        sys.stdout.write(rep.text())
    return 0 if rep.ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="denomred", description="Graph polynomials and denominator reduction.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("psi", help="print the graph polynomial")
    _add_graph(p)
    _add_format(p)
    p.set_defaults(func=cmd_psi)

    p = sub.add_parser("dodgson", help="print a Dodgson polynomial")
    p.add_argument("I", type=_int_list, help="row edges, comma-separated ('-' for none)")
    p.add_argument("J", type=_int_list, help="column edges")
    p.add_argument("K", type=_int_list, nargs="?", default=[], help="edges set to zero")
    _add_graph(p)
    _add_format(p)
    p.set_defaults(func=cmd_dodgson)

    p = sub.add_parser("reduce", help="run the denominator reduction")
    _add_graph(p)
    p.add_argument("--order", type=_int_list, help="edge order, default ascending ids")
    p.add_argument("--stop", type=_positive, help="stop after this many steps")
    _add_format(p)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("classify", help="search for a reducing order")
    _add_graph(p)
    p.add_argument("--budget", type=_positive, help="orders to try (default $DENOMRED_BUDGET or %d)" % DEFAULT_BUDGET)
    _add_format(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("count", help="count points of the graph hypersurface")
    _add_graph(p)
    p.add_argument("--primes", type=_int_list, default=[2, 3, 5])
    p.add_argument("--budget", type=_positive, help="maximum number of evaluations")
    p.add_argument("--threads", type=_positive)
    _add_format(p)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("verify", help="run the self-check suites")
    p.add_argument("--level", choices=("quick", "full"), default="quick")
    p.add_argument("--threads", type=_positive)
    _add_format(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("g8", help="the G8 pipeline from D11 to the modularity probe")
    p.add_argument("--primes", type=_int_list, default=[2, 3, 5, 7, 11, 13])
    p.add_argument("--outdir", help="write every intermediate polynomial here")
    p.add_argument("--threads", type=_positive)
    _add_format(p)
    p.set_defaults(func=cmd_g8)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except INPUT_ERRORS as exc:
        sys.stderr.write(f"denomred: error: {type(exc).__name__}: {exc}\n")
        return 2
    except errors.DenomRedError as exc:
        sys.stderr.write(f"denomred: {type(exc).__name__}: {exc}\n")
        return 1
    except ValueError as exc:
        sys.stderr.write(f"denomred: error: {exc}\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
