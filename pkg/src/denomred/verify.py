"""Self-check suites behind ``denomred verify`` and the acceptance tests.

Every check returns a :class:`Check`; a suite is a list of them.  Nothing
here reads the clock or depends on thread scheduling, so a report is a pure
function of the level (and of the code).
"""

from __future__ import annotations

import json
import random
from itertools import combinations
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple

from .counting import (
    count_factored,
    cw_congruence,
    load_calibration,
    smoothness_shadow,
    trace_count_shadow,
)
from .dodgson import dodgson, psi, psi_from_trees, three_valent_data
from .graph import Graph, build_graph, cycle, g8, iter_graphs, minor, wheel
from .reduction import compare_trace, dump_trace, run_reduction

GOLDEN = Path(__file__).parent / "data" / "golden"
GOLDEN_FILES = {
    "wheel3": (lambda: run_reduction(wheel(3)), True),
    "wheel4": (lambda: run_reduction(wheel(4)), True),
    "wheel5": (lambda: run_reduction(wheel(5)), True),
    "g8_prefix11": (lambda: run_reduction(g8(), stop=11), False),
}


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'}  {self.name}" + (f"  [{self.detail}]" if self.detail else "")


# random inputs


def random_graph(rng: random.Random, max_edges: int, min_edges: int = 1, max_vertices: Optional[int] = None) -> Graph:
    """Connected tadpole-free multigraph: a random spanning tree plus extra edges."""
    n_edges = rng.randint(min_edges, max_edges)
    top = n_edges + 1 if max_vertices is None else min(max_vertices, n_edges + 1)
    nv = rng.randint(2, max(2, top))
    pairs = [(rng.randint(1, v - 1), v) for v in range(2, nv + 1)]
    while len(pairs) < n_edges:
        u, v = rng.sample(range(1, nv + 1), 2)
        pairs.append((u, v))
    rng.shuffle(pairs)
    pairs = [(v, u) if rng.random() < 0.5 else (u, v) for u, v in pairs]
    return build_graph(pairs)


def random_loop_graph(rng: random.Random, min_edges: int, max_edges: int) -> Graph:
    """Random connected graph whose every edge lies on a cycle (no bridges)."""
    while True:
        g = random_graph(rng, max_edges, min_edges)
        if psi(g) and all(dodgson(g, (e,), (e,)) for e in g.edge_ids) and g.loop_number >= 2:
            return g


def is_simple(g: Graph) -> bool:
    return len({tuple(sorted((u, v))) for u, v, _ in g.edges}) == g.num_edges


def is_three_edge_connected(g: Graph) -> bool:
    ids = g.edge_ids
    if not all(minor(g, [e]).is_connected() for e in ids):
        return False
    return all(minor(g, [a, b]).is_connected() for a, b in combinations(ids, 2))


def random_simple_3ec_graph(rng: random.Random, min_edges: int, max_edges: int) -> Graph:
    """Random simple 3-edge-connected graph (rejection sampling)."""
    while True:
        g = random_graph(rng, max_edges, min_edges)
        if is_simple(g) and is_three_edge_connected(g):
            return g


def _sample_disjoint(rng, pool, k):
    return tuple(rng.sample(pool, k))


def contraction_deletion_instance(rng: random.Random, g: Graph) -> Tuple[Tuple[int, ...], Tuple[int, ...], Tuple[int, ...], int]:
    edges = list(g.edge_ids)
    size = rng.randint(0, min(2, len(edges) - 1))
    i = _sample_disjoint(rng, edges, size)
    j = _sample_disjoint(rng, edges, size)
    rest = [e for e in edges if e not in set(i) | set(j)]
    if not rest:
        return contraction_deletion_instance(rng, g)
    e = rng.choice(rest)
    rest.remove(e)
    k = _sample_disjoint(rng, rest, rng.randint(0, min(2, len(rest))))
    return i, j, k, e


def check_contraction_deletion(g: Graph, i, j, k, e) -> bool:
    f = dodgson(g, i, j, k)
    return (
        f.degree(e) <= 1
        and f.coefficient(e, 1) == dodgson(g, i + (e,), j + (e,), k)
        and f.coefficient(e, 0) == dodgson(g, i, j, k + (e,))
    )


def dodgson_identity_instance(rng: random.Random, g: Graph):
    edges = list(g.edge_ids)
    if len(edges) < 3:
        raise ValueError("the Dodgson identity needs three edges")
    x, a, b = rng.sample(edges, 3)
    rest = [e for e in edges if e not in (x, a, b)]
    size = rng.randint(0, min(1, len(rest)))
    i = _sample_disjoint(rng, rest, size)
    j = _sample_disjoint(rng, rest, size)
    left = [e for e in rest if e not in set(i) | set(j)]
    k = _sample_disjoint(rng, left, rng.randint(0, min(2, len(left))))
    return i, j, k, x, a, b


def check_dodgson_identity(g: Graph, i, j, k, x, a, b) -> bool:
    kx = k + (x,)
    lhs = dodgson(g, i + (x,), j + (x,), k) * dodgson(g, i + (a,), j + (b,), kx) - dodgson(g, i, j, kx) * dodgson(
        g, i + (a, x), j + (b, x), k
    )
    rhs = dodgson(g, i + (x,), j + (b,), k) * dodgson(g, i + (a,), j + (x,), k)
    return lhs == rhs


def catalog_graphs() -> List[Graph]:
    return [wheel(3), wheel(4), wheel(5), cycle(3), cycle(4), g8()]


def check_vertex_data(g: Graph, v: int) -> bool:
    d = three_valent_data(g, v)
    f0, f1, f2, f3, f123 = d.f0, d.f1, d.f2, d.f3, d.f123
    return d.psi_structure() == psi(g) and f0 * f123 == f1 * f2 + f1 * f3 + f2 * f3


def cw_random_graphs(count: int, seed: int, max_edges: int = 9) -> List[Graph]:
    """Random graphs with loop number between 1 and ``N - 1``."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        g = random_graph(rng, max_edges, min_edges=2)
        if 1 <= g.loop_number <= g.num_edges - 1:
            out.append(g)
    return out


# suites


def _oracle_exhaustive(max_edges: int) -> Check:
    n = bad = 0
    for g in iter_graphs(max_edges):
        n += 1
        if psi(g) != psi_from_trees(g):
            bad += 1
    return Check(f"determinant = tree sum, all graphs <= {max_edges} edges", bad == 0, f"{n} graphs, {bad} failures")


def _oracle_random(count: int, max_edges: int, seed: int) -> Check:
    rng = random.Random(seed)
    bad = 0
    for _ in range(count):
        g = random_graph(rng, max_edges)
        if psi(g) != psi_from_trees(g):
            bad += 1
    return Check(f"determinant = tree sum, {count} random graphs <= {max_edges} edges", bad == 0, f"{bad} failures")


def _identities(count: int, seed: int) -> List[Check]:
    rng = random.Random(seed)
    cd_bad = dg_bad = 0
    for _ in range(count):
        g = random_graph(rng, 8, min_edges=3)
        if not check_contraction_deletion(g, *contraction_deletion_instance(rng, g)):
            cd_bad += 1
        if not check_dodgson_identity(g, *dodgson_identity_instance(rng, g)):
            dg_bad += 1
    out = [
        Check(f"contraction-deletion, {count} random instances", cd_bad == 0, f"{cd_bad} failures"),
        Check(f"Dodgson identity, {count} random instances", dg_bad == 0, f"{dg_bad} failures"),
    ]
    return out


def _vertices(graphs: Sequence[Graph]) -> Check:
    n = bad = 0
    for g in graphs:
        for v in g.vertices:
            if g.degree(v) == 3 and len(g.incident(v)) == 3:
                n += 1
                try:
                    ok = check_vertex_data(g, v)
                except AssertionError:
                    ok = False
                bad += not ok
    return Check("3-valent vertex structure and identity", bad == 0, f"{n} vertices, {bad} failures")


def golden_check(name: str, golden_dir: Optional[Path] = None) -> Check:
    path = (GOLDEN if golden_dir is None else Path(golden_dir)) / f"{name}.json"
    if not path.exists():
        return Check(f"golden trace {name}", False, f"missing {path.name}")
    build, _ = GOLDEN_FILES[name]
    problems = compare_trace(build(), path.read_text())
    return Check(f"golden trace {name}", not problems, "; ".join(problems))


def write_goldens(golden_dir: Optional[Path] = None) -> List[Path]:
    out_dir = GOLDEN if golden_dir is None else Path(golden_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, (build, expand) in GOLDEN_FILES.items():
        path = out_dir / f"{name}.json"
        path.write_text(dump_trace(build(), expand))
        paths.append(path)
    return paths


def _terminal_wheels(ns: Sequence[int], primes: Sequence[int], workers) -> Check:
    bad = []
    for n in ns:
        t = run_reduction(wheel(n))
        d = t.last.denominator
        vs = [v for v in wheel(n).edge_ids if v not in t.order[: len(t.steps)]]
        for p in primes:
            c = count_factored(d, vs, p, True, None, workers)
            if c != 2:
                bad.append(f"wheel({n}) p={p}: {c}")
    return Check(f"terminal count 2 for wheels {list(ns)}", not bad, "; ".join(bad))


def _shadows(primes: Sequence[int], workers, include_g8: bool) -> List[Check]:
    cal = load_calibration()
    out = []
    traces = [("wheel(4)", run_reduction(wheel(4)))]
    if include_g8:
        traces.append(("g8 k=5..10", run_reduction(g8(), stop=11)))
    for name, t in traces:
        rep = trace_count_shadow(t, primes, start=5, calibration=cal, workers=workers)
        failed = [k for k, ok in rep.verdicts.items() if not ok]
        out.append(Check(f"count shadow {name}", bool(rep.verdicts) and not failed,
                         f"{len(rep.verdicts)} pairs" + (f", failed {failed}" if failed else "")))
    return out


def _smoothness(primes: Sequence[int]) -> Check:
    bad = []
    n = 0
    for g in (wheel(3), wheel(4)):
        for p in primes:
            ok, pts = smoothness_shadow(g, 1, p)
            n += 1
            if not ok:
                bad.append(f"{g.name} p={p}")
    return Check("smoothness shadow wheel(3), wheel(4), e=1", not bad, f"{n} cases" + ("; " + ", ".join(bad) if bad else ""))


def _chevalley_warning(graphs: Sequence[Graph], primes: Sequence[int], workers) -> Check:
    bad = []
    for g in graphs:
        for p in primes:
            holds, count, _ = cw_congruence(g, p, workers=workers)
            if not holds:
                bad.append(f"{g.name or g.pairs()} p={p}: {count}")
    return Check(f"Chevalley-Warning shadow, {len(graphs)} graphs, p in {list(primes)}", not bad, "; ".join(bad))


def _pipeline(workers) -> List[Check]:
    from .g8pipeline import run_pipeline

    rep = run_pipeline((2, 3, 5, 7, 11, 13), workers=workers)
    return [Check(f"g8: {name}", ok) for name, ok in rep.checks.items()]


def run_suite(level: str = "quick", workers: Optional[int] = None, progress: Optional[Callable[[Check], None]] = None) -> List[Check]:
    if level not in ("quick", "full"):
        raise ValueError(f"unknown level {level!r}")
    checks: List[Check] = []

    def add(c):
        for item in c if isinstance(c, list) else [c]:
            checks.append(item)
            if progress is not None:
                progress(item)

    add(_oracle_exhaustive(6))
    add(_identities(200 if level == "full" else 30, seed=1))
    add(_vertices(catalog_graphs() if level == "full" else [wheel(3), wheel(4)]))
    add(golden_check("wheel3"))
    if level == "full":
        add(_oracle_random(300, 9, seed=2))
        for name in ("wheel4", "wheel5", "g8_prefix11"):
            add(golden_check(name))
        add(_terminal_wheels((3, 4, 5), (2, 3, 5), workers))
        add(_shadows((2, 3), workers, include_g8=True))
        add(_smoothness((2, 3)))
        add(_chevalley_warning(catalog_graphs() + cw_random_graphs(20, seed=3), (2, 3, 5), workers))
        add(_pipeline(workers))
    return checks


def format_report(checks: Sequence[Check], structured: bool = False) -> str:
    if structured:
        doc = {
            "checks": [{"name": c.name, "ok": c.ok, "detail": c.detail} for c in checks],
            "passed": all(c.ok for c in checks),
        }
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"
    lines = [c.line() for c in checks]
    failed = sum(not c.ok for c in checks)
    lines.append(f"{len(checks) - failed}/{len(checks)} checks passed")
    return "\n".join(lines) + "\n"
