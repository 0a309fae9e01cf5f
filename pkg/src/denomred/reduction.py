"""Denominator reduction, the five-invariant, ordering search and weight labels.

A denominator is carried as a product ``c * prod f_i ** e_i`` of sign-normalised
factors.  One elimination step in ``x`` only looks at the factors that involve
``x``; everything else rides along untouched, so ``Psi**2`` and its successors
are never expanded.  :func:`reduce_step` is the expanded reference version and
the two are tested against each other.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .dodgson import dodgson, psi
from .errors import BudgetExhausted, DegreeTooHigh, OddHalving, PreconditionViolated
from .graph import Graph
from .poly import (
    Poly,
    decompose_quadratic,
    format_poly,
    parse_poly,
    poly_sqrt,
    resultant_linear,
    split_content,
    split_linear,
    unpack,
)

GENERIC = "generic"
WEIGHT_DROP = "weight-drop"
ZERO = "zero"
UNDEFINED = "undefined-stop"

SHORT_KIND = {GENERIC: "G", WEIGHT_DROP: "WD", ZERO: "Z", UNDEFINED: "U"}

DEFAULT_BUDGET = int(os.environ.get("DENOMRED_BUDGET", "20000"))


def _halve(b: Poly) -> Poly:
    try:
        return b.div_int(2)
    except Exception as exc:  # NotDivisible
        raise OddHalving("middle coefficient is not divisible by 2") from exc


@dataclass(frozen=True)
class Factored:
    """``constant * prod(f ** e for f, e in factors)``.

    Factors are primitive, have positive leading coefficient and are sorted;
    single variables appear as their own factors.
    """

    constant: int
    factors: Tuple[Tuple[Poly, int], ...] = ()

    @classmethod
    def of(cls, constant: int, pieces: Iterable[Tuple[Poly, int]]) -> "Factored":
        """Normalise raw ``(poly, exponent)`` pieces."""
        powers: Dict[Poly, int] = {}
        for p, e in pieces:
            if e == 0:
                continue
            if not p:
                return cls(0, ())
            c, mono, prim = split_content(p)
            constant *= c ** e
            for v, k in unpack(mono):
                x = Poly.var(v)
                powers[x] = powers.get(x, 0) + k * e
            if not prim.is_constant():
                root = poly_sqrt(prim)
                if root is not None and not root.is_constant():
                    powers[root] = powers.get(root, 0) + 2 * e
                else:
                    powers[prim] = powers.get(prim, 0) + e
        if constant == 0:
            return cls(0, ())
        # the sign lives in the constant; every factor already leads positively
        items = tuple(sorted(powers.items(), key=lambda t: (t[0].total_degree(), format_poly(t[0]))))
        return cls(constant, items)

    @classmethod
    def from_poly(cls, p: Poly) -> "Factored":
        return cls.of(1, [(p, 1)])

    def expand(self) -> Poly:
        out = Poly.constant(self.constant)
        for f, e in self.factors:
            out = out * f ** e
        return out

    def is_zero(self) -> bool:
        return self.constant == 0

    def degree(self, x: int) -> int:
        if self.is_zero():
            return -1
        return sum(f.degree(x) * e for f, e in self.factors)

    def variables(self) -> Tuple[int, ...]:
        vs = set()
        for f, _ in self.factors:
            vs.update(f.variables())
        return tuple(sorted(vs))

    def normalized(self) -> "Factored":
        return Factored(abs(self.constant), self.factors)

    def total_degree(self) -> int:
        return sum(f.total_degree() * e for f, e in self.factors)


@dataclass(frozen=True)
class ReductionStep:
    variable: int
    kind: str
    denominator: Optional[Factored]

    @cached_property
    def poly(self) -> Optional[Poly]:
        """``D_m`` expanded (``None`` when the step is undefined)."""
        if self.denominator is None:
            return None
        return self.denominator.expand()

    @property
    def defined(self) -> bool:
        return self.kind in (GENERIC, WEIGHT_DROP, ZERO)


def reduce_step(d: Poly, x: int) -> ReductionStep:
    """Eliminate ``a<x>`` from the expanded denominator ``d``."""
    if not d:
        raise ValueError("cannot reduce the zero polynomial")
    a, b, c = decompose_quadratic(d, x)
    delta = b * b - 4 * (a * c)
    if not delta:
        out = _halve(b).normalized()
        kind = WEIGHT_DROP
    else:
        root = poly_sqrt(delta)
        if root is None:
            return ReductionStep(x, UNDEFINED, None)
        out = root
        kind = GENERIC
    if not out:
        kind = ZERO
    return ReductionStep(x, kind, Factored.from_poly(out).normalized() if out else Factored(0))


def reduce_factored(d: Factored, x: int) -> ReductionStep:
    """Same result as :func:`reduce_step` on ``d.expand()``, without expanding."""
    if d.is_zero():
        raise ValueError("cannot reduce the zero polynomial")
    deg = d.degree(x)
    if deg > 2:
        raise DegreeTooHigh(x, deg)
    rest = [(f, e) for f, e in d.factors if x not in f.variables()]
    hit = [(f, e) for f, e in d.factors if x in f.variables()]
    const = d.constant
    if deg <= 0:
        return ReductionStep(x, ZERO, Factored(0))
    if len(hit) == 1 and hit[0][1] == 1 and deg == 1:
        # h * (f^1 x + f_1): discriminant (h f^1)^2, root h f^1
        f1, _ = split_linear(hit[0][0], x)
        out = Factored.of(const, rest + [(f1, 1)])
        return ReductionStep(x, GENERIC, out.normalized())
    if len(hit) == 1 and hit[0][1] == 2:
        f1, f0 = split_linear(hit[0][0], x)
        out = Factored.of(const, rest + [(f1, 1), (f0, 1)])
        kind = ZERO if out.is_zero() else WEIGHT_DROP
        return ReductionStep(x, kind, out.normalized())
    if len(hit) == 2:
        (f, _), (g, _) = hit
        br = resultant_linear(f, g, x)
        if br:
            out = Factored.of(const, rest + [(br, 1)])
            return ReductionStep(x, GENERIC, out.normalized())
        # proportional factors: the product is a square up to a constant
        f1, f0 = split_linear(f, x)
        g1, g0 = split_linear(g, x)
        mid = f1 * g0 + f0 * g1
        return _drop_from_middle(x, const, rest, mid)
    (q, _), = hit
    a, b, c = decompose_quadratic(q, x)
    delta = b * b - 4 * (a * c)
    if not delta:
        return _drop_from_middle(x, const, rest, b)
    root = poly_sqrt(delta)
    if root is None:
        return ReductionStep(x, UNDEFINED, None)
    out = Factored.of(const, rest + [(root, 1)])
    return ReductionStep(x, GENERIC, out.normalized())


def _drop_from_middle(x: int, const: int, rest: List[Tuple[Poly, int]], mid: Poly) -> ReductionStep:
    # D = const * h * mid / 2, halved as a whole
    if const % 2 == 0:
        out = Factored.of(const // 2, rest + [(mid, 1)])
    else:
        out = Factored.of(const, rest + [(_halve(mid), 1)])
    kind = ZERO if out.is_zero() else WEIGHT_DROP
    return ReductionStep(x, kind, out.normalized())


@dataclass(frozen=True)
class ReductionTrace:
    """``D_0 = Psi**2`` followed by one step per eliminated edge.

    ``steps`` runs up to ``D_{N-2}`` (two variables left, the usual stopping
    point for periods); ``closing`` is the optional elimination that produces
    ``D_{N-1}``.  ``denominators`` lists every recorded ``D_m``.
    """

    graph: Graph
    order: Tuple[int, ...]
    d0: Factored
    steps: Tuple[ReductionStep, ...]
    closing: Optional[ReductionStep] = None

    @property
    def all_steps(self) -> Tuple[ReductionStep, ...]:
        return self.steps + ((self.closing,) if self.closing is not None else ())

    @property
    def kinds(self) -> Tuple[str, ...]:
        return tuple(s.kind for s in self.steps)

    @property
    def last(self) -> ReductionStep:
        return self.steps[-1]

    @property
    def status(self) -> str:
        full = self.all_steps
        if not full:
            return "empty"
        if full[-1].kind == UNDEFINED:
            return f"undefined at {len(full)}"
        if full[-1].kind == ZERO:
            return f"zero at {len(full)}"
        if len(full) == self.graph.num_edges - 1:
            return "complete"
        return f"stopped at {len(full)}"

    @property
    def depth(self) -> int:
        """Largest ``m`` with ``D_m`` defined."""
        return sum(1 for s in self.all_steps if s.defined)

    def denominator(self, m: int) -> Factored:
        if m == 0:
            return self.d0
        step = self.all_steps[m - 1]
        if step.denominator is None:
            raise IndexError(f"D_{m} is not defined")
        return step.denominator

    @property
    def denominators(self) -> List[Factored]:
        return [self.d0] + [s.denominator for s in self.all_steps if s.defined]

    @property
    def complete(self) -> bool:
        return self.status == "complete"

    @property
    def weight_drop(self) -> bool:
        """A square at some ``m >= 4`` or a vanishing denominator."""
        for m, s in enumerate(self.all_steps, start=1):
            if s.kind == ZERO or (s.kind == WEIGHT_DROP and m >= 4):
                return True
        return False


def _check_order(g: Graph, order: Sequence[int]) -> Tuple[int, ...]:
    order = tuple(order)
    ids = set(g.edge_ids)
    if len(set(order)) != len(order):
        raise ValueError("ordering repeats an edge")
    bad = [e for e in order if e not in ids]
    if bad:
        raise ValueError(f"edges {bad} are not active edges")
    return order


def _start(g: Graph) -> Factored:
    return Factored.of(1, [(psi(g), 2)])


def _advance(d: Factored, x: int) -> ReductionStep:
    return reduce_factored(d, x)


def run_reduction(g: Graph, order: Optional[Sequence[int]] = None, stop: Optional[int] = None) -> ReductionTrace:
    """Eliminate edges in ``order`` (default: ascending ids).

    Stops at an undefined step, a zero denominator, after ``stop`` steps, or
    when variables run out (``N - 1`` eliminations).  An ordering shorter than
    ``N - 1`` is simply a prefix.
    """
    if not g.is_connected():
        raise PreconditionViolated("reduction needs a connected graph")
    if g.num_edges < 3:
        raise PreconditionViolated("reduction needs at least 3 edges")
    order = _check_order(g, g.edge_ids if order is None else order)
    limit = g.num_edges - 1
    if stop is not None:
        limit = min(limit, stop)
    d = _start(g)
    done: List[ReductionStep] = []
    for x in order[:limit]:
        s = _advance(d, x)
        done.append(s)
        if s.kind in (UNDEFINED, ZERO):
            break
        d = s.denominator
    n2 = g.num_edges - 2
    if len(done) > n2:
        return ReductionTrace(g, order, _start(g), tuple(done[:n2]), done[n2])
    return ReductionTrace(g, order, _start(g), tuple(done), None)


# five-invariant


def four_invariant(g: Graph, edges: Sequence[int]) -> Tuple[Poly, Poly]:
    """The two Dodgson factors of ``D_4`` for edges ``1, 2, 3, 4``."""
    e1, e2, e3, e4 = edges
    return dodgson(g, (e1, e2), (e3, e4)), dodgson(g, (e1, e3), (e2, e4))


def five_invariant(g: Graph, edges: Sequence[int]) -> Poly:
    """``[ [Psi^{13,23}, Psi^{1,2}_3]_4 ]_5`` for five distinct edges, sign-normalised."""
    edges = tuple(edges)
    if len(set(edges)) != 5:
        raise ValueError("five distinct edges are needed")
    if not g.is_connected():
        raise PreconditionViolated("five-invariant needs a connected graph")
    e1, e2, e3, e4, e5 = edges
    f = dodgson(g, (e1, e3), (e2, e3))
    h = dodgson(g, (e1,), (e2,), (e3,))
    d4 = resultant_linear(f, h, e4)
    if not d4:
        return d4
    a, b = four_invariant(g, (e1, e2, e3, e4))
    if a * b == d4 or a * b == -d4:
        return resultant_linear(a, b, e5).normalized()
    # no Dodgson factorisation; fall back to the square root of the discriminant
    root = reduce_step(d4, e5)
    if root.kind != GENERIC:
        return Poly.zero()
    return root.poly


# classification

REDUCIBLE = "denominator-reducible"
DROP = "weight-drop"
STUCK = "stuck"


@dataclass(frozen=True)
class Classification:
    verdict: str
    witness: Tuple[int, ...]
    depth: int
    reducible: bool
    weight_drop: bool
    visited: int
    label: str = ""

    def describe(self) -> str:
        if self.verdict == STUCK:
            return f"stuck({self.depth})"
        return self.verdict


def classify(g: Graph, search_budget: Optional[int] = None) -> Classification:
    """Depth-first search over elimination orders.

    Branches are tried in ascending edge order; the first complete ordering
    found is the witness, so ties go to the lexicographically smallest.  A
    set of eliminated edges is marked dead once every continuation from one
    representative order has failed; this is a pruning heuristic and the
    witness is re-run from scratch before it is reported.
    """
    budget = DEFAULT_BUDGET if search_budget is None else search_budget
    if budget <= 0:
        raise ValueError("search budget must be positive")
    if not g.is_connected():
        raise PreconditionViolated("classification needs a connected graph")
    n = g.num_edges
    if n < 3:
        raise PreconditionViolated("classification needs at least 3 edges")
    ids = g.edge_ids
    if n <= 4:
        small = _small_case(g)
        if small is not None:
            return small
    dead = set()
    state = {"visited": 0, "best": (0, ()), "drop": False, "drop_order": None}

    def search(prefix: Tuple[int, ...], d: Factored) -> Optional[Tuple[int, ...]]:
        if len(prefix) == n - 1:
            return prefix
        key = frozenset(prefix)
        if key in dead:
            return None
        for x in ids:
            if x in key:
                continue
            state["visited"] += 1
            if state["visited"] > budget:
                raise BudgetExhausted(_best(state), state["visited"] - 1)
            s = _advance(d, x)
            m = len(prefix) + 1
            if s.kind == ZERO or (s.kind == WEIGHT_DROP and m >= 4):
                state["drop"] = True
                if state["drop_order"] is None:
                    state["drop_order"] = prefix + (x,)
            if not s.defined:
                continue
            if m > state["best"][0]:
                state["best"] = (m, prefix + (x,))
            if s.kind == ZERO:
                continue
            found = search(prefix + (x,), s.denominator)
            if found is not None:
                return found
        dead.add(key)
        return None

    witness = search((), _start(g))
    if witness is not None:
        check = run_reduction(g, witness)
        assert check.complete, "witness failed on a fresh run"
        drop = state["drop"] or check.weight_drop
        verdict = DROP if drop else REDUCIBLE
        c = Classification(verdict, witness, n - 1, True, drop, state["visited"])
    else:
        depth, best = state["best"]
        drop = state["drop"]
        verdict = DROP if drop else STUCK
        c = Classification(verdict, state["drop_order"] if drop else best, depth, False, drop, state["visited"])
    return Classification(**{**c.__dict__, "label": predict_weight(c, g, strict=False)})


def _small_case(g: Graph) -> Optional[Classification]:
    """Three or four edges: reducible once the denominator is a nonzero constant.

    With so few edges ``D_m`` can run out of variables before ``N - 1`` steps;
    the remaining eliminations are then vacuous rather than zero.
    """
    t = run_reduction(g)
    for m, s in enumerate(t.all_steps, start=1):
        if not s.defined or s.kind == ZERO:
            return None
        if s.poly.is_constant():
            c = Classification(REDUCIBLE, tuple(t.order), g.num_edges - 1, True, False, m)
            return Classification(**{**c.__dict__, "label": predict_weight(c, g, strict=False)})
    return None


def _best(state) -> Classification:
    depth, order = state["best"]
    return Classification(STUCK, order, depth, False, state["drop"], state["visited"])


def classification_for_order(g: Graph, order: Sequence[int]) -> Classification:
    """Verdict from a single ordering (no search)."""
    t = run_reduction(g, order)
    if t.complete and not t.weight_drop:
        c = Classification(REDUCIBLE, tuple(t.order), t.depth, True, False, len(t.all_steps))
    elif t.weight_drop:
        c = Classification(DROP, tuple(t.order), t.depth, t.complete, True, len(t.all_steps))
    else:
        c = Classification(STUCK, tuple(t.order[: t.depth]), t.depth, False, False, len(t.all_steps))
    return Classification(**{**c.__dict__, "label": predict_weight(c, g, strict=False)})


def predict_weight(c: Classification, g: Graph, strict: bool = True) -> str:
    """Bookkeeping label for the top weight-graded piece (nothing is computed)."""
    n = g.num_edges
    if n < 5 or n != 2 * g.loop_number:
        if strict:
            raise PreconditionViolated(f"weight prediction needs N = 2h >= 5 (N={n}, h={g.loop_number})")
        return "not applicable"
    if c.weight_drop:
        return f"weights < {2 * n - 6}"
    if c.reducible:
        return f"Q({3 - n}) spanned by [omega_G]"
    return f"undetermined at depth {c.depth}, gr(2) = gr(0) of D_{c.depth}"


# serialisation


def _factored_doc(d: Factored) -> dict:
    return {
        "constant": d.constant,
        "factors": [{"poly": format_poly(f), "power": e} for f, e in d.factors],
    }


def _factored_from_doc(doc: dict) -> Factored:
    return Factored(int(doc["constant"]), tuple((parse_poly(f["poly"]), int(f["power"])) for f in doc["factors"]))


def trace_document(t: ReductionTrace, expand: bool = True) -> dict:
    def step_doc(m: int, s: ReductionStep) -> dict:
        doc = {"m": m, "variable": s.variable, "kind": s.kind}
        if s.denominator is not None:
            doc["denominator"] = _factored_doc(s.denominator)
            if expand:
                doc["poly"] = format_poly(s.poly)
        return doc

    steps = [step_doc(m, s) for m, s in enumerate(t.steps, start=1)]
    out = {
        "graph": t.graph.name or "graph",
        "edges": [[u, v] for u, v, _ in t.graph.edges],
        "order": list(t.order),
        "d0": _factored_doc(t.d0),
        "steps": steps,
        "closing": step_doc(len(t.steps) + 1, t.closing) if t.closing is not None else None,
        "status": t.status,
        "weight_drop": t.weight_drop,
    }
    return out


def dump_trace(t: ReductionTrace, expand: bool = True) -> str:
    return json.dumps(trace_document(t, expand), indent=1, sort_keys=True) + "\n"


def load_trace_steps(text: str) -> List[Tuple[int, str, Optional[Factored]]]:
    """``(variable, kind, denominator)`` per step of a dumped trace, closing included."""
    doc = json.loads(text)
    rows = list(doc["steps"]) + ([doc["closing"]] if doc.get("closing") else [])
    out = []
    for s in rows:
        den = _factored_from_doc(s["denominator"]) if "denominator" in s else None
        out.append((int(s["variable"]), s["kind"], den))
    return out


def compare_trace(t: ReductionTrace, golden_text: str) -> List[str]:
    """Human-readable differences between ``t`` and a golden dump (empty if equal)."""
    expected = load_trace_steps(golden_text)
    got = [(s.variable, s.kind, s.denominator) for s in t.all_steps]
    problems = []
    if len(expected) != len(got):
        problems.append(f"length {len(got)} differs from golden {len(expected)}")
    doc = json.loads(golden_text)
    rows = list(doc["steps"]) + ([doc["closing"]] if doc.get("closing") else [])
    for m, (a, b, row) in enumerate(zip(got, expected, rows), start=1):
        if a[0] != b[0] or a[1] != b[1]:
            problems.append(f"D_{m}: variable/kind {a[:2]} != golden {b[:2]}")
        elif (a[2] is None) != (b[2] is None) or (a[2] is not None and a[2] != b[2] and a[2].expand() != b[2].expand()):
            problems.append(f"D_{m}: polynomial differs from golden")
        elif "poly" in row and a[2] is not None and parse_poly(row["poly"]) != a[2].expand():
            problems.append(f"D_{m}: expanded polynomial differs from golden")
    return problems
