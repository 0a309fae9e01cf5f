"""Exact point counts over prime fields and the congruence checks built on them.

Counting is brute force, vectorised with numpy.  A polynomial in ``n``
variables is turned into its coefficient tensor mod ``p`` and contracted with
the Vandermonde matrix ``x**k`` along every axis, which yields its values on
all of ``F_p^n`` at once.  Large grids are split into chunks over the leading
variables; chunk results are integers and are summed in a fixed order, so
the answer does not depend on how many workers ran.

Single hypersurfaces with many variables go through :func:`_TablePlan`: a
block of variables is summed out through a lookup table indexed by the
values of the coefficient polynomials of that block.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .dodgson import dodgson, psi
from .errors import (
    BudgetExceeded,
    CalibrationMissing,
    DegreeTooLarge,
    InsufficientPrimes,
    NonHomogeneous,
    PreconditionViolated,
    PrimeRequired,
)
from .graph import Graph
from .poly import Poly, _is_prime, _shift, unpack
from .reduction import GENERIC, Factored, ReductionTrace

MAX_EVALUATIONS = 10**9
CHUNK = 1 << 21
TABLE_LIMIT = 1 << 24

DATA = Path(__file__).parent / "data"
CALIBRATION_FILE = DATA / "shadow_calibration.json"


def _check_prime(p: int) -> None:
    if not _is_prime(p):
        raise PrimeRequired(f"{p} is not prime")


def _workers(workers: Optional[int]) -> int:
    if workers is not None:
        return max(1, workers)
    return max(1, int(os.environ.get("DENOMRED_THREADS", "1")))


# grid evaluation


def _tensor(f: Poly, variables: Sequence[int], p: int) -> np.ndarray:
    index = {v: i for i, v in enumerate(variables)}
    shape = [max(0, f.degree(v)) + 1 for v in variables]
    t = np.zeros(shape, dtype=np.int64)
    for m, c in f.terms.items():
        pos = [0] * len(variables)
        for v, e in unpack(m):
            pos[index[v]] = e
        t[tuple(pos)] = (t[tuple(pos)] + c) % p
    return t


def _vandermonde(p: int, degree: int) -> np.ndarray:
    x = np.arange(p, dtype=np.int64)
    cols = [np.ones(p, dtype=np.int64)]
    for _ in range(degree):
        cols.append(cols[-1] * x % p)
    return np.stack(cols, axis=1)


def _contract(t: np.ndarray, p: int) -> np.ndarray:
    """Values on the full grid; axis ``i`` of the result is variable ``i``."""
    for i in range(t.ndim):
        v = _vandermonde(p, t.shape[i] - 1)
        t = np.moveaxis(np.tensordot(t, v, axes=([i], [1])), -1, i) % p
    return t


def _fix_first(t: np.ndarray, value: int, p: int) -> np.ndarray:
    v = _vandermonde(p, t.shape[0] - 1)[value]
    return np.tensordot(v, t, axes=([0], [0])) % p


def _chunks(n: int, p: int) -> Tuple[int, List[Tuple[int, ...]]]:
    """How many leading variables to fix, and the list of their values."""
    k = 0
    while k < n and p ** (n - k) > CHUNK:
        k += 1
    return k, list(product(range(p), repeat=k))


def _budget(n: int, p: int, budget: Optional[int]) -> None:
    limit = MAX_EVALUATIONS if budget is None else budget
    if p**n > limit:
        raise BudgetExceeded(f"{p}^{n} points exceed the evaluation budget {limit}")


def _mask_count(
    polys: Sequence[Poly], variables: Sequence[int], p: int, mode: str, workers: Optional[int]
) -> int:
    n = len(variables)
    tensors = [_tensor(f, variables, p) for f in polys]
    k, prefixes = _chunks(n, p)

    def run(prefix):
        mask = None
        for t in tensors:
            for val in prefix:
                t = _fix_first(t, val, p)
            vals = _contract(t, p) == 0
            if mask is None:
                mask = vals
            elif mode == "all":
                mask &= vals
            else:
                mask |= vals
        return int(np.count_nonzero(mask))

    w = _workers(workers)
    if w == 1 or len(prefixes) == 1:
        parts = [run(pre) for pre in prefixes]
    else:
        with ThreadPoolExecutor(max_workers=w) as pool:
            parts = list(pool.map(run, prefixes))
    return sum(parts)


def _prepare(polys: Sequence[Poly], variables: Sequence[int], p: int) -> Tuple[List[Poly], List[int]]:
    _check_prime(p)
    variables = list(variables)
    if len(set(variables)) != len(variables):
        raise ValueError("repeated variable")
    for f in polys:
        extra = set(f.variables()) - set(variables)
        if extra:
            raise ValueError(f"polynomial uses variables {sorted(extra)} outside the counting space")
    return list(polys), variables


def count_affine(
    polys: Sequence[Poly],
    variables: Sequence[int],
    p: int,
    budget: Optional[int] = None,
    workers: Optional[int] = None,
) -> int:
    """Number of common zeros in ``F_p^len(variables)``."""
    polys, variables = _prepare(polys, variables, p)
    n = len(variables)
    if not polys:
        return p**n
    if any(f.is_constant() and f.constant_value() % p for f in polys):
        return 0
    polys = [f for f in polys if not f.is_constant()]
    if not polys:
        return p**n
    if len(polys) == 1 and n > 6:
        plan = _TablePlan.build(polys[0], variables, p)
        if plan is not None:
            _budget(len(plan.rest), p, budget)
            return plan.count(workers)
    _budget(n, p, budget)
    return _mask_count(polys, variables, p, "all", workers)


def count_union(
    polys: Sequence[Poly],
    variables: Sequence[int],
    p: int,
    budget: Optional[int] = None,
    workers: Optional[int] = None,
) -> int:
    """Points where at least one polynomial vanishes (zeros of the product)."""
    polys, variables = _prepare(polys, variables, p)
    n = len(variables)
    if any(not f or (f.is_constant() and f.constant_value() % p == 0) for f in polys):
        return p**n
    polys = [f for f in polys if not f.is_constant()]
    if not polys:
        return 0
    _budget(n, p, budget)
    return _mask_count(polys, variables, p, "any", workers)


def _homogeneous(polys: Iterable[Poly]) -> None:
    for f in polys:
        if f and not f.is_homogeneous():
            raise NonHomogeneous("projective counting needs homogeneous polynomials")


def _from_cone(cone: int, p: int) -> int:
    if cone == 0:
        # only a nonzero constant misses the origin
        return 0
    q, r = divmod(cone - 1, p - 1)
    assert r == 0, "cone count is not 1 mod p-1"
    return q


def count_projective(
    polys: Sequence[Poly],
    variables: Sequence[int],
    p: int,
    budget: Optional[int] = None,
    workers: Optional[int] = None,
) -> int:
    """Points of ``V(polys)`` in ``P^(n-1)``, from the affine cone."""
    _homogeneous(polys)
    return _from_cone(count_affine(polys, variables, p, budget, workers), p)


def count_factored(
    d: Factored, variables: Sequence[int], p: int, projective: bool = True,
    budget: Optional[int] = None, workers: Optional[int] = None,
) -> int:
    """Zeros of a factored polynomial: the union of the factors' zero sets."""
    n = len(variables)
    if d.is_zero():
        cone = p**n
    elif d.constant % p == 0:
        cone = p**n
    else:
        factors = [f for f, _ in d.factors]
        if len(factors) == 1 and n > 6:
            cone = count_affine(factors, variables, p, budget, workers)
        else:
            cone = count_union(factors, variables, p, budget, workers)
    if not projective:
        return cone
    _homogeneous([f for f, _ in d.factors])
    return _from_cone(cone, p)


# block elimination through lookup tables


class _TablePlan:
    """Sum a block of variables out through a table of zero counts.

    With ``f = sum_k r_k(rest) * M_k(block)``, the number of block points where
    ``f`` vanishes depends only on ``(r_k mod p)``.  The table over all such
    vectors is built one block variable at a time, each step summing the
    previous table over the values of the new variable.
    """

    def __init__(self, p, rest, coeffs, table):
        self.p = p
        self.rest = rest
        self.coeffs = coeffs
        self.table = table

    @staticmethod
    def _split(f: Poly, block: Sequence[int]) -> Dict[Tuple[int, ...], Poly]:
        """Coefficient polynomial (in the other variables) of each block monomial."""
        out: Dict[Tuple[int, ...], Dict[int, int]] = {}
        shifts = [_shift(v) for v in block]
        for m, c in f.terms.items():
            key = tuple((m >> s) & 0xFF for s in shifts)
            rest_m = m - sum(e << s for e, s in zip(key, shifts))
            d = out.setdefault(key, {})
            d[rest_m] = d.get(rest_m, 0) + c
        return {k: Poly(v) for k, v in out.items()}

    @staticmethod
    def _groups(parts: Dict[Tuple[int, ...], Poly], p: int) -> List[Tuple[Poly, List[Tuple[int, ...]]]]:
        """Block monomials grouped by equal coefficient polynomial mod ``p``."""
        groups: Dict[Poly, List[Tuple[int, ...]]] = {}
        for key in sorted(parts):
            r = Poly({m: c % p for m, c in parts[key].terms.items()})
            if not r:
                continue
            groups.setdefault(r, []).append(key)
        return sorted(groups.items(), key=lambda t: t[1])

    @classmethod
    def build(cls, f: Poly, variables: Sequence[int], p: int) -> Optional["_TablePlan"]:
        present = [v for v in variables if v in set(f.variables())]
        absent = len(variables) - len(present)
        best = None
        # seed block: the triple with the fewest distinct coefficients
        for triple in combinations(present, 3):
            k = len(cls._groups(cls._split(f, triple), p))
            if p**k <= TABLE_LIMIT and (best is None or k < best[0]):
                best = (k, triple)
        if best is None:
            return None
        block = list(best[1])
        sizes = [best[0]]
        while len(present) - len(block) > 1:
            grown = None
            for y in present:
                if y in block:
                    continue
                k = len(cls._groups(cls._split(f, block + [y]), p))
                if p**k <= TABLE_LIMIT and (grown is None or k < grown[0]):
                    grown = (k, y)
            if grown is None:
                break
            block.append(grown[1])
            sizes.append(grown[0])
        # keep the prefix of the greedy chain with the lowest estimated work
        def cost(j):
            build = p**3 * sizes[0] + sum(p ** (k + 1) * k for k in sizes[1:j + 1])
            return build + p ** (len(present) - 3 - j) * sizes[j]

        j = min(range(len(sizes)), key=cost)
        if p ** len(present) <= cost(j):
            return None
        block = block[: 3 + j]
        rest = [v for v in present if v not in block]
        table = cls._table(f, block, p)
        groups = cls._groups(cls._split(f, block), p)
        plan = cls(p, rest, [r for r, _ in groups], table)
        plan.absent = absent
        return plan

    @classmethod
    def _table(cls, f: Poly, block: Sequence[int], p: int) -> np.ndarray:
        # the first three block variables by brute force, then one more at a time
        seed = list(block[:3])
        groups = cls._groups(cls._split(f, block[:3]), p)
        k = len(groups)
        pts = np.array(list(product(range(p), repeat=len(seed))), dtype=np.int64)
        basis = []
        for _, keys in groups:
            val = np.zeros(len(pts), dtype=np.int64)
            for key in keys:
                term = np.ones(len(pts), dtype=np.int64)
                for i, e in enumerate(key):
                    term = term * pts[:, i] ** e % p
                val = (val + term) % p
            basis.append(val)
        basis = np.stack(basis) if basis else np.zeros((0, len(pts)), dtype=np.int64)
        vecs = np.array(list(product(range(p), repeat=k)), dtype=np.int64)[:, ::-1]
        table = np.zeros(p**k, dtype=np.int64)
        for start in range(0, len(vecs), 4096):
            chunk = vecs[start : start + 4096]
            vals = chunk @ basis % p
            table[start : start + len(chunk)] = np.count_nonzero(vals == 0, axis=1)
        prev_groups = groups
        for j in range(3, len(block)):
            cur = list(block[: j + 1])
            groups = cls._groups(cls._split(f, cur), p)
            k_new = len(groups)
            # each new group is a sum of old-block monomials times y^a
            prev_index = {}
            for gi, (_, keys) in enumerate(prev_groups):
                for key in keys:
                    prev_index[key] = gi
            maps = []  # (new group, old group, power of y)
            for gi, (_, keys) in enumerate(groups):
                seen = set()
                for key in keys:
                    old = prev_index[key[:-1]] if key[:-1] in prev_index else None
                    if old is None:
                        raise AssertionError("block grouping is not nested")
                    seen.add((old, key[-1]))
                for old, a in sorted(seen):
                    maps.append((gi, old, a))
            new_table = np.zeros(p**k_new, dtype=np.int64)
            weights_old = p ** np.arange(len(prev_groups), dtype=np.int64)
            for start in range(0, p**k_new, 1 << 18):
                idx = np.arange(start, min(start + (1 << 18), p**k_new), dtype=np.int64)
                digits = (idx[:, None] // (p ** np.arange(k_new, dtype=np.int64))) % p
                acc = np.zeros(len(idx), dtype=np.int64)
                for yv in range(p):
                    old_vals = np.zeros((len(idx), len(prev_groups)), dtype=np.int64)
                    for gi, old, a in maps:
                        old_vals[:, old] += digits[:, gi] * pow(yv, a, p)
                    old_vals %= p
                    acc += table[old_vals @ weights_old]
                new_table[idx] = acc
            table = new_table
            prev_groups = groups
        return table

    def count(self, workers: Optional[int] = None) -> int:
        p = self.p
        n = len(self.rest)
        tensors = [_tensor(r, self.rest, p) for r in self.coeffs]
        weights = [p**i for i in range(len(self.coeffs))]
        k, prefixes = _chunks(n, p)

        def run(prefix):
            index = None
            for t, w in zip(tensors, weights):
                for val in prefix:
                    t = _fix_first(t, val, p)
                vals = _contract(t, p) * w
                index = vals if index is None else index + vals
            return int(self.table[index].sum())

        w = _workers(workers)
        if w == 1 or len(prefixes) == 1:
            parts = [run(pre) for pre in prefixes]
        else:
            with ThreadPoolExecutor(max_workers=w) as pool:
                parts = list(pool.map(run, prefixes))
        return sum(parts) * p ** getattr(self, "absent", 0)


# congruences


@dataclass(frozen=True)
class CountReport:
    """Point counts over several primes plus the verdicts derived from them."""

    description: str
    ambient: str
    dimension: int
    counts: Dict[int, int]
    verdicts: Dict[str, bool] = field(default_factory=dict)
    details: Dict[str, object] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.verdicts.values())

    def document(self) -> dict:
        return {
            "description": self.description,
            "ambient": self.ambient,
            "dimension": self.dimension,
            "counts": {str(p): c for p, c in sorted(self.counts.items())},
            "verdicts": dict(sorted(self.verdicts.items())),
            "details": _jsonable(self.details),
        }

    def dumps(self) -> str:
        return json.dumps(self.document(), indent=1, sort_keys=True) + "\n"


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in sorted(x.items(), key=lambda t: str(t[0]))}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, Fraction):
        return str(x)
    return x


def cw_congruence(g: Graph, p: int, budget: Optional[int] = None, workers: Optional[int] = None) -> Tuple[bool, int, int]:
    """``|X_G(F_p)| mod p`` against ``|P^(N-1)(F_p)| mod p = 1``.

    Returns ``(holds, count, 1)``.
    """
    _check_prime(p)
    n = g.num_edges
    h = g.loop_number
    if h > n - 1:
        raise DegreeTooLarge(f"degree {h} exceeds the projective dimension {n - 1}")
    if h == 0:
        raise PreconditionViolated("a tree has constant graph polynomial; no hypersurface to count")
    f = psi(g)
    count = count_projective([f], g.edge_ids, p, budget, workers)
    return count % p == 1 % p, count, 1


def smoothness_shadow(g: Graph, e: int, p: int, budget: Optional[int] = None) -> Tuple[bool, int]:
    """Check ``Psi_{G,e} = 0`` wherever ``Psi^e_G`` and all its partials vanish.

    Works on the affine cone over ``F_p``; returns ``(holds, number of singular
    points checked)``.
    """
    _check_prime(p)
    upper = dodgson(g, (e,), (e,))
    lower = dodgson(g, (), (), (e,))
    variables = [v for v in g.edge_ids if v != e]
    if upper.is_constant():
        return True, 0
    system = [upper] + [upper.derivative(v) for v in variables]
    system = [s for s in system if s]
    singular = count_affine(system, variables, p, budget)
    both = count_affine(system + [lower], variables, p, budget)
    return singular == both, singular


# count shadow of the reduction


def _pair_counts(t: ReductionTrace, m: int, p: int, budget, workers) -> Tuple[int, int]:
    g = t.graph
    order = list(t.order)

    def proj(k):
        variables = [v for v in g.edge_ids if v not in order[:k]]
        return count_factored(t.denominator(k), variables, p, True, budget, workers)

    return proj(m), proj(m + 1)


def _shadow_pairs(t: ReductionTrace, start: int) -> List[int]:
    full = t.all_steps
    out = []
    for m in range(start, len(full)):
        nxt = full[m]  # produces D_{m+1}
        if nxt.kind == GENERIC and full[m - 1].defined and nxt.defined:
            # the last elimination leaves one variable; P^0 counts say nothing
            if len(t.graph.edge_ids) - (m + 1) >= 2:
                out.append(m)
    return out


def calibrate_shadow(primes: Sequence[int] = (2, 3, 5), store: bool = True) -> dict:
    """Fit ``r`` in ``c_{k+1} = -c_k + r (mod p)`` on wheel(3) and freeze it.

    ``r`` is a polynomial of degree at most 1 in ``p``; reduced mod ``p`` only
    its constant term survives, so the degree-1 coefficient is frozen at 0
    and the constant is found by the Chinese remainder theorem over the
    calibration primes, using every generic pair with ``k >= 3``.
    """
    from .graph import wheel
    from .reduction import run_reduction

    t = run_reduction(wheel(3))
    residues = {}
    for p in primes:
        values = set()
        for m in _shadow_pairs(t, 3):
            a, b = _pair_counts(t, m, p, None, None)
            values.add((a + b) % p)
        if len(values) != 1:
            raise CalibrationMissing(f"no single residue fits at p={p}: {sorted(values)}")
        residues[p] = values.pop()
    r0, mod = 0, 1
    for p, res in sorted(residues.items()):
        # solve r0 + mod*t = res (mod p)
        tt = ((res - r0) * pow(mod, -1, p)) % p
        r0 += mod * tt
        mod *= p
    if r0 > mod // 2:
        r0 -= mod
    doc = {
        "relation": "c_{k+1} = -c_k + r0 + r1*p (mod p), projective counts",
        "calibration_graph": "wheel(3)",
        "calibration_primes": list(primes),
        "residues": {str(p): r for p, r in sorted(residues.items())},
        "r0": r0,
        "r1": 0,
    }
    if store:
        DATA.mkdir(exist_ok=True)
        CALIBRATION_FILE.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    return doc


def load_calibration(path: Optional[Path] = None) -> dict:
    path = CALIBRATION_FILE if path is None else Path(path)
    if not path.exists():
        raise CalibrationMissing(f"no frozen calibration at {path}")
    return json.loads(path.read_text())


def trace_count_shadow(
    t: ReductionTrace,
    primes: Sequence[int],
    start: int = 5,
    calibration: Optional[dict] = None,
    budget: Optional[int] = None,
    workers: Optional[int] = None,
) -> CountReport:
    """Check the frozen relation on every generic pair ``(D_k, D_{k+1})``, ``k >= start``."""
    cal = load_calibration() if calibration is None else calibration
    r0, r1 = int(cal["r0"]), int(cal["r1"])
    pairs = _shadow_pairs(t, start)
    counts: Dict[int, int] = {}
    verdicts: Dict[str, bool] = {}
    details: Dict[str, object] = {"pairs": {}, "r0": r0, "r1": r1}
    for p in primes:
        _check_prime(p)
        for m in pairs:
            a, b = _pair_counts(t, m, p, budget, workers)
            ok = (b + a - r0 - r1 * p) % p == 0
            verdicts[f"k={m},p={p}"] = ok
            details["pairs"][f"k={m},p={p}"] = [a, b]
            counts.setdefault(p, a)
    return CountReport(
        description=f"reduction shadow of {t.graph.name or 'graph'}",
        ambient="projective",
        dimension=t.graph.num_edges - 1,
        counts=counts,
        verdicts=verdicts,
        details=details,
    )


# interpolation


def quasipoly_probe(counts: Mapping[int, int], max_degree: int) -> dict:
    """Exact polynomial fit through the first ``max_degree + 1`` primes.

    Returns the interpolating coefficients (as fractions) and the mismatch at
    every remaining prime; any nonzero mismatch rules out a polynomial of that
    degree.
    """
    primes = sorted(counts)
    if len(primes) < max_degree + 2:
        raise InsufficientPrimes(f"need {max_degree + 2} primes, have {len(primes)}")
    fit = primes[: max_degree + 1]
    # Lagrange through the fit points, coefficients by solving the Vandermonde system
    n = len(fit)
    mat = [[Fraction(p) ** j for j in range(n)] + [Fraction(counts[p])] for p in fit]
    for col in range(n):
        piv = next(r for r in range(col, n) if mat[r][col] != 0)
        mat[col], mat[piv] = mat[piv], mat[col]
        for r in range(n):
            if r != col and mat[r][col] != 0:
                factor = mat[r][col] / mat[col][col]
                mat[r] = [a - factor * b for a, b in zip(mat[r], mat[col])]
    coeffs = [mat[i][n] / mat[i][i] for i in range(n)]
    mismatch = {}
    for p in primes[n:]:
        pred = sum(c * Fraction(p) ** j for j, c in enumerate(coeffs))
        mismatch[p] = Fraction(counts[p]) - pred
    return {
        "fit_primes": fit,
        "coefficients": coeffs,
        "mismatch": mismatch,
        "polynomial": all(v == 0 for v in mismatch.values()),
    }


def count_report(
    polys: Sequence[Poly], variables: Sequence[int], primes: Sequence[int], projective: bool,
    description: str = "", budget: Optional[int] = None, workers: Optional[int] = None,
) -> CountReport:
    fn = count_projective if projective else count_affine
    counts = {p: fn(polys, variables, p, budget, workers) for p in primes}
    verdicts = {}
    if projective:
        n = len(variables) - 1
        for p, c in counts.items():
            verdicts[f"bound p={p}"] = c <= (p ** (n + 1) - 1) // (p - 1)
    return CountReport(description, "projective" if projective else "affine",
                       len(variables) - (1 if projective else 0), counts, verdicts)
