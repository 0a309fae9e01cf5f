"""Truncated q-series, eta products and the point-count modularity probe."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .errors import InsufficientPrimes, NoConsistentFit, ParseError

DATA = Path(__file__).parent / "data"
ETA_SPEC_FILE = DATA / "k3_eta_spec.txt"

EtaSpec = Tuple[Tuple[int, int], ...]


@dataclass(frozen=True)
class QSeries:
    """``sum_{n=0}^{nmax} c_n q^n``, known exactly up to ``q^nmax``."""

    coeffs: Tuple[int, ...]
    spec: EtaSpec = ()
    prefactor: int = 0

    @property
    def nmax(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, n: int) -> int:
        if not 0 <= n <= self.nmax:
            raise IndexError(f"q^{n} is beyond the truncation q^{self.nmax}")
        return self.coeffs[n]

    def __mul__(self, other: "QSeries") -> "QSeries":
        n = min(self.nmax, other.nmax)
        out = [0] * (n + 1)
        for i in range(n + 1):
            a = self.coeffs[i]
            if a:
                for j in range(n - i + 1):
                    out[i + j] += a * other.coeffs[j]
        return QSeries(tuple(out), self.spec + other.spec, self.prefactor + other.prefactor)

    def truncate(self, nmax: int) -> "QSeries":
        return QSeries(self.coeffs[: nmax + 1], self.spec, self.prefactor)

    def to_csv(self, start: int = 1) -> str:
        return "n,a_n\n" + "".join(f"{n},{self.coeffs[n]}\n" for n in range(start, self.nmax + 1))


def eta_expand(spec: Sequence[Tuple[int, int]], prefactor_power: int, nmax: int) -> QSeries:
    """``q^prefactor * prod_d prod_{n>=1} (1 - q^(d n))^k_d`` up to ``q^nmax``."""
    if nmax < 1:
        raise ValueError("nmax must be at least 1")
    if prefactor_power < 0:
        raise ValueError("negative q-power prefactor")
    series = [0] * (nmax + 1)
    if prefactor_power <= nmax:
        series[prefactor_power] = 1
    for d, k in spec:
        if d < 1:
            raise ValueError(f"dilation {d} must be positive")
        for n in range(1, nmax // d + 1):
            step = d * n
            for _ in range(abs(k)):
                if k > 0:
                    # multiply by (1 - q^step), high degrees first
                    for i in range(nmax, step - 1, -1):
                        series[i] -= series[i - step]
                else:
                    # divide by (1 - q^step)
                    for i in range(step, nmax + 1):
                        series[i] += series[i - step]
    return QSeries(tuple(series), tuple((int(d), int(k)) for d, k in spec), prefactor_power)


def parse_eta_spec(text: str) -> Tuple[EtaSpec, int]:
    """Lines ``dilation exponent`` and one optional ``prefactor k``; ``#`` comments."""
    spec: List[Tuple[int, int]] = []
    prefactor = 0
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "prefactor" and len(parts) == 2:
                prefactor = int(parts[1])
            elif len(parts) == 2:
                spec.append((int(parts[0]), int(parts[1])))
            else:
                raise ValueError
        except ValueError:
            raise ParseError(f"bad eta spec line {raw!r}") from None
    return tuple(spec), prefactor


def format_eta_spec(spec: Sequence[Tuple[int, int]], prefactor: int) -> str:
    return "".join(f"{d} {k}\n" for d, k in spec) + f"prefactor {prefactor}\n"


def k3_coefficients(nmax: int, path: Optional[Path] = None) -> QSeries:
    """Expansion of the shipped weight-3 eta quotient."""
    text = Path(ETA_SPEC_FILE if path is None else path).read_text()
    spec, prefactor = parse_eta_spec(text)
    return eta_expand(spec, prefactor, nmax)


# probe

DEFAULT_BASELINE = (1, 0, 1)  # 1 + p^2, the Tate part of a projective surface


@dataclass(frozen=True)
class ProbeReport:
    """Outcome of :func:`k3_modularity_probe`.

    The fitted relation is ``count(p) = u*a_p + baseline(p) + v*p^free_power``.
    ``u`` and ``v`` are ``None`` when no integral fit exists.
    """

    u: Optional[int]
    v: Optional[int]
    baseline: Tuple[int, ...]
    free_power: int
    calibration_primes: Tuple[int, ...]
    validation: Dict[int, bool] = field(default_factory=dict)
    residuals: Dict[int, int] = field(default_factory=dict)
    message: str = ""

    @property
    def consistent(self) -> bool:
        return self.u is not None

    @property
    def passed(self) -> bool:
        """Integral fit, nonzero modular part, and every held-out prime validates."""
        return self.consistent and self.u != 0 and bool(self.validation) and all(self.validation.values())

    def relation(self) -> str:
        if not self.consistent:
            return "no consistent fit"
        base = " + ".join(f"{c}*p^{i}" for i, c in enumerate(self.baseline) if c)
        return f"count(p) = {self.u}*a_p + {base or '0'} + {self.v}*p^{self.free_power}"

    def document(self) -> dict:
        return {
            "u": self.u,
            "v": self.v,
            "relation": self.relation(),
            "baseline": list(self.baseline),
            "free_power": self.free_power,
            "calibration_primes": list(self.calibration_primes),
            "validation": {str(p): ok for p, ok in sorted(self.validation.items())},
            "residuals": {str(p): r for p, r in sorted(self.residuals.items())},
            "passed": self.passed,
            "message": self.message,
        }

    def dumps(self) -> str:
        return json.dumps(self.document(), indent=1, sort_keys=True) + "\n"


def _baseline(coeffs: Sequence[int], p: int) -> int:
    return sum(c * p**i for i, c in enumerate(coeffs))


def k3_modularity_probe(
    prime_counts: Mapping[int, int],
    coeffs: QSeries,
    calibration_primes: Sequence[int] = (2, 3),
    baseline: Sequence[int] = DEFAULT_BASELINE,
    free_power: int = 1,
    strict: bool = False,
) -> ProbeReport:
    """Fit ``u`` and ``v`` exactly on two primes, then check all other primes.

    With ``strict`` a failed fit raises :class:`NoConsistentFit`; otherwise it
    is returned as a report with ``u = None`` and the reason in ``message``.
    """
    primes = sorted(prime_counts)
    cal = tuple(calibration_primes)
    if len(cal) != 2 or len(set(cal)) != 2:
        raise ValueError("exactly two distinct calibration primes are needed")
    if len(primes) < 4:
        raise InsufficientPrimes(f"need counts at 4 or more primes, have {len(primes)}")
    missing = [p for p in cal if p not in prime_counts]
    if missing:
        raise InsufficientPrimes(f"no counts at calibration primes {missing}")
    if max(primes) > coeffs.nmax:
        raise InsufficientPrimes(f"q-series stops at q^{coeffs.nmax}, counts go to p={max(primes)}")
    baseline = tuple(int(c) for c in baseline)

    # u*a_p + v*p^k = count(p) - baseline(p) at both calibration primes
    (p1, p2) = cal
    rows = [(Fraction(coeffs[p]), Fraction(p**free_power), Fraction(prime_counts[p] - _baseline(baseline, p))) for p in cal]
    (a, b, r), (c, d, s) = rows
    det = a * d - b * c

    def fail(msg):
        if strict:
            raise NoConsistentFit(msg)
        return ProbeReport(None, None, baseline, free_power, cal, {}, {}, msg)

    if det == 0:
        return fail(f"calibration primes {p1}, {p2} do not separate u from v")
    u = (r * d - b * s) / det
    v = (a * s - r * c) / det
    if u.denominator != 1 or v.denominator != 1:
        return fail(f"non-integral fit u={u}, v={v}")
    u, v = int(u), int(v)
    validation: Dict[int, bool] = {}
    residuals: Dict[int, int] = {}
    for p in primes:
        if p in cal:
            continue
        pred = u * coeffs[p] + _baseline(baseline, p) + v * p**free_power
        residuals[p] = prime_counts[p] - pred
        validation[p] = residuals[p] == 0
    msg = "modular part vanishes" if u == 0 else ""
    return ProbeReport(u, v, baseline, free_power, cal, validation, residuals, msg)
