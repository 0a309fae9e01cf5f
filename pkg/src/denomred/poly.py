"""Sparse multivariate polynomials with arbitrary-precision integer coefficients.

A polynomial is a dict mapping a packed monomial to a nonzero ``int``.  The
monomial packs the exponent of variable ``a<v>`` into an 8-bit field at shift
``8 * (MAXVAR - v)``, so that

* multiplying monomials is adding their packed integers, and
* comparing packed integers is the lexicographic order in which ``a0 > a1 >
  a2 > ...`` (lower variable ids are more significant).

That order is the monomial order used for leading terms, sign normalisation
and printing.  Variable ids run from 0 to ``MAXVAR``; exponents stay below
``2 ** (FIELD - 1)``.

The text format is the one used for golden files::

    4*a1^2*a2^2 - 4*a1*a2*a3^2 + a3^4
"""

from __future__ import annotations

import heapq
import math
import re
from typing import Dict, Iterable, Iterator, Mapping, Optional, Sequence, Tuple

from .errors import (
    DegreeTooHigh,
    NotDivisible,
    NotPolynomialAfterClearing,
    ParseError,
    PrimeRequired,
)

FIELD = 8
MAXVAR = 63
_MASK = (1 << FIELD) - 1
_GUARD = sum(1 << (FIELD * v + FIELD - 1) for v in range(MAXVAR + 1))

Monomial = Tuple[Tuple[int, int], ...]


def _shift(var: int) -> int:
    if not 0 <= var <= MAXVAR:
        raise ValueError(f"variable id {var} outside 0..{MAXVAR}")
    return FIELD * (MAXVAR - var)


def pack(exponents: Mapping[int, int] | Iterable[Tuple[int, int]]) -> int:
    items = exponents.items() if isinstance(exponents, Mapping) else exponents
    m = 0
    for var, exp in items:
        if exp < 0 or exp >= 1 << (FIELD - 1):
            raise OverflowError(f"exponent {exp} out of range")
        m += exp << _shift(var)
    return m


def unpack(m: int) -> Monomial:
    out = []
    v = MAXVAR
    while m:
        e = m & _MASK
        if e:
            out.append((v, e))
        m >>= FIELD
        v -= 1
    out.reverse()
    return tuple(out)


def _check_overflow(terms: Dict[int, int]) -> None:
    acc = 0
    for m in terms:
        acc |= m
    if acc & _GUARD:
        raise OverflowError("exponent overflow in polynomial product")


class Poly:
    """Immutable sparse polynomial over the integers."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Optional[Mapping[int, int]] = None):
        if terms is None:
            self._terms: Dict[int, int] = {}
        else:
            self._terms = {m: c for m, c in terms.items() if c}
        self._hash = None

    @classmethod
    def _raw(cls, terms: Dict[int, int]) -> "Poly":
        p = cls.__new__(cls)
        p._terms = terms
        p._hash = None
        return p

    # constructors

    @classmethod
    def zero(cls) -> "Poly":
        return cls._raw({})

    @classmethod
    def constant(cls, c: int) -> "Poly":
        return cls._raw({0: int(c)} if c else {})

    @classmethod
    def var(cls, v: int) -> "Poly":
        return cls._raw({1 << _shift(v): 1})

    @classmethod
    def monomial(cls, exponents: Mapping[int, int], coeff: int = 1) -> "Poly":
        return cls._raw({pack(exponents): coeff} if coeff else {})

    @classmethod
    def from_terms(cls, terms: Iterable[Tuple[Mapping[int, int] | Iterable[Tuple[int, int]], int]]) -> "Poly":
        out: Dict[int, int] = {}
        for exps, c in terms:
            m = pack(exps)
            out[m] = out.get(m, 0) + c
        return cls(out)

    # basic protocol

    @property
    def terms(self) -> Dict[int, int]:
        return self._terms

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = Poly.constant(other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __repr__(self) -> str:
        return f"Poly({format_poly(self)!r})"

    def __str__(self) -> str:
        return format_poly(self)

    def items(self) -> Iterator[Tuple[Monomial, int]]:
        """Terms as ``(((var, exp), ...), coeff)`` in descending monomial order."""
        for m in sorted(self._terms, reverse=True):
            yield unpack(m), self._terms[m]

    # arithmetic

    def __neg__(self) -> "Poly":
        return Poly._raw({m: -c for m, c in self._terms.items()})

    def __add__(self, other) -> "Poly":
        if isinstance(other, int):
            other = Poly.constant(other)
        if not isinstance(other, Poly):
            return NotImplemented
        a, b = self._terms, other._terms
        if len(a) < len(b):
            a, b = b, a
        out = dict(a)
        for m, c in b.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                del out[m]
        return Poly._raw(out)

    __radd__ = __add__

    def __sub__(self, other) -> "Poly":
        if isinstance(other, int):
            other = Poly.constant(other)
        if not isinstance(other, Poly):
            return NotImplemented
        out = dict(self._terms)
        for m, c in other._terms.items():
            s = out.get(m, 0) - c
            if s:
                out[m] = s
            else:
                del out[m]
        return Poly._raw(out)

    def __rsub__(self, other) -> "Poly":
        return (-self) + other

    def __mul__(self, other) -> "Poly":
        if isinstance(other, int):
            if not other:
                return Poly.zero()
            return Poly._raw({m: c * other for m, c in self._terms.items()})
        if not isinstance(other, Poly):
            return NotImplemented
        a, b = self._terms, other._terms
        if not a or not b:
            return Poly.zero()
        if len(a) < len(b):
            a, b = b, a
        out: Dict[int, int] = {}
        get = out.get
        a_items = list(a.items())
        for mb, cb in b.items():
            for ma, ca in a_items:
                m = ma + mb
                out[m] = get(m, 0) + ca * cb
        out = {m: c for m, c in out.items() if c}
        _check_overflow(out)
        return Poly._raw(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Poly":
        if k < 0:
            raise ValueError("negative power")
        result = Poly.constant(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    # structure

    def is_constant(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and 0 in self._terms)

    def constant_value(self) -> int:
        return self._terms.get(0, 0)

    def variables(self) -> Tuple[int, ...]:
        acc = 0
        for m in self._terms:
            acc |= m
        return tuple(v for v, _ in unpack(_spread(acc)))

    def degree(self, var: int) -> int:
        """Degree in ``a<var>``; ``-1`` for the zero polynomial."""
        if not self._terms:
            return -1
        s = _shift(var)
        return max((m >> s) & _MASK for m in self._terms)

    def total_degree(self) -> int:
        if not self._terms:
            return -1
        return max(sum(e for _, e in unpack(m)) for m in self._terms)

    def degrees(self) -> Tuple[int, ...]:
        """Set of total degrees of the monomials, sorted."""
        return tuple(sorted({sum(e for _, e in unpack(m)) for m in self._terms}))

    def is_homogeneous(self) -> bool:
        return len(self.degrees()) <= 1

    def coefficients(self, var: int) -> Dict[int, "Poly"]:
        """Split into ``{k: coefficient of a<var>^k}``, each free of ``a<var>``."""
        s = _shift(var)
        parts: Dict[int, Dict[int, int]] = {}
        for m, c in self._terms.items():
            e = (m >> s) & _MASK
            parts.setdefault(e, {})[m - (e << s)] = c
        return {e: Poly._raw(t) for e, t in parts.items()}

    def coefficient(self, var: int, k: int) -> "Poly":
        s = _shift(var)
        out = {}
        for m, c in self._terms.items():
            if (m >> s) & _MASK == k:
                out[m - (k << s)] = c
        return Poly._raw(out)

    def leading_term(self) -> Tuple[int, int]:
        """Packed leading monomial and its coefficient."""
        m = max(self._terms)
        return m, self._terms[m]

    def leading_coefficient(self) -> int:
        if not self._terms:
            return 0
        return self._terms[max(self._terms)]

    def normalized(self) -> "Poly":
        """``self`` or ``-self``, whichever has a positive leading coefficient."""
        if self.leading_coefficient() < 0:
            return -self
        return self

    def sign(self) -> int:
        lc = self.leading_coefficient()
        return (lc > 0) - (lc < 0)

    def content(self) -> int:
        g = 0
        for c in self._terms.values():
            g = math.gcd(g, c)
        return g

    def monomial_content(self) -> int:
        """Packed gcd of all monomials (the largest monomial dividing ``self``)."""
        if not self._terms:
            return 0
        it = iter(self._terms)
        g = unpack(next(it))
        gd = dict(g)
        for m in it:
            if not gd:
                break
            md = dict(unpack(m))
            gd = {v: min(e, md[v]) for v, e in gd.items() if v in md}
        return pack(gd)

    def shift_down(self, mono: int) -> "Poly":
        """Divide by the packed monomial ``mono`` (must divide every term)."""
        if not mono:
            return self
        out = {}
        for m, c in self._terms.items():
            if not monomial_divides(mono, m):
                raise NotDivisible("monomial does not divide polynomial")
            out[m - mono] = c
        return Poly._raw(out)

    def shift_up(self, mono: int) -> "Poly":
        out = {m + mono: c for m, c in self._terms.items()}
        _check_overflow(out)
        return Poly._raw(out)

    def div_int(self, k: int) -> "Poly":
        out = {}
        for m, c in self._terms.items():
            q, r = divmod(c, k)
            if r:
                raise NotDivisible(f"coefficient {c} not divisible by {k}")
            out[m] = q
        return Poly._raw(out)

    def derivative(self, var: int) -> "Poly":
        s = _shift(var)
        one = 1 << s
        out = {}
        for m, c in self._terms.items():
            e = (m >> s) & _MASK
            if e:
                out[m - one] = c * e
        return Poly._raw(out)

    def subs_value(self, var: int, value: int) -> "Poly":
        """Substitute the integer ``value`` for ``a<var>``."""
        s = _shift(var)
        out: Dict[int, int] = {}
        for m, c in self._terms.items():
            e = (m >> s) & _MASK
            if e:
                if not value:
                    continue
                m -= e << s
                c *= value ** e
            out[m] = out.get(m, 0) + c
        return Poly(out)

    def rename(self, mapping: Mapping[int, int]) -> "Poly":
        """Rename variables; ids missing from ``mapping`` are kept."""
        out: Dict[int, int] = {}
        for m, c in self._terms.items():
            nm = pack([(mapping.get(v, v), e) for v, e in unpack(m)]) if mapping else m
            out[nm] = out.get(nm, 0) + c
        return Poly(out)

    def evaluate(self, point: Mapping[int, int]) -> int:
        total = 0
        for m, c in self._terms.items():
            for v, e in unpack(m):
                c *= point[v] ** e
            total += c
        return total


def _spread(acc: int) -> int:
    """Turn an OR of packed monomials into a monomial with exponent 1 per used field."""
    out = 0
    v = MAXVAR
    m = acc
    while m:
        if m & _MASK:
            out += 1 << _shift(v)
        m >>= FIELD
        v -= 1
    return out


def monomial_divides(a: int, b: int) -> bool:
    """True when packed monomial ``a`` divides ``b``."""
    # guard bits are clear in stored monomials, so a borrow shows up there
    return ((b | _GUARD) - a) & _GUARD == _GUARD


# module-level arithmetic in the spelling used by the rest of the package


def add(p: Poly, q: Poly) -> Poly:
    return p + q


def sub(p: Poly, q: Poly) -> Poly:
    return p - q


def mul(p: Poly, q: Poly) -> Poly:
    return p * q


def var(v: int) -> Poly:
    return Poly.var(v)


def const(c: int) -> Poly:
    return Poly.constant(c)


def divide_exact(p: Poly, q: Poly) -> Poly:
    """Exact quotient ``p / q``; raises :class:`NotDivisible` otherwise."""
    if not q:
        raise ZeroDivisionError("division by the zero polynomial")
    if not p:
        return Poly.zero()
    if q.is_constant():
        return p.div_int(q.constant_value())
    qm, qc = q.leading_term()
    q_rest = [(m, c) for m, c in q.terms.items() if m != qm]
    rem = dict(p.terms)
    heap = [-m for m in rem]
    heapq.heapify(heap)
    quot: Dict[int, int] = {}
    while heap:
        m = -heapq.heappop(heap)
        c = rem.pop(m, 0)
        if not c:
            continue
        if m < qm or not monomial_divides(qm, m):
            raise NotDivisible("remainder term not divisible by leading term")
        t_c, r = divmod(c, qc)
        if r:
            raise NotDivisible("leading coefficient does not divide")
        t_m = m - qm
        quot[t_m] = t_c
        for qm2, qc2 in q_rest:
            k = t_m + qm2
            old = rem.get(k)
            if old is None:
                rem[k] = -t_c * qc2
                heapq.heappush(heap, -k)
            else:
                s = old - t_c * qc2
                if s:
                    rem[k] = s
                else:
                    del rem[k]
    return Poly._raw(quot)


def decompose_quadratic(d: Poly, x: int) -> Tuple[Poly, Poly, Poly]:
    """Return ``(A, B, C)`` with ``d = A*x^2 + B*x + C`` and A, B, C free of ``x``."""
    deg = d.degree(x)
    if deg > 2:
        raise DegreeTooHigh(x, deg)
    parts = d.coefficients(x)
    z = Poly.zero()
    return parts.get(2, z), parts.get(1, z), parts.get(0, z)


def split_linear(f: Poly, x: int) -> Tuple[Poly, Poly]:
    """Return ``(f^1, f_1)`` with ``f = f^1*x + f_1``."""
    deg = f.degree(x)
    if deg > 1:
        raise DegreeTooHigh(x, deg, limit=1)
    parts = f.coefficients(x)
    z = Poly.zero()
    return parts.get(1, z), parts.get(0, z)


def resultant_linear(f: Poly, g: Poly, x: int) -> Poly:
    """The bracket ``f^1*g_1 - f_1*g^1`` of two polynomials linear in ``x``."""
    f1, f0 = split_linear(f, x)
    g1, g0 = split_linear(g, x)
    return f1 * g0 - f0 * g1


def discriminant(d: Poly, x: int) -> Poly:
    a, b, c = decompose_quadratic(d, x)
    return b * b - 4 * (a * c)


# square roots

_SQRT_PRIME = (1 << 61) - 1


def _probe_points(variables: Sequence[int], count: int = 3) -> Iterator[Dict[int, int]]:
    for k in range(count):
        yield {v: (7919 * (i + 3) * (k + 11) + 104729 * k + 17) % _SQRT_PRIME for i, v in enumerate(variables)}


def _is_square_mod(value: int, prime: int) -> bool:
    value %= prime
    return value == 0 or pow(value, (prime - 1) // 2, prime) == 1


def _eval_mod(p: Poly, point: Mapping[int, int], prime: int) -> int:
    total = 0
    for m, c in p.terms.items():
        t = c % prime
        for v, e in unpack(m):
            t = t * pow(point[v], e, prime) % prime
        total += t
    return total % prime


def _sqrt_rec(d: Poly) -> Optional[Poly]:
    if d.is_constant():
        c = d.constant_value()
        if c < 0:
            return None
        r = math.isqrt(c)
        return Poly.constant(r) if r * r == c else None
    v = min(d.variables())
    parts = d.coefficients(v)
    top = max(parts)
    low = min(parts)
    if top % 2 or low % 2:
        return None
    t = top // 2
    r_top = _sqrt_rec(parts[top])
    if r_top is None:
        return None
    xv = 1 << _shift(v)
    roots = {t: r_top}
    two_top = 2 * r_top
    zero = Poly.zero()
    for k in range(1, t - low // 2 + 1):
        j = t - k
        target = parts.get(2 * t - k, zero)
        acc = zero
        for i in range(j + 1, t):
            i2 = 2 * t - k - i
            if i2 <= i and i2 in roots and i in roots:
                prod = roots[i] * roots[i2]
                acc = acc + (prod if i == i2 else 2 * prod)
        rest = target - acc
        if not rest:
            continue
        try:
            roots[j] = divide_exact(rest, two_top)
        except NotDivisible:
            return None
    out: Dict[int, int] = {}
    for j, rj in roots.items():
        for m, c in rj.terms.items():
            out[m + j * xv] = c
    return Poly._raw(out)


def poly_sqrt(d: Poly) -> Optional[Poly]:
    """Exact square root with positive leading coefficient, or ``None``.

    ``None`` plays the role of *not a square*.  The root found by peeling
    coefficients in the lowest variable is always re-squared and compared
    before it is returned.
    """
    if not d:
        return Poly.zero()
    m, c = d.leading_term()
    if c < 0 or any(e % 2 for _, e in unpack(m)):
        return None
    variables = d.variables()
    if variables:
        for pt in _probe_points(variables):
            if not _is_square_mod(_eval_mod(d, pt, _SQRT_PRIME), _SQRT_PRIME):
                return None
    r = _sqrt_rec(d)
    if r is None:
        return None
    if r * r != d:
        return None
    return r.normalized()


# evaluation


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p < 4:
        return True
    if p % 2 == 0:
        return False
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


def eval_mod_p(f: Poly, point: Sequence[int] | Mapping[int, int], p: int) -> int:
    """Value of ``f`` at ``point`` modulo the prime ``p``.

    A sequence ``point`` is indexed by variable id starting from 1, so
    ``point[0]`` is the value of ``a1``.
    """
    if not _is_prime(p):
        raise PrimeRequired(f"{p} is not prime")
    if not isinstance(point, Mapping):
        point = {i + 1: int(x) for i, x in enumerate(point)}
    missing = set(f.variables()) - set(point)
    if missing:
        raise ValueError(f"point does not cover variables {sorted(missing)}")
    return _eval_mod(f, {v: x % p for v, x in point.items()}, p)


# substitution


def substitute(
    f: Poly,
    x: int,
    numerator: Poly,
    denominator: Optional[Poly] = None,
    clear: Optional[int] = None,
) -> Tuple[Poly, int]:
    """Substitute ``a<x> -> numerator / denominator`` and clear denominators.

    The result is ``denominator**clear * f(numerator / denominator)`` with
    ``clear`` defaulting to the degree of ``f`` in ``a<x>``.  Returns
    ``(primitive, content)`` where ``content`` is the packed monomial that was
    factored out of the cleared result.
    """
    parts = f.coefficients(x)
    deg = max(parts) if parts else 0
    if denominator is None:
        denominator = Poly.constant(1)
        clear = 0 if clear is None else clear
    if clear is None:
        clear = deg
    total = Poly.zero()
    num_pow = Poly.constant(1)
    for k in range(deg + 1):
        coeff = parts.get(k)
        if coeff is not None:
            if k <= clear:
                term = coeff * num_pow * denominator ** (clear - k)
            else:
                try:
                    term = divide_exact(coeff * num_pow, denominator ** (k - clear))
                except NotDivisible as exc:
                    raise NotPolynomialAfterClearing(
                        f"clearing exponent {clear} too small for degree {deg}"
                    ) from exc
            total = total + term
        if k < deg:
            num_pow = num_pow * numerator
    mono = total.monomial_content()
    return total.shift_down(mono), mono


def split_content(p: Poly) -> Tuple[int, int, Poly]:
    """Return ``(sign*integer content, packed monomial content, primitive part)``.

    The primitive part has positive leading coefficient, coprime coefficients
    and no monomial factor.
    """
    if not p:
        return 0, 0, p
    mono = p.monomial_content()
    q = p.shift_down(mono)
    c = q.content() * q.sign()
    return c, mono, q.div_int(c)


# text format

_TERM_RE = re.compile(r"([+-]?)([^+-]+)")
_VAR_RE = re.compile(r"a(\d+)(?:\^(\d+))?$")


def parse_poly(text: str) -> Poly:
    s = "".join(text.split())
    if not s:
        raise ParseError("empty polynomial")
    if s == "0":
        return Poly.zero()
    pos = 0
    out: Dict[int, int] = {}
    for match in _TERM_RE.finditer(s):
        if match.start() != pos:
            raise ParseError(f"cannot parse near {s[pos:]!r}")
        pos = match.end()
        sign = -1 if match.group(1) == "-" else 1
        coeff = sign
        exps: Dict[int, int] = {}
        for factor in match.group(2).split("*"):
            if not factor:
                raise ParseError(f"empty factor in {match.group(0)!r}")
            if factor.isdigit():
                coeff *= int(factor)
                continue
            vm = _VAR_RE.match(factor)
            if not vm:
                raise ParseError(f"bad factor {factor!r}")
            v = int(vm.group(1))
            exps[v] = exps.get(v, 0) + int(vm.group(2) or 1)
        m = pack(exps)
        out[m] = out.get(m, 0) + coeff
    if pos != len(s):
        raise ParseError(f"trailing input {s[pos:]!r}")
    return Poly(out)


def format_monomial(mono: Monomial) -> str:
    return "*".join(f"a{v}" if e == 1 else f"a{v}^{e}" for v, e in mono)


def format_poly(p: Poly) -> str:
    if not p:
        return "0"
    chunks = []
    for mono, c in p.items():
        body = format_monomial(mono)
        mag = abs(c)
        if not body:
            text = str(mag)
        elif mag == 1:
            text = body
        else:
            text = f"{mag}*{body}"
        if not chunks:
            chunks.append(text if c > 0 else f"-{text}")
        else:
            chunks.append(("+ " if c > 0 else "- ") + text)
    return " ".join(chunks)
