"""Bit strings, prefix-free sets and length spectra.

A prefix-free domain enters the thermodynamic quantities only through the
lengths of its programs, so the central object here is the
:class:`LengthSpectrum` ``n -> m(n)``.  Finite spectra are exact tables; rule
spectra are infinite and must ship a :class:`TailMajorant` that bounds
``sum_{n>=L} m(n) 2**(-n/T)`` and ``sum_{n>=L} n m(n) 2**(-n/T)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable, Iterable, Iterator, Mapping, NamedTuple

from .errors import NoConvergenceCertificate, SpecParseError, TailUnbounded
from .rigor import (
    DyadicInterval,
    bits_for,
    ceil_dyadic,
    floor_dyadic,
    pow2_floor,
    pow2,
)


# ---------------------------------------------------------------------------
# bit strings


class BitString(str):
    """A finite binary word stored as an ASCII ``0``/``1`` string.

    ``BitString("")`` is the empty string λ.
    """

    __slots__ = ()

    def __new__(cls, bits: str | Iterable[int] = ""):
        if not isinstance(bits, str):
            bits = "".join("1" if b else "0" for b in bits)
        if bits.strip("01"):
            raise ValueError(f"not a bit string: {bits!r}")
        return super().__new__(cls, bits)

    @property
    def length(self) -> int:
        return len(self)

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple(c == "1" for c in self)

    def __repr__(self):
        return f"BitString({str(self)!r})"


def canonical_key(s: str) -> tuple[int, str]:
    """Length-then-lexicographic order."""
    return len(s), s


def all_strings(max_len: int, min_len: int = 0) -> Iterator[BitString]:
    """Every bit string with ``min_len <= |s| <= max_len`` in canonical order."""
    for n in range(min_len, max_len + 1):
        for t in product("01", repeat=n):
            yield BitString("".join(t))


def is_prefix_free(strings: Iterable[str]) -> bool:
    """True iff no element is a prefix of a distinct element (duplicates fail)."""
    ordered = sorted(strings)
    # in lexicographic order a prefix sits immediately before some extension of it
    return not any(b.startswith(a) for a, b in zip(ordered, ordered[1:]))


@dataclass(frozen=True)
class PrefixSet:
    """A finite prefix-free set of nonempty bit strings, kept in canonical order."""

    members: tuple[BitString, ...]

    def __init__(self, members: Iterable[str]):
        ms = [BitString(m) for m in members]
        if len(set(ms)) != len(ms):
            raise ValueError("duplicate members")
        if "" in ms:
            raise ValueError("the empty string is not accepted as a program")
        if not is_prefix_free(ms):
            raise ValueError("set is not prefix-free")
        object.__setattr__(self, "members", tuple(sorted(ms, key=canonical_key)))

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    def __contains__(self, s):
        return s in self.members


# ---------------------------------------------------------------------------
# weights 2**(-n/T)


class _Weights:
    """Integer brackets for ``2**(-n/T)`` with ``frac_bits`` bits of relative precision.

    ``bracket(n)`` returns ``(lo, hi, shift)`` with
    ``lo * 2**shift <= 2**(-n/T) <= hi * 2**shift``.
    """

    def __init__(self, T: Fraction, frac_bits: int):
        self.p, self.q = T.numerator, T.denominator  # 1/T = q/p
        self.k = frac_bits
        self._roots: dict[int, int] = {}

    def bracket(self, n: int) -> tuple[int, int, int]:
        f, r = divmod(-n * self.q, self.p)
        if r == 0:
            one = 1 << self.k
            return one, one, f - self.k
        y = self._roots.get(r)
        if y is None:
            y = self._roots[r] = pow2_floor(r, self.p, self.k)
        return y, y + 1, f - self.k

    def interval(self, n: int) -> tuple[Fraction, Fraction]:
        lo, hi, s = self.bracket(n)
        if s >= 0:
            return Fraction(lo << s), Fraction(hi << s)
        return Fraction(lo, 1 << -s), Fraction(hi, 1 << -s)


def _fixed(m: int, s: int, up: bool) -> int:
    # m * 2**s rounded to an integer
    if s >= 0:
        return m << s
    return -((-m) >> -s) if up else m >> -s


class PartialSums(NamedTuple):
    """Enclosures of ``sum_{n<=L} m(n) w_n`` (``z``) and ``sum_{n<=L} n m(n) w_n`` (``n``)."""

    z_lo: Fraction
    z_hi: Fraction
    n_lo: Fraction
    n_hi: Fraction


def weighted_sums(spec: "LengthSpectrum", T: Fraction, L: int, bits: int) -> PartialSums:
    """Outward-rounded partial sums up to length ``L`` at absolute precision ``2**-bits``."""
    T = Fraction(T)
    w = _Weights(T, bits + 8)
    zl = zh = nl = nh = 0
    for n, m in spec.items_upto(L):
        lo, hi, s = w.bracket(n)
        s += bits
        zl += _fixed(m * lo, s, False)
        zh += _fixed(m * hi, s, True)
        nl += _fixed(n * m * lo, s, False)
        nh += _fixed(n * m * hi, s, True)
    den = 1 << bits
    return PartialSums(Fraction(zl, den), Fraction(zh, den), Fraction(nl, den), Fraction(nh, den))


# ---------------------------------------------------------------------------
# tail majorants


class Bounds(NamedTuple):
    lo: Fraction
    hi: Fraction


def _xpow(T: Fraction, L: int, bits: int) -> DyadicInterval:
    # 2**(-L/T) with relative precision of about `bits` bits
    q = Fraction(-L) / T
    return pow2(q, Fraction(1, 1 << max(1, bits - math.floor(q) + 2)))


class TailMajorant:
    """Certified bounds on the tails of a spectrum's weighted sums.

    ``z_tail(L, T, bits)`` bounds ``sum_{n>=L} m(n) 2**(-n/T)`` and ``n_tail``
    bounds ``sum_{n>=L} n m(n) 2**(-n/T)``.  Both return a :class:`Bounds`
    pair or raise :class:`NoConvergenceCertificate` when the majorant says
    nothing at temperature ``T``.
    """

    name = "abstract"

    def z_tail(self, L: int, T: Fraction, bits: int) -> Bounds:
        raise NotImplementedError

    def n_tail(self, L: int, T: Fraction, bits: int) -> Bounds:
        raise NotImplementedError

    def to_dict(self) -> dict:
        return {"name": self.name}

    def _round(self, lo: Fraction, hi: Fraction, bits: int) -> Bounds:
        return Bounds(max(Fraction(0), floor_dyadic(Fraction(lo), bits + 4)), ceil_dyadic(Fraction(hi), bits + 4))


class KraftTail(TailMajorant):
    """Generic majorant from ``m(n) <= 2**n``; only certifies ``T < 1``.

    With ``y = 2**(1 - 1/T)``: ``sum_{n>=L} y**n = y**L / (1 - y)`` and
    ``sum_{n>=L} n y**n = y**L (L - (L-1) y) / (1 - y)**2``.
    """

    name = "kraft"

    def _y(self, L, T, bits):
        if T >= 1:
            raise NoConvergenceCertificate(f"generic Kraft majorant needs T < 1, got T={T}")
        q = 1 - 1 / Fraction(T)
        y = pow2(q, Fraction(1, 1 << (bits + 8))).hi
        yl = pow2(q * L, Fraction(1, 1 << (bits + 8))).hi
        return y, yl

    def z_tail(self, L, T, bits):
        y, yl = self._y(L, T, bits)
        return self._round(0, yl / (1 - y), bits)

    def n_tail(self, L, T, bits):
        y, yl = self._y(L, T, bits)
        return self._round(0, yl * (L - (L - 1) * y) / (1 - y) ** 2, bits)


class GeometricTail(TailMajorant):
    """Majorant for ``m(n) = c`` (exact) with ``x = 2**(-1/T)``, valid for every ``T > 0``.

    ``sum_{n>=L} c x**n = c x**L / (1 - x)``;
    ``sum_{n>=L} n c x**n = c x**L (L - (L-1) x) / (1 - x)**2``.
    Both are increasing in ``x`` so the bracket on ``x`` brackets the tail.
    """

    name = "geometric"

    def __init__(self, c: int = 1):
        self.c = int(c)

    def to_dict(self):
        return {"name": self.name, "c": self.c}

    def _x(self, L, T, bits):
        T = Fraction(T)
        x = pow2(-1 / T, Fraction(1, 1 << (bits + 8)))
        xl = _xpow(T, L, bits + 8)
        return x, xl

    def z_tail(self, L, T, bits):
        x, xl = self._x(L, T, bits)
        return self._round(self.c * xl.lo / (1 - x.lo), self.c * xl.hi / (1 - x.hi), bits)

    def n_tail(self, L, T, bits):
        x, xl = self._x(L, T, bits)

        def f(xv, xlv):
            return self.c * xlv * (L - (L - 1) * xv) / (1 - xv) ** 2

        return self._round(f(x.lo, xl.lo), f(x.hi, xl.hi), bits)


class PowerLawTail(TailMajorant):
    """Majorant for ``m(n) = floor(2**n / (a n**b))`` with integers ``a >= 2``, ``b >= 2``.

    ``T < 1``: with ``y = 2**(1-1/T)``, ``sum_{n>=L} y**n/(a n**b) <= y**L / ((1-y) a L**b)``.
    ``T = 1``: convexity of ``x**-b`` gives
    ``L**(1-b)/(b-1) <= sum_{n>=L} n**-b <= (L-1/2)**(1-b)/(b-1)``;
    the floor costs at most ``2**-n`` per term.  The energy numerator at
    ``T = 1`` needs ``b > 2``.  No certificate exists for ``T > 1``.
    """

    name = "power_law"

    def __init__(self, a: int = 2, b: int = 2):
        self.a, self.b = int(a), int(b)

    def to_dict(self):
        return {"name": self.name, "a": self.a, "b": self.b}

    def _integral(self, L, p, bits):
        # bounds on sum_{n>=L} n**-p / a for p > 1
        lo = Fraction(1, L ** (p - 1)) / (self.a * (p - 1))
        hi = Fraction(2 ** (p - 1), (2 * L - 1) ** (p - 1)) / (self.a * (p - 1))
        return lo, hi

    def z_tail(self, L, T, bits):
        T = Fraction(T)
        if T < 1:
            y, yl = KraftTail()._y(L, T, bits)
            return self._round(0, yl / ((1 - y) * self.a * L ** self.b), bits)
        if T == 1:
            lo, hi = self._integral(L, self.b, bits)
            return self._round(lo - Fraction(2, 1 << L), hi, bits)
        raise NoConvergenceCertificate(f"power-law spectrum diverges for T={T} > 1")

    def n_tail(self, L, T, bits):
        T = Fraction(T)
        if T < 1:
            y, yl = KraftTail()._y(L, T, bits)
            return self._round(0, yl / ((1 - y) * self.a * L ** (self.b - 1)), bits)
        if T == 1 and self.b > 2:
            lo, hi = self._integral(L, self.b - 1, bits)
            return self._round(lo - Fraction(L + 1, 1 << (L - 1)), hi, bits)
        raise NoConvergenceCertificate(f"energy numerator of power-law(a={self.a}, b={self.b}) diverges at T={T}")


# ---------------------------------------------------------------------------
# spectra


class LengthSpectrum:
    """Multiplicity function ``n -> m(n)`` over positive lengths."""

    name = "spectrum"
    tail: TailMajorant

    def m(self, n: int) -> int:
        raise NotImplementedError

    def values(self, L: int) -> list[int]:
        """``[m(1), ..., m(L)]``."""
        return [self.m(n) for n in range(1, L + 1)]

    def items_upto(self, L: int) -> Iterator[tuple[int, int]]:
        for n, v in enumerate(self.values(L), start=1):
            if v:
                yield n, v

    @property
    def is_finite(self) -> bool:
        return False

    @property
    def max_length(self) -> int | None:
        return None

    def lengths(self, L: int) -> list[int]:
        return [n for n, _ in self.items_upto(L)]

    def to_dict(self) -> dict:
        raise NotImplementedError


class FiniteSpectrum(LengthSpectrum):
    """Exact table of multiplicities; zero entries are dropped."""

    name = "finite"

    def __init__(self, entries: Mapping[int, int] | None = None):
        clean = {}
        for n, v in dict(entries or {}).items():
            n, v = int(n), int(v)
            if v < 0:
                raise ValueError(f"negative multiplicity at length {n}")
            if v == 0:
                continue
            if n < 1:
                raise ValueError("spectra index positive lengths only")
            if v > 1 << n:
                raise ValueError(f"m({n}) = {v} exceeds 2**{n}")
            clean[n] = v
        self.entries = dict(sorted(clean.items()))
        if self.kraft() > 1:
            raise ValueError(f"Kraft sum {self.kraft()} exceeds 1; not realizable as a prefix-free set")
        self.tail = _ZeroTail()

    def kraft(self) -> Fraction:
        return sum((Fraction(v, 1 << n) for n, v in self.entries.items()), Fraction(0))

    def m(self, n):
        return self.entries.get(n, 0)

    def items_upto(self, L):
        for n, v in self.entries.items():
            if n <= L:
                yield n, v

    def values(self, L):
        return [self.entries.get(n, 0) for n in range(1, L + 1)]

    @property
    def is_finite(self):
        return True

    @property
    def max_length(self):
        return max(self.entries, default=0)

    def total(self) -> int:
        return sum(self.entries.values())

    def as_dict(self) -> dict[int, int]:
        return dict(self.entries)

    def to_dict(self):
        return {"entries": {str(n): v for n, v in self.entries.items()}}

    def __eq__(self, other):
        if isinstance(other, FiniteSpectrum):
            return self.entries == other.entries
        if isinstance(other, Mapping):
            return self.entries == {int(k): v for k, v in other.items() if v}
        return NotImplemented

    def __hash__(self):
        return hash(tuple(self.entries.items()))

    def __repr__(self):
        return f"FiniteSpectrum({self.entries})"


class _ZeroTail(TailMajorant):
    name = "zero"

    def z_tail(self, L, T, bits):
        return Bounds(Fraction(0), Fraction(0))

    n_tail = z_tail


class RuleSpectrum(LengthSpectrum):
    """Infinite spectrum given by a total integer rule and a tail majorant."""

    def __init__(self, rule: Callable[[int], int], tail: TailMajorant, name: str = "rule", params: dict | None = None):
        self.rule = rule
        self.tail = tail
        self.name = name
        self.params = dict(params or {})
        self._cache: list[int] = []

    def values(self, L):
        c = self._cache
        for n in range(len(c) + 1, L + 1):
            v = int(self.rule(n))
            if v < 0 or v > 1 << n:
                raise ValueError(f"rule {self.name} gives invalid m({n}) = {v}")
            c.append(v)
        return c[:L]

    def m(self, n):
        return self.values(n)[n - 1]

    def to_dict(self):
        return {"rule": {"name": self.name, **self.params}, "tail_majorant": self.tail.to_dict()}

    def __repr__(self):
        args = ", ".join(f"{k}={v}" for k, v in self.params.items())
        return f"RuleSpectrum({self.name}({args}))"


def unary_spectrum() -> RuleSpectrum:
    """``m(n) = 1`` for every ``n >= 1``: the lengths of ``{0**l 1 : l >= 0}``."""
    return RuleSpectrum(lambda n: 1, GeometricTail(1), "unary")


def power_law_spectrum(a: int = 2, b: int = 2) -> RuleSpectrum:
    """``m(n) = floor(2**n / (a n**b))``.

    The Kraft sum is at most ``zeta(b)/a <= b/((b-1) a)``, which must not
    exceed 1; for the default ``a = b = 2`` it is at most ``pi**2/12``.
    """
    a, b = int(a), int(b)
    if a < 2 or b < 2 or Fraction(b, (b - 1) * a) > 1:
        raise ValueError(f"power_law(a={a}, b={b}) has no Kraft certificate (need a >= 2, b >= 2)")
    return RuleSpectrum(lambda n: (1 << n) // (a * n ** b), PowerLawTail(a, b), "power_law", {"a": a, "b": b})


RULES: dict[str, tuple[Callable[..., RuleSpectrum], str]] = {
    "unary": (unary_spectrum, "geometric"),
    "power_law": (power_law_spectrum, "power_law"),
}


def spectrum_from_dict(d: Mapping) -> LengthSpectrum:
    """Inverse of ``to_dict`` for finite and registered rule spectra."""
    if "entries" in d:
        try:
            return FiniteSpectrum({int(k): int(v) for k, v in d["entries"].items()})
        except (TypeError, ValueError, AttributeError) as exc:
            raise SpecParseError(f"bad spectrum entries: {exc}") from exc
    rule = d.get("rule")
    if not isinstance(rule, Mapping) or "name" not in rule:
        raise SpecParseError("spectrum needs either 'entries' or a 'rule' with a 'name'")
    params = {k: v for k, v in rule.items() if k != "name"}
    try:
        factory, certified = RULES[rule["name"]]
    except KeyError:
        raise SpecParseError(f"unknown spectrum rule {rule['name']!r}") from None
    try:
        spec = factory(**params)
    except (TypeError, ValueError) as exc:
        raise SpecParseError(str(exc)) from exc
    tm = d.get("tail_majorant")
    if tm is None:
        raise SpecParseError(f"rule spectrum {rule['name']!r} must name its tail_majorant")
    tname = tm.get("name") if isinstance(tm, Mapping) else tm
    if tname == "kraft":
        spec.tail = KraftTail()
    elif tname != certified:
        raise SpecParseError(f"tail majorant {tname!r} is not certified for rule {rule['name']!r}")
    return spec


# ---------------------------------------------------------------------------
# operations


def spectrum_of(members: Iterable[str]) -> FiniteSpectrum:
    """Length spectrum of a finite prefix-free set (λ contributes nothing)."""
    counts: dict[int, int] = {}
    for s in members:
        if len(s):
            counts[len(s)] = counts.get(len(s), 0) + 1
    return FiniteSpectrum(counts)


_MAX_KRAFT_LENGTH = 1 << 20


def kraft_sum(spec: LengthSpectrum, eps=Fraction(1, 1 << 30)) -> DyadicInterval:
    """Enclosure of ``sum_n m(n) 2**-n`` with width at most ``eps``.

    Finite spectra give the exact value.  Rule spectra are summed exactly up to
    a cutoff ``L`` that doubles until the tail majorant at ``T = 1`` fits.
    """
    if spec.is_finite:
        return DyadicInterval.point(spec.kraft())
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("rule spectra need eps > 0")
    bits = bits_for(eps) + 4
    L = 16
    while L <= _MAX_KRAFT_LENGTH:
        try:
            t = spec.tail.z_tail(L + 1, Fraction(1), bits)
        except NoConvergenceCertificate as exc:
            raise TailUnbounded(str(exc)) from exc
        if t.hi - t.lo <= eps / 2:
            vals = spec.values(L)
            acc = sum(v << (L - n) for n, v in enumerate(vals, start=1))
            part = Fraction(acc, 1 << L)
            return DyadicInterval(floor_dyadic(part + t.lo, bits + 4), ceil_dyadic(part + t.hi, bits + 4))
        L *= 2
    raise TailUnbounded(f"tail majorant of {spec!r} stays above eps={eps} up to length {_MAX_KRAFT_LENGTH}")
