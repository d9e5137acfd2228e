"""Composition of machines and its image on length spectra.

The composite ``C1 ⊘ ... ⊘ CN`` runs on concatenations ``p1 ... pN`` with
``pi`` in ``Dom Ci`` and returns ``C1(p1)``.  Lengths add, so the composite
spectrum is the convolution of the factor spectra and ``Z`` factorises while
``F``, ``E`` and ``S`` add up.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np

from .core import (
    Bounds,
    FiniteSpectrum,
    LengthSpectrum,
    TailMajorant,
    weighted_sums,
)
from .errors import EmptyDomain, PredicateFailed
from .machines import (
    HALTED,
    NO_HALT,
    NOT_IN_DOMAIN,
    Machine,
    Outcome,
    TableMachine,
    UniversalMachine,
    check_predicates,
    run,
)
from .rigor import pow2


# ---------------------------------------------------------------------------
# spectra


def _totals(spec: LengthSpectrum, T: Fraction, bits: int) -> tuple[Fraction, Fraction]:
    """Upper bounds on the full ``Z`` and energy-numerator sums."""
    L = max(16, spec.max_length or 0)
    s = weighted_sums(spec, T, L, bits)
    tz = spec.tail.z_tail(L + 1, T, bits)
    tn = spec.tail.n_tail(L + 1, T, bits)
    return s.z_hi + tz.hi, s.n_hi + tn.hi


class ConvolutionTail(TailMajorant):
    """Tail bounds for ``a ⊛ b`` built from the factors' majorants.

    With a finite factor ``a`` the tail splits exactly as
    ``sum_i a_i w_i * tail_b(L - i)``.  Otherwise every pair with
    ``i + j >= L`` has ``i >= h`` or ``j >= h`` for ``h = ceil(L/2)``, giving
    ``tail_a(h) Z_b + Z_a tail_b(h)`` (and the analogous four-term bound for
    the energy numerator).
    """

    name = "convolution"

    def __init__(self, a: LengthSpectrum, b: LengthSpectrum):
        self.a, self.b = a, b
        self._tot = {}

    def to_dict(self):
        return {"name": self.name}

    def _totals(self, spec, T, bits):
        key = (id(spec), T, bits)
        if key not in self._tot:
            self._tot[key] = _totals(spec, T, bits)
        return self._tot[key]

    def _finite_split(self, fin, other, L, T, bits, with_n):
        zl = zh = nl = nh = Fraction(0)
        for i, ai in fin.items_upto(fin.max_length):
            w = pow2(Fraction(-i) / T, Fraction(1, 1 << (bits + 8 + i)))
            k = max(L - i, 1)
            tz = other.tail.z_tail(k, T, bits) if k > 1 else None
            if tz is None:
                # the whole of `other` lies beyond the cut
                s = weighted_sums(other, T, 16, bits + 8)
                t16 = other.tail.z_tail(17, T, bits)
                tz = Bounds(s.z_lo + t16.lo, s.z_hi + t16.hi)
            zl += ai * w.lo * tz.lo
            zh += ai * w.hi * tz.hi
            if with_n:
                if k > 1:
                    tn = other.tail.n_tail(k, T, bits)
                else:
                    t16 = other.tail.n_tail(17, T, bits)
                    tn = Bounds(s.n_lo + t16.lo, s.n_hi + t16.hi)
                nl += ai * w.lo * (i * tz.lo + tn.lo)
                nh += ai * w.hi * (i * tz.hi + tn.hi)
        return (zl, zh), (nl, nh)

    def _bounds(self, L, T, bits, with_n):
        T = Fraction(T)
        a, b = self.a, self.b
        if a.is_finite or b.is_finite:
            fin, other = (a, b) if a.is_finite else (b, a)
            return self._finite_split(fin, other, L, T, bits, with_n)
        h = (L + 1) // 2
        za, na = self._totals(a, T, bits)
        zb, nb = self._totals(b, T, bits)
        ta, tb = a.tail.z_tail(h, T, bits), b.tail.z_tail(h, T, bits)
        z = (Fraction(0), ta.hi * zb + za * tb.hi)
        n = (Fraction(0), Fraction(0))
        if with_n:
            nta, ntb = a.tail.n_tail(h, T, bits), b.tail.n_tail(h, T, bits)
            n = (Fraction(0), nta.hi * zb + ta.hi * nb + za * ntb.hi + na * tb.hi)
        return z, n

    def z_tail(self, L, T, bits):
        (lo, hi), _ = self._bounds(L, T, bits, False)
        return self._round(lo, hi, bits)

    def n_tail(self, L, T, bits):
        _, (lo, hi) = self._bounds(L, T, bits, True)
        return self._round(lo, hi, bits)


class ConvolvedSpectrum(LengthSpectrum):
    """Lazy convolution of two spectra, at least one of them infinite."""

    name = "convolution"

    def __init__(self, a: LengthSpectrum, b: LengthSpectrum):
        self.a, self.b = a, b
        self.tail = ConvolutionTail(a, b)
        self._cache: list[int] = []

    def values(self, L):
        if L > len(self._cache):
            n = max(L, 2 * len(self._cache))
            av = np.array([0] + self.a.values(n), dtype=object)
            bv = np.array([0] + self.b.values(n), dtype=object)
            # index k of the full convolution is the total length k
            self._cache = [int(v) for v in np.convolve(av, bv)[1:n + 1]]
        return self._cache[:L]

    def m(self, n):
        return self.values(n)[n - 1]

    def to_dict(self):
        return {"convolution": [self.a.to_dict(), self.b.to_dict()]}

    def __repr__(self):
        return f"({self.a!r} ⊛ {self.b!r})"


def convolve_spectra(a: LengthSpectrum, b: LengthSpectrum) -> LengthSpectrum:
    """Spectrum of all concatenations ``p q``: ``m(n) = sum_i m_a(i) m_b(n - i)``."""
    if a.is_finite and b.is_finite:
        out: dict[int, int] = {}
        for i, x in a.entries.items():
            for j, y in b.entries.items():
                out[i + j] = out.get(i + j, 0) + x * y
        return FiniteSpectrum(out)
    return ConvolvedSpectrum(a, b)


# ---------------------------------------------------------------------------
# machines


@dataclass(frozen=True, eq=False)
class CompositeMachine(Machine):
    factors: tuple
    name: str = ""
    kind: str = field(default="composite", init=False)

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise ValueError("a composite needs at least one factor")
        if not self.name:
            object.__setattr__(self, "name", "(" + " ⊘ ".join(f.name for f in self.factors) + ")")

    @functools.cached_property
    def _spectrum(self):
        return functools.reduce(convolve_spectra, (f.spectrum() for f in self.factors))

    def spectrum(self):
        return self._spectrum

    @property
    def is_lower_bound(self):
        return any(f.is_lower_bound for f in self.factors)

    @property
    def materializable(self) -> bool:
        return all(isinstance(f, TableMachine) or (isinstance(f, CompositeMachine) and f.materializable)
                   for f in self.factors)

    def materialize_table(self) -> dict:
        """Explicit ``program -> output`` map (table factors only)."""
        if not self.materializable:
            raise TypeError("only composites of table machines can be materialized")
        tables = [f.table if isinstance(f, TableMachine) else f.materialize_table() for f in self.factors]
        out = {}
        for parts in product(*(t.items() for t in tables)):
            out["".join(p for p, _ in parts)] = parts[0][1]
        return out

    def domain(self) -> list[str]:
        return list(self.materialize_table())

    def run(self, p: str, steps: int) -> Outcome:
        result, timed_out = _parse(self.factors, p, steps)
        if result is not None:
            return Outcome(HALTED, result, 0)
        return Outcome(NO_HALT if timed_out else NOT_IN_DOMAIN)

    def to_dict(self):
        return {"kind": "composite", "name": self.name, "factors": [f.to_dict() for f in self.factors]}


def _parse(factors, p, steps):
    """Split ``p`` into one program per factor; returns (first output, any timeout)."""
    f, rest = factors[0], factors[1:]
    timed_out = False
    for k in range(1, len(p) + 1):
        head, tail = p[:k], p[k:]
        oc = run(f, head, steps)
        if oc.kind == NO_HALT:
            timed_out = True
            continue
        if not oc.halted:
            continue
        if not rest:
            if not tail:
                return oc.output, timed_out
            continue
        sub, sub_timeout = _parse(rest, tail, steps)
        timed_out |= sub_timeout
        if sub is not None:
            return oc.output, timed_out
    return None, timed_out


def _nonempty(m: Machine) -> bool:
    if isinstance(m, UniversalMachine):
        return True  # the program 10 halts
    spec = m.spectrum()
    if spec.is_finite:
        return bool(spec.entries)
    return bool(spec.lengths(256))


def compose(ms) -> Machine:
    """``ms[0] ⊘ ms[1] ⊘ ...``; a single factor is returned unchanged."""
    ms = list(ms)
    if not ms:
        raise ValueError("compose needs at least one machine")
    for m in ms:
        if not _nonempty(m):
            raise EmptyDomain(f"machine {m.name} has an empty domain")
    if len(ms) == 1:
        return ms[0]
    return CompositeMachine(tuple(ms))


def power(m: Machine, n: int) -> Machine:
    """``m ⊘ m ⊘ ... ⊘ m`` with ``n`` factors."""
    if n < 1:
        raise ValueError("power needs n >= 1")
    return compose([m] * n)


def vn_family(v: Machine, c: Machine, n: int) -> Machine:
    """``V_n = v ⊘ c**n`` for a physically reasonable computable measure machine ``c``."""
    if n < 1:
        raise ValueError("vn_family needs n >= 1")
    pr = check_predicates(c)
    if pr.physically_reasonable is not True:
        raise PredicateFailed(f"{c.name} is not known to be physically reasonable")
    if pr.computable_measure is not True:
        raise PredicateFailed(f"{c.name} is not known to be a computable measure machine")
    if not _nonempty(v):
        raise EmptyDomain(f"machine {v.name} has an empty domain")
    return CompositeMachine((v, power(c, n)), name=f"{v.name}_{n}")
