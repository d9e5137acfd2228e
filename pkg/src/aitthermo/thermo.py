"""Partition function, free energy, energy and entropy of a program domain.

With weights ``w_n = 2**(-n/T)`` and a length spectrum ``m``::

    Z = sum_n m(n) w_n
    F = -T log2 Z
    E = (sum_n n m(n) w_n) / Z
    S = (E - F) / T

Series are summed by length up to a cutoff ``L`` that doubles until the
spectrum's tail majorant, plus rounding, fits inside the requested width.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .core import LengthSpectrum, KraftTail, _Weights, _fixed, weighted_sums
from .errors import BudgetExhausted, NoConvergenceCertificate, ZoneError
from .rigor import DyadicInterval, bits_for, log2

QUANTITIES = ("Z", "F", "E", "S")
DEFAULT_EPS = Fraction(1, 1 << 40)
MAX_LENGTH = 1 << 16


@dataclass(frozen=True)
class Temperature:
    value: Fraction

    def __init__(self, value):
        if isinstance(value, Temperature):
            value = value.value
        if isinstance(value, str):
            value = parse_rational(value)
        v = Fraction(value)
        if v <= 0:
            raise ValueError(f"temperature must be positive, got {v}")
        object.__setattr__(self, "value", v)

    @property
    def zone(self) -> str:
        if self.value < 1:
            return "sub_unit"
        return "unit" if self.value == 1 else "super_unit"

    def __str__(self):
        return str(self.value)


TempLike = Union[Temperature, Fraction, int, str]


def parse_rational(text: str) -> Fraction:
    """Parse ``num/den``, an integer, a decimal literal or ``2^-k``."""
    t = text.strip()
    if t.startswith("2^"):
        return Fraction(2) ** int(t[2:])
    return Fraction(t)


def _T(T: TempLike) -> Fraction:
    return Temperature(T).value


# ---------------------------------------------------------------------------
# truncated sums


def partial_Z(spec: LengthSpectrum, T: TempLike, L: int, eps=DEFAULT_EPS) -> DyadicInterval:
    """Enclosure of ``sum_{n<=L} m(n) 2**(-n/T)`` of width at most ``eps`` (``eps=0``: exact)."""
    T = _T(T)
    if L < 1:
        raise ValueError("L must be >= 1")
    eps = Fraction(eps)
    if eps == 0:
        z, _ = _exact_sums(spec, T, L)
        return DyadicInterval.point(z)
    bits = bits_for(eps) + L.bit_length() + 2
    while True:
        s = weighted_sums(spec, T, L, bits)
        if s.z_hi - s.z_lo <= eps:
            return DyadicInterval(s.z_lo, s.z_hi)
        bits += 8


def _exact_sums(spec, T, L):
    if T.numerator != 1:
        raise ValueError(f"exact evaluation needs 1/T to be an integer, got T={T}")
    k = T.denominator
    z = sum((Fraction(m, 1 << (k * n)) for n, m in spec.items_upto(L)), Fraction(0))
    nn = sum((Fraction(n * m, 1 << (k * n)) for n, m in spec.items_upto(L)), Fraction(0))
    return z, nn


def generic_tail_bound(T: TempLike, L: int) -> Fraction:
    """``2**(L(1-1/T)) / (1 - 2**(1-1/T))``: bounds ``sum_{n>=L} m(n) 2**(-n/T)`` for any Kraft-valid ``m``."""
    T = _T(T)
    if T >= 1:
        raise ZoneError(f"tail bound needs T < 1, got {T}")
    return KraftTail().z_tail(L, T, 64).hi


def tail_bound_Z(spec: LengthSpectrum, T: TempLike, L: int) -> Fraction:
    """Certified upper bound on ``sum_{n>=L} m(n) 2**(-n/T)``.

    This dominates the truncation error of ``partial_Z`` at ``L`` (which only
    misses lengths ``> L``).  Uses the spectrum's own majorant, capped by the
    generic Kraft bound.
    """
    T = _T(T)
    if T >= 1:
        raise ZoneError(f"tail_bound_Z needs T < 1, got {T}")
    generic = generic_tail_bound(T, L)
    try:
        own = spec.tail.z_tail(L, T, 64).hi
    except NoConvergenceCertificate:
        return generic
    return min(own, generic)


@dataclass(frozen=True)
class _Sums:
    z: DyadicInterval          # limit enclosure of Z
    n: DyadicInterval | None   # limit enclosure of the energy numerator
    z_partial: DyadicInterval
    n_partial: DyadicInterval | None
    z_tail: Fraction
    n_tail: Fraction | None
    L: int


def _enclose_sums(spec: LengthSpectrum, T: Fraction, eps: Fraction, need_n: bool) -> _Sums:
    if spec.is_finite:
        L = max(1, spec.max_length)
    else:
        L = 16
    bits = bits_for(eps) + 2
    while True:
        tz = spec.tail.z_tail(L + 1, T, bits)
        tn = spec.tail.n_tail(L + 1, T, bits) if need_n else None
        if tz.hi - tz.lo > eps / 2 or (tn is not None and tn.hi - tn.lo > eps / 2):
            if L >= MAX_LENGTH:
                raise NoConvergenceCertificate(
                    f"tail of {spec!r} at T={T} stays above {eps} up to length {MAX_LENGTH}")
            L *= 2
            continue
        s = weighted_sums(spec, T, L, bits + L.bit_length() + 2)
        z = DyadicInterval(s.z_lo + tz.lo, s.z_hi + tz.hi)
        n = DyadicInterval(s.n_lo + tn.lo, s.n_hi + tn.hi) if need_n else None
        if z.width <= eps and (n is None or n.width <= eps):
            return _Sums(
                z, n,
                DyadicInterval(s.z_lo, s.z_hi),
                DyadicInterval(s.n_lo, s.n_hi) if need_n else None,
                tz.hi, tn.hi if need_n else None, L,
            )
        bits += 8


# ---------------------------------------------------------------------------
# derived quantities


def _prec(bits: int, iv: DyadicInterval) -> int:
    mag = max(abs(iv.lo), abs(iv.hi))
    return bits + 8 + max(0, int(mag).bit_length())


def _derive(z: DyadicInterval, n: DyadicInterval | None, T: Fraction, bits: int, want: set[str]):
    out = {"Z": z}
    if want & {"F", "S"}:
        lg = log2(z, Fraction(1, 1 << (bits + 2)))
        out["F"] = lg.scale(-T, _prec(bits, lg))
    if want & {"E", "S"}:
        out["E"] = n.div(z, _prec(bits, n) + max(0, -z.lo.numerator.bit_length() + z.lo.denominator.bit_length()))
    if "S" in want:
        d = out["E"] - out["F"]
        out["S"] = d.scale(1 / T, _prec(bits, d) + T.denominator.bit_length())
    return out


@dataclass(frozen=True)
class ThermoReport:
    """Joint enclosures at one temperature.

    ``tail_certificates[q]`` bounds ``|q_L - q|``, the distance between the
    value truncated at ``truncation_length`` and the limit.  Quantities that
    were not requested are ``None``.
    """

    T: Fraction
    Z: DyadicInterval
    F: DyadicInterval | None
    E: DyadicInterval | None
    S: DyadicInterval | None
    truncation_length: int
    tail_certificates: dict = field(default_factory=dict)

    def __getitem__(self, q: str) -> DyadicInterval:
        return getattr(self, q)

    def check_identities(self, bits: int = 64) -> bool:
        """F meets ``-T log2 Z`` and S meets ``(E - F)/T`` (when present)."""
        ok = True
        if self.F is not None:
            ok &= self.F.intersects(log2(self.Z, Fraction(1, 1 << bits)).scale(-self.T))
        if self.S is not None:
            ok &= self.S.intersects((self.E - self.F).scale(1 / self.T))
        return bool(ok)


def evaluate(spec: LengthSpectrum, T: TempLike, eps=DEFAULT_EPS, quantities: Iterable[str] = QUANTITIES) -> ThermoReport:
    """Enclose every requested quantity to width at most ``eps``."""
    T = _T(T)
    want = set(quantities)
    if not want <= set(QUANTITIES):
        raise ValueError(f"unknown quantities {sorted(want - set(QUANTITIES))}")
    want.add("Z")
    eps = Fraction(eps)
    if eps == 0:
        if want != {"Z"}:
            raise ValueError("eps=0 is only supported for Z")
        if not spec.is_finite:
            raise ValueError("eps=0 needs a finite spectrum")
        z = partial_Z(spec, T, max(1, spec.max_length), 0)
        return ThermoReport(T, z, None, None, None, max(1, spec.max_length), {"Z": Fraction(0)})
    need_n = bool(want & {"E", "S"})
    inner = eps / 4
    while True:
        s = _enclose_sums(spec, T, inner, need_n)
        if s.z.lo <= 0:
            if s.z.hi == 0:
                if want == {"Z"}:
                    return ThermoReport(T, s.z, None, None, None, s.L, {"Z": s.z_tail})
                raise ValueError("empty domain: F, E and S are undefined")
            inner = min(inner, s.z.hi) / 256
            continue
        bits = bits_for(inner)
        vals = _derive(s.z, s.n, T, bits, want)
        worst = max(vals[q].width for q in want)
        if worst <= eps:
            break
        ratio = worst / eps
        inner /= 1 << (ratio.numerator // ratio.denominator).bit_length() + 2
    certs = {"Z": s.z_tail}
    if want - {"Z"}:
        zh = s.z_partial.hull(s.z)
        nh = s.n_partial.hull(s.n) if need_n else None
        hull = _derive(zh, nh, T, bits, want)
        for q in want - {"Z"}:
            certs[q] = hull[q].width
    return ThermoReport(T, vals["Z"], vals.get("F"), vals.get("E"), vals.get("S"), s.L, certs)


def eval_Z(spec, T, eps=DEFAULT_EPS) -> DyadicInterval:
    return evaluate(spec, T, eps, ("Z",)).Z


def eval_F(spec, T, eps=DEFAULT_EPS) -> DyadicInterval:
    return evaluate(spec, T, eps, ("F",)).F


def eval_E(spec, T, eps=DEFAULT_EPS) -> DyadicInterval:
    return evaluate(spec, T, eps, ("E",)).E


def eval_S(spec, T, eps=DEFAULT_EPS) -> DyadicInterval:
    return evaluate(spec, T, eps, ("S",)).S


def sweep(spec: LengthSpectrum, temps: Sequence[TempLike], eps=DEFAULT_EPS,
          quantities: Iterable[str] = QUANTITIES) -> list[ThermoReport]:
    """Evaluate at each temperature; results are ordered like ``temps``."""
    qs = tuple(quantities)
    return [evaluate(spec, T, eps, qs) for T in temps]


# ---------------------------------------------------------------------------
# divergence


@dataclass(frozen=True)
class DivergenceWitness:
    L: int
    lower_bound: Fraction


def detect_divergence(spec: LengthSpectrum, T: TempLike, M, max_length: int = 4096) -> int:
    """Least ``L`` whose truncated partition sum provably exceeds ``M``.

    Raises :class:`BudgetExhausted` when no such ``L <= max_length`` exists.
    If the spectrum's majorant bounds the full sum by ``M`` or less the search
    stops at once and the exception carries that convergence certificate.
    """
    return detect_divergence_witness(spec, T, M, max_length).L


def detect_divergence_witness(spec, T, M, max_length: int = 4096) -> DivergenceWitness:
    T = _T(T)
    if T <= 1:
        raise ZoneError(f"divergence search needs T > 1, got {T}")
    M = Fraction(M)
    cert = _convergence_certificate(spec, T)
    if cert is not None and cert <= M:
        raise BudgetExhausted(
            f"Z(T={T}) <= {float(cert):.12g} <= M={M}: the series converges below M",
            certificate=f"geometric majorant: Z(T={T}) <= {cert}")
    bits = 64
    w = _Weights(T, bits + 8)
    lo = hi = 0
    for n, m in spec.items_upto(max_length):
        a, b, s = w.bracket(n)
        lo += _fixed(m * a, s + bits, False)
        hi += _fixed(m * b, s + bits, True)
        if Fraction(lo, 1 << bits) > M:
            return DivergenceWitness(n, Fraction(lo, 1 << bits))
        if Fraction(hi, 1 << bits) > M:
            exact = partial_Z(spec, T, n, Fraction(1, 1 << 512))
            if exact.lo > M:
                return DivergenceWitness(n, exact.lo)
    msg = f"partial sums stay <= M={M} up to length {max_length}"
    raise BudgetExhausted(msg, certificate=None if cert is None else f"Z(T={T}) <= {cert}")


def _convergence_certificate(spec, T) -> Fraction | None:
    if spec.is_finite:
        return partial_Z(spec, T, max(1, spec.max_length)).hi
    try:
        t = spec.tail.z_tail(1, T, 64)
    except NoConvergenceCertificate:
        return None
    return t.hi
