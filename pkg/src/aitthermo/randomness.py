"""Bit extraction from real numbers and empirical compression-rate profiles."""
from __future__ import annotations

import csv
import io
from collections.abc import Callable
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from .core import BitString
from .errors import NotFound, PrecisionExhausted, Undefined
from .machines import DEFAULT_BUDGET, Machine, complexity_upper
from .rigor import DyadicInterval

MAX_PREC = 1 << 12


@dataclass(frozen=True)
class RealSource:
    """A real given exactly as a rational, or as nested shrinking dyadic enclosures."""

    value: Fraction | None = None
    enclosure: Callable[[int], DyadicInterval] | None = None
    max_prec: int = MAX_PREC

    @classmethod
    def rational(cls, x) -> "RealSource":
        return cls(value=Fraction(x))

    @classmethod
    def stream(cls, f: Callable[[int], DyadicInterval], max_prec: int = MAX_PREC) -> "RealSource":
        """``f(prec)`` must enclose the real with width tending to 0 as ``prec`` grows."""
        return cls(enclosure=f, max_prec=max_prec)

    def scaled_floor(self, n: int) -> int:
        """``floor(alpha * 2**n)``."""
        if self.value is not None:
            return (self.value.numerator << n) // self.value.denominator
        prec = n + 16
        while prec <= self.max_prec:
            iv = self.enclosure(prec)
            lo, hi = iv.lo * (1 << n), iv.hi * (1 << n)
            k = lo.numerator // lo.denominator
            # strictly inside the open cell (k, k+1)
            if k < lo and hi < k + 1:
                return k
            prec *= 2
        raise PrecisionExhausted(
            f"could not place the real strictly inside a cell of width 2^-{n} "
            f"within precision {self.max_prec}; it may be dyadic, pass it as a rational")


def _source(alpha) -> RealSource:
    return alpha if isinstance(alpha, RealSource) else RealSource.rational(alpha)


def rest_bits(alpha, n: int) -> BitString:
    """First ``n`` bits of the fractional part of ``alpha``.

    Dyadic rationals use their terminating expansion, so ``5/8`` gives
    ``101000`` for six bits.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return BitString("")
    k = _source(alpha).scaled_floor(n) % (1 << n)
    return BitString(format(k, f"0{n}b"))


class ProfileRow(NamedTuple):
    n: int
    h_upper: int | None      # None when nothing in the search window produced the prefix
    ratio: Fraction | None


@dataclass(frozen=True)
class CompressionProfile:
    rows: tuple = ()

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "h_upper", "ratio_num", "ratio_den"])
        for r in self.rows:
            if r.h_upper is None:
                w.writerow([r.n, "NotFound", "", ""])
            else:
                w.writerow([r.n, r.h_upper, r.ratio.numerator, r.ratio.denominator])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "CompressionProfile":
        rows = []
        for rec in csv.DictReader(io.StringIO(text)):
            n = int(rec["n"])
            if rec["h_upper"] in ("", "NotFound"):
                rows.append(ProfileRow(n, None, None))
            else:
                rows.append(ProfileRow(n, int(rec["h_upper"]),
                                       Fraction(int(rec["ratio_num"]), int(rec["ratio_den"]))))
        return cls(tuple(sorted(rows)))


def compression_profile(m: Machine, alpha, n_max: int, max_len: int,
                        steps: int = DEFAULT_BUDGET) -> CompressionProfile:
    """Upper bounds on the complexity of each prefix of ``alpha`` up to ``n_max`` bits."""
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    src = _source(alpha)
    rows = []
    for n in range(1, n_max + 1):
        s = rest_bits(src, n)
        try:
            h = complexity_upper(m, s, max_len, steps)
            rows.append(ProfileRow(n, h, Fraction(h, n)))
        except NotFound:
            rows.append(ProfileRow(n, None, None))
    return CompressionProfile(tuple(rows))


def deficiency_probe(profile: CompressionProfile, T) -> Fraction:
    """``max_n (T n - h_upper(n))`` over the profile.

    A descriptive statistic of the sample only: it bounds from below the
    constant a randomness deficiency would need at these ``n``.
    """
    T = Fraction(T)
    if not 0 <= T <= 1:
        raise ValueError("T must lie in [0, 1]")
    if not profile.rows:
        raise Undefined("empty profile")
    if any(r.h_upper is None for r in profile.rows):
        raise Undefined("profile has rows without a complexity bound")
    return max(T * r.n - r.h_upper for r in profile.rows)
