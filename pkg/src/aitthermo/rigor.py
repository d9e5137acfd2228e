"""Validated arithmetic on intervals with dyadic-rational endpoints.

Every real-valued result in the package is a :class:`DyadicInterval` that is
guaranteed to contain the exact value.  Endpoints are :class:`fractions.Fraction`
instances whose denominators are powers of two; rounding is always outward.

Only three transcendental-free primitives are needed: the four field
operations, ``2**q`` for rational ``q`` and ``log2``.  Both transcendental
routines work on exact integers, so every rounding step can be audited.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from decimal import ROUND_CEILING, ROUND_FLOOR, Decimal, localcontext
from fractions import Fraction
from typing import Union

from .errors import DivisionByZeroInterval, NonPositiveArgument

Rational = Union[int, Fraction]

#: Mantissa size (bits) used by ``/`` when no precision is given.
DEFAULT_PREC = 128


# ---------------------------------------------------------------------------
# dyadic helpers


def is_dyadic(x: Fraction) -> bool:
    d = x.denominator
    return d & (d - 1) == 0


def bits_for(eps: Rational) -> int:
    """Smallest ``J >= 0`` with ``2**-J <= eps``."""
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if eps >= 1:
        return 0
    # 2**-J <= eps  <=>  2**J >= 1/eps
    inv = 1 / eps
    j = inv.numerator.bit_length() - inv.denominator.bit_length()
    while Fraction(2) ** j < inv:
        j += 1
    while j > 0 and Fraction(2) ** (j - 1) >= inv:
        j -= 1
    return j


def floor_dyadic(x: Fraction, bits: int) -> Fraction:
    """Largest multiple of ``2**-bits`` that is ``<= x``."""
    if bits >= 0:
        return Fraction((x.numerator << bits) // x.denominator, 1 << bits)
    scale = 1 << -bits
    return Fraction((x.numerator // (x.denominator * scale)) * scale)


def ceil_dyadic(x: Fraction, bits: int) -> Fraction:
    return -floor_dyadic(-x, bits)


def _exponent(x: Fraction) -> int:
    """``floor(log2 |x|)`` for nonzero ``x``."""
    n, d = abs(x.numerator), x.denominator
    e = n.bit_length() - d.bit_length()
    # now 2**(e-1) < n/d < 2**(e+1)
    if (n << max(0, -e)) < (d << max(0, e)):
        e -= 1
    return e


def round_down(x: Fraction, prec: int) -> Fraction:
    """Round toward -inf to ``prec`` significant bits (exact when it fits)."""
    x = Fraction(x)
    if x == 0 or (is_dyadic(x) and abs(x.numerator).bit_length() <= prec):
        return x
    return floor_dyadic(x, prec - 1 - _exponent(x))


def round_up(x: Fraction, prec: int) -> Fraction:
    return -round_down(-Fraction(x), prec)


def iroot(n: int, k: int) -> int:
    """``floor(n ** (1/k))`` for integers ``n >= 0`` and ``k >= 1``.

    Integer Newton iteration from an upper starting point; the bracket
    ``r**k <= n < (r+1)**k`` is checked exactly before returning.
    """
    if n < 0 or k < 1:
        raise ValueError("iroot needs n >= 0 and k >= 1")
    if k == 1 or n < 2:
        return n
    x = _root_seed(n, k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    assert x ** k <= n < (x + 1) ** k
    return x


def _root_seed(n: int, k: int) -> int:
    # A float estimate padded upward lets Newton converge quadratically.
    # Starting from a power of two costs about k*ln(2) linear steps instead.
    fallback = 1 << -(-n.bit_length() // k)
    shift = max(0, n.bit_length() - 64)
    lg = (math.log2(n >> shift) + shift) / k
    e = int(lg)
    if e < 52:
        x = int(2.0 ** lg * (1 + 2.0 ** -16)) + 1
    else:
        x = (int(2.0 ** (lg - e) * (1 << 52)) + (1 << 36)) << (e - 52)
    return x if x ** k > n else fallback


# ---------------------------------------------------------------------------
# intervals


@dataclass(frozen=True)
class DyadicInterval:
    """Closed interval ``[lo, hi]`` with dyadic endpoints."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        lo, hi = Fraction(self.lo), Fraction(self.hi)
        if not (is_dyadic(lo) and is_dyadic(hi)):
            raise ValueError(f"endpoints must be dyadic rationals: {lo}, {hi}")
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    # construction -------------------------------------------------------

    @classmethod
    def point(cls, x: Rational) -> "DyadicInterval":
        return cls(Fraction(x), Fraction(x))

    @classmethod
    def enclose(cls, lo: Rational, hi: Rational | None = None, prec: int = DEFAULT_PREC) -> "DyadicInterval":
        """Tightest dyadic enclosure (at ``prec`` bits) of a rational range."""
        lo = Fraction(lo)
        hi = lo if hi is None else Fraction(hi)
        return cls(round_down(lo, prec), round_up(hi, prec))

    # queries ------------------------------------------------------------

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    @property
    def rad(self) -> Fraction:
        return (self.hi - self.lo) / 2

    def is_exact(self) -> bool:
        return self.lo == self.hi

    def __contains__(self, x) -> bool:
        if isinstance(x, DyadicInterval):
            return self.lo <= x.lo and x.hi <= self.hi
        return self.lo <= x <= self.hi

    def intersects(self, other: "DyadicInterval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def strictly_below(self, other: "DyadicInterval") -> bool:
        return self.hi < other.lo

    def hull(self, other: "DyadicInterval") -> "DyadicInterval":
        return DyadicInterval(min(self.lo, other.lo), max(self.hi, other.hi))

    # arithmetic -----------------------------------------------------------

    def round(self, prec: int) -> "DyadicInterval":
        return DyadicInterval(round_down(self.lo, prec), round_up(self.hi, prec))

    def __neg__(self):
        return DyadicInterval(-self.hi, -self.lo)

    def __add__(self, other):
        other = _coerce(other)
        return DyadicInterval(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        return DyadicInterval(self.lo - other.hi, self.hi - other.lo)

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        other = _coerce(other)
        ps = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
        return DyadicInterval(min(ps), max(ps))

    __rmul__ = __mul__

    def div(self, other, prec: int = DEFAULT_PREC) -> "DyadicInterval":
        other = _coerce(other)
        if other.lo <= 0 <= other.hi:
            raise DivisionByZeroInterval(f"denominator {other} contains zero")
        qs = (self.lo / other.lo, self.lo / other.hi, self.hi / other.lo, self.hi / other.hi)
        return DyadicInterval(round_down(min(qs), prec), round_up(max(qs), prec))

    def __truediv__(self, other):
        return self.div(other)

    def __rtruediv__(self, other):
        return _coerce(other).div(self)

    def scale(self, q: Rational, prec: int = DEFAULT_PREC) -> "DyadicInterval":
        """Multiply by an exact rational (not necessarily dyadic)."""
        q = Fraction(q)
        a, b = self.lo * q, self.hi * q
        if a > b:
            a, b = b, a
        return DyadicInterval(round_down(a, prec), round_up(b, prec))

    # display -------------------------------------------------------------

    def __str__(self):
        return format_interval(self)


def _coerce(x) -> DyadicInterval:
    if isinstance(x, DyadicInterval):
        return x
    x = Fraction(x)
    if not is_dyadic(x):
        raise TypeError(f"{x} is not dyadic; use DyadicInterval.enclose")
    return DyadicInterval(x, x)


def field_ops(a: DyadicInterval, b: DyadicInterval, op: str, prec: int | None = None) -> DyadicInterval:
    """Apply ``op`` in {add, sub, mul, div}; optionally cap mantissas at ``prec`` bits."""
    if op == "div":
        return a.div(b, DEFAULT_PREC if prec is None else prec)
    try:
        r = {"add": a.__add__, "sub": a.__sub__, "mul": a.__mul__}[op](b)
    except KeyError:
        raise ValueError(f"unknown op {op!r}") from None
    return r if prec is None else r.round(prec)


# ---------------------------------------------------------------------------
# 2**q


def pow2_bounds(a: int, b: int, frac_bits: int) -> tuple[int, int, int]:
    """Integer bracket for ``2**(a/b)``.

    Returns ``(lo, hi, shift)`` with ``lo * 2**shift <= 2**(a/b) <= hi * 2**shift``;
    ``hi - lo`` is 0 or 1 and ``shift = floor(a/b) - frac_bits``.
    """
    f, r = divmod(a, b)
    if r == 0:
        return 1 << frac_bits, 1 << frac_bits, f - frac_bits
    y = pow2_floor(r, b, frac_bits)
    return y, y + 1, f - frac_bits


def pow2_floor(r: int, b: int, k: int) -> int:
    """``floor(2**(r/b) * 2**k)`` for ``0 < r < b``."""
    if b * k <= 1 << 14:
        return iroot(1 << (r + k * b), b)
    # Large denominators make the exact root huge; a square-root product
    # usually pins the floor down at a fraction of the cost.
    for extra in (16, 48, 128):
        prec = k + 2 * k.bit_length() + extra
        lo, hi = _pow2_frac_bracket(r, b, prec)
        y = lo >> (prec - k)
        if y == hi >> (prec - k):
            return y
    return iroot(1 << (r + k * b), b)


@functools.lru_cache(maxsize=64)
def _sqrt2_chain(prec: int) -> tuple[tuple[int, int], ...]:
    # brackets for 2**(2**-i) * 2**prec, i = 1..prec+8
    out = []
    lo, hi = 2 << prec, 2 << prec
    for _ in range(prec + 8):
        lo = math.isqrt(lo << prec)
        h = math.isqrt(hi << prec)
        hi = h if h * h == hi << prec else h + 1
        out.append((lo, hi))
    return tuple(out)


def _pow2_frac_bracket(r: int, b: int, prec: int) -> tuple[int, int]:
    # Integers lo <= 2**(r/b) * 2**prec <= hi from the binary digits of r/b.
    chain = _sqrt2_chain(prec)
    j = len(chain)
    u, rem = divmod(r << j, b)
    one = 1 << prec
    lo = hi = one
    up = u + (rem > 0)
    for i, (cl, ch) in enumerate(chain):
        bit = j - 1 - i
        if u >> bit & 1:
            lo = lo * cl >> prec
        if up >> bit & 1:
            hi = -(-hi * ch >> prec)
    if up >> j:  # r/b rounded up to 1
        hi = 2 * one
    return lo, hi


def _scaled(m: int, shift: int) -> Fraction:
    return Fraction(m << shift) if shift >= 0 else Fraction(m, 1 << -shift)


def pow2(q: Rational, eps: Rational = Fraction(1, 1 << 64)) -> DyadicInterval:
    """Enclosure of ``2**q`` with width at most ``eps``; exact for integer ``q``."""
    q = Fraction(q)
    if q.denominator == 1:
        return DyadicInterval.point(Fraction(2) ** q.numerator)
    f = q.numerator // q.denominator
    k = max(1, bits_for(eps) + f)
    lo, hi, shift = pow2_bounds(q.numerator, q.denominator, k)
    return DyadicInterval(_scaled(lo, shift), _scaled(hi, shift))


# ---------------------------------------------------------------------------
# log2


def _log2_bound(x: Fraction, bits: int, upper: bool) -> Fraction:
    # x = 2**k * y with y in [1, 2); digits of log2(y) come from repeated squaring
    k = _exponent(x)
    y = x / Fraction(2) ** k
    if y == 1:
        return Fraction(k)
    g = bits + 16 + bits.bit_length()
    one, two = 1 << g, 2 << g
    if upper:
        m = -((-y.numerator << g) // y.denominator)
    else:
        m = (y.numerator << g) // y.denominator
    acc = 0
    for _ in range(bits):
        sq = m * m
        m = -((-sq) >> g) if upper else sq >> g
        acc <<= 1
        if m >= two:
            acc |= 1
            m = (m + 1) >> 1 if upper else m >> 1
    if upper:
        if m == one:
            extra = 0
        elif m < two:
            extra = 1
        else:
            extra = m.bit_length() - g
        acc += extra
    return k + Fraction(acc, 1 << bits)


def _log2_snapped(x: Fraction, bits: int, upper: bool) -> Fraction:
    # The raw digit bound is within 2**-(bits+2) of log2 x when run with
    # bits+3 digits.  Snapping to the 2**-bits grid and stepping two cells
    # outward makes the result monotone in ``bits``, so finer requests always
    # return nested intervals.
    raw = _log2_bound(x, bits + 3, upper)
    if x.numerator & (x.numerator - 1) == 0 and x.denominator & (x.denominator - 1) == 0:
        return raw  # exact power of two
    step = Fraction(2, 1 << bits)
    return ceil_dyadic(raw, bits) + step if upper else floor_dyadic(raw, bits) - step


def log2(a: DyadicInterval | Rational, eps: Rational = Fraction(1, 1 << 64)) -> DyadicInterval:
    """Enclosure of ``{log2 x : x in a}``; widens ``a``'s image by at most ``eps``."""
    if not isinstance(a, DyadicInterval):
        a = Fraction(a)
        if a <= 0:
            raise NonPositiveArgument(f"log2 of non-positive {a}")
        lo = hi = a
    else:
        if a.lo <= 0:
            raise NonPositiveArgument(f"log2 of interval with lower end {a.lo}")
        lo, hi = a.lo, a.hi
    bits = bits_for(eps) + 3
    return DyadicInterval(_log2_snapped(lo, bits, False), _log2_snapped(hi, bits, True))


# ---------------------------------------------------------------------------
# display


def decimal_str(x: Fraction, digits: int = 20, up: bool = False) -> str:
    """Directed-rounded decimal rendering of an exact rational."""
    x = Fraction(x)
    if x == 0:
        return "0"
    with localcontext() as ctx:
        ctx.prec = digits
        ctx.rounding = ROUND_CEILING if up else ROUND_FLOOR
        d = Decimal(x.numerator) / Decimal(x.denominator)
    s = str(d)
    if "." in s and "E" not in s:
        s = s.rstrip("0").rstrip(".")
    return s


def format_interval(iv: DyadicInterval, digits: int = 20) -> str:
    lo = decimal_str(iv.lo, digits)
    hi = decimal_str(iv.hi, digits, up=True)
    rad = decimal_str(iv.rad, 3, up=True)
    return f"[{lo}, {hi}] = {decimal_str(iv.mid, digits)} ± {rad}"
