"""Exact dyadic rationals, complex dyadics and rectangular complex intervals.

A :class:`Dyadic` is ``mantissa * 2**exponent`` with an unbounded integer
mantissa.  Addition, subtraction and multiplication are exact; the only
places where a value is rounded are the explicitly named ``round_*``
helpers, which always say which direction they round.

:class:`ComplexBox` is an axis-aligned rectangle in the complex plane with
dyadic corners.  Its arithmetic is exact (no rounding), so the result of
``a * b`` is the tightest rectangle obtainable from component-wise interval
products.

For the inner loops of the library (orbit enclosures, root isolation) there
is also a fixed-point representation: a box is a 4-tuple of ints
``(re_lo, re_hi, im_lo, im_hi)`` with an implicit scale ``2**-P``.  The
``fx_*`` functions operate on these tuples and round outward after every
multiplication.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Tuple, Union

__all__ = [
    "EXPONENT_LIMIT",
    "DyadicOverflowError",
    "Dyadic",
    "DyadicComplex",
    "ComplexBox",
    "dyadic_round",
    "box_mul",
    "box_point_distance",
    "parse_dyadic",
    "parse_rational",
    "sqrt_upper",
    "sqrt_lower",
]

#: exponents are machine-word sized; crossing this is an explicit error
EXPONENT_LIMIT = 2**62


class DyadicOverflowError(OverflowError):
    """Raised when a dyadic exponent leaves the supported range."""


def _trailing_zeros(m: int) -> int:
    return (m & -m).bit_length() - 1


class Dyadic:
    """The exact number ``mantissa * 2**exponent``.

    Instances are immutable and kept in canonical form: the mantissa is odd,
    or the value is zero and stored as ``(0, 0)``.

    >>> Dyadic(12)
    Dyadic(3, 2)
    >>> Dyadic(1, -1) + Dyadic(1, -2)
    Dyadic(3, -2)
    """

    __slots__ = ("mantissa", "exponent")

    def __init__(self, mantissa: int = 0, exponent: int = 0):
        if mantissa == 0:
            exponent = 0
        else:
            tz = _trailing_zeros(mantissa)
            if tz:
                mantissa >>= tz
                exponent += tz
            if not -EXPONENT_LIMIT <= exponent <= EXPONENT_LIMIT:
                raise DyadicOverflowError(f"dyadic exponent {exponent} out of range")
        object.__setattr__(self, "mantissa", mantissa)
        object.__setattr__(self, "exponent", exponent)

    def __setattr__(self, name, value):
        raise AttributeError("Dyadic is immutable")

    def __reduce__(self):
        return (Dyadic, (self.mantissa, self.exponent))

    # -- construction ----------------------------------------------------
    @classmethod
    def of(cls, x: Union["Dyadic", int, Fraction, str]) -> "Dyadic":
        """Coerce ``x`` exactly; non-dyadic fractions raise ``ValueError``."""
        if isinstance(x, Dyadic):
            return x
        if isinstance(x, bool):
            raise TypeError("bool is not a dyadic")
        if isinstance(x, int):
            return cls(x, 0)
        if isinstance(x, Fraction):
            return cls.from_fraction(x)
        if isinstance(x, str):
            return parse_dyadic(x)
        if isinstance(x, float):
            if not math.isfinite(x):
                raise ValueError("non-finite float")
            n, d = x.as_integer_ratio()
            return cls.from_fraction(Fraction(n, d))
        raise TypeError(f"cannot convert {type(x).__name__} to Dyadic")

    @classmethod
    def from_fraction(cls, q: Fraction) -> "Dyadic":
        d = q.denominator
        if d & (d - 1):
            raise ValueError(f"{q} is not a dyadic rational")
        return cls(q.numerator, -(d.bit_length() - 1))

    @classmethod
    def pow2(cls, k: int) -> "Dyadic":
        return cls(1, k)

    # -- conversion ------------------------------------------------------
    def to_fraction(self) -> Fraction:
        if self.exponent >= 0:
            return Fraction(self.mantissa << self.exponent)
        return Fraction(self.mantissa, 1 << -self.exponent)

    def __float__(self) -> float:
        return math.ldexp(self.mantissa, self.exponent) if self.mantissa.bit_length() < 1000 else float(self.to_fraction())

    def to_scaled_int(self, prec: int) -> int:
        """``self * 2**prec`` if that is an integer, else ``ValueError``."""
        shift = self.exponent + prec
        if shift >= 0:
            return self.mantissa << shift
        raise ValueError(f"{self} is not a multiple of 2^-{prec}")

    def floor_scaled(self, prec: int) -> int:
        """``floor(self * 2**prec)``."""
        shift = self.exponent + prec
        return self.mantissa << shift if shift >= 0 else self.mantissa >> -shift

    def ceil_scaled(self, prec: int) -> int:
        shift = self.exponent + prec
        return self.mantissa << shift if shift >= 0 else -((-self.mantissa) >> -shift)

    # -- arithmetic ------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, Dyadic):
            if isinstance(other, int) and not isinstance(other, bool):
                other = Dyadic(other)
            else:
                return NotImplemented
        e1, e2 = self.exponent, other.exponent
        if e1 == e2:
            return Dyadic(self.mantissa + other.mantissa, e1)
        if e1 < e2:
            return Dyadic(self.mantissa + (other.mantissa << (e2 - e1)), e1)
        return Dyadic((self.mantissa << (e1 - e2)) + other.mantissa, e2)

    __radd__ = __add__

    def __neg__(self):
        return Dyadic(-self.mantissa, self.exponent)

    def __pos__(self):
        return self

    def __abs__(self):
        return self if self.mantissa >= 0 else -self

    def __sub__(self, other):
        if not isinstance(other, Dyadic):
            if isinstance(other, int) and not isinstance(other, bool):
                other = Dyadic(other)
            else:
                return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Dyadic):
            if isinstance(other, int) and not isinstance(other, bool):
                other = Dyadic(other)
            else:
                return NotImplemented
        return Dyadic(self.mantissa * other.mantissa, self.exponent + other.exponent)

    __rmul__ = __mul__

    def scale(self, k: int) -> "Dyadic":
        """Exact multiplication by ``2**k``."""
        if self.mantissa == 0:
            return self
        return Dyadic(self.mantissa, self.exponent + k)

    def half(self) -> "Dyadic":
        return self.scale(-1)

    # -- comparison ------------------------------------------------------
    def _cmp(self, other) -> int:
        if not isinstance(other, Dyadic):
            other = Dyadic.of(other)
        e1, e2 = self.exponent, other.exponent
        if e1 <= e2:
            a, b = self.mantissa, other.mantissa << (e2 - e1)
        else:
            a, b = self.mantissa << (e1 - e2), other.mantissa
        return (a > b) - (a < b)

    def __eq__(self, other):
        if isinstance(other, Dyadic):
            return self.mantissa == other.mantissa and self.exponent == other.exponent
        if isinstance(other, int) and not isinstance(other, bool):
            return self.exponent >= 0 and (self.mantissa << self.exponent) == other
        if isinstance(other, Fraction):
            return self.to_fraction() == other
        return NotImplemented

    def __hash__(self):
        return hash(self.to_fraction()) if self.exponent < 0 else hash(self.mantissa << self.exponent)

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def sign(self) -> int:
        return (self.mantissa > 0) - (self.mantissa < 0)

    def is_canonical(self) -> bool:
        if self.mantissa == 0:
            return self.exponent == 0
        return self.mantissa & 1 == 1 and abs(self.exponent) <= EXPONENT_LIMIT

    # -- rounding --------------------------------------------------------
    def round_down(self, prec: int) -> "Dyadic":
        """Largest multiple of ``2**-prec`` that is ``<= self``."""
        if self.exponent >= -prec:
            return self
        return Dyadic(self.floor_scaled(prec), -prec)

    def round_up(self, prec: int) -> "Dyadic":
        """Smallest multiple of ``2**-prec`` that is ``>= self``."""
        if self.exponent >= -prec:
            return self
        return Dyadic(self.ceil_scaled(prec), -prec)

    def __repr__(self):
        return f"Dyadic({self.mantissa}, {self.exponent})"

    def __str__(self):
        if self.exponent == 0:
            return str(self.mantissa)
        return f"{self.mantissa}*2^{self.exponent}"


ZERO = Dyadic(0)
ONE = Dyadic(1)


def dyadic_round(x: Dyadic, prec: int) -> Dyadic:
    """Round ``x`` to the nearest multiple of ``2**-prec`` (ties go up).

    The error is at most ``2**-(prec+1)`` and the result has exponent
    ``>= -prec``.

    >>> dyadic_round(Dyadic(5, -3), 2)
    Dyadic(3, -2)
    """
    if prec < 1:
        raise ValueError("prec must be >= 1")
    if x.exponent >= -prec:
        return x
    shift = -prec - x.exponent
    return Dyadic((x.mantissa + (1 << (shift - 1))) >> shift, -prec)


def sqrt_upper(x: Union[Dyadic, Fraction, int], prec: int) -> Dyadic:
    """A multiple of ``2**-prec`` that is ``>= sqrt(x)`` and within ``2**-prec`` of it."""
    q = x.to_fraction() if isinstance(x, Dyadic) else Fraction(x)
    if q < 0:
        raise ValueError("square root of a negative number")
    # ceil(sqrt(q) * 2^prec) = ceil(sqrt(q * 4^prec))
    num, den = q.numerator << (2 * prec), q.denominator
    n = -(-num // den)  # ceil
    s = math.isqrt(n)
    if s * s < n:
        s += 1
    return Dyadic(s, -prec)


def sqrt_lower(x: Union[Dyadic, Fraction, int], prec: int) -> Dyadic:
    """A multiple of ``2**-prec`` that is ``<= sqrt(x)`` and within ``2**-prec`` of it."""
    q = x.to_fraction() if isinstance(x, Dyadic) else Fraction(x)
    if q < 0:
        raise ValueError("square root of a negative number")
    n = (q.numerator << (2 * prec)) // q.denominator
    return Dyadic(math.isqrt(n), -prec)


_DYADIC_POW = re.compile(r"^\s*([+-]?\d+)\s*\*\s*2\^\(?\s*([+-]?\d+)\s*\)?\s*$")


def parse_rational(text: str) -> Fraction:
    """Parse ``"3"``, ``"-0.25"``, ``"5/8"`` or ``"5*2^-3"`` as an exact fraction."""
    s = text.strip().replace("−", "-")
    m = _DYADIC_POW.match(s)
    if m:
        return Dyadic(int(m.group(1)), int(m.group(2))).to_fraction()
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"malformed number {text!r}") from exc


def parse_dyadic(text: str) -> Dyadic:
    """Parse an exact dyadic; ``"1/3"`` raises ``ValueError``."""
    return Dyadic.from_fraction(parse_rational(text))


@dataclass(frozen=True)
class DyadicComplex:
    """A complex number with dyadic real and imaginary parts."""

    re: Dyadic
    im: Dyadic = ZERO

    @classmethod
    def of(cls, z) -> "DyadicComplex":
        if isinstance(z, DyadicComplex):
            return z
        if isinstance(z, complex):
            return cls(Dyadic.of(z.real), Dyadic.of(z.imag))
        if isinstance(z, tuple):
            return cls(Dyadic.of(z[0]), Dyadic.of(z[1]))
        return cls(Dyadic.of(z), ZERO)

    def __add__(self, other):
        other = DyadicComplex.of(other)
        return DyadicComplex(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = DyadicComplex.of(other)
        return DyadicComplex(self.re - other.re, self.im - other.im)

    def __neg__(self):
        return DyadicComplex(-self.re, -self.im)

    def __mul__(self, other):
        other = DyadicComplex.of(other)
        return DyadicComplex(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def scale(self, k: int) -> "DyadicComplex":
        return DyadicComplex(self.re.scale(k), self.im.scale(k))

    def conj(self) -> "DyadicComplex":
        return DyadicComplex(self.re, -self.im)

    def abs2(self) -> Dyadic:
        return self.re * self.re + self.im * self.im

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def is_zero(self) -> bool:
        return self.re.mantissa == 0 and self.im.mantissa == 0

    def round(self, prec: int) -> "DyadicComplex":
        return DyadicComplex(dyadic_round(self.re, prec), dyadic_round(self.im, prec))

    def __str__(self):
        if self.im.mantissa == 0:
            return str(self.re)
        sign = "-" if self.im.mantissa < 0 else "+"
        return f"{self.re}{sign}{abs(self.im)}i"


FixedBox = Tuple[int, int, int, int]


@dataclass(frozen=True)
class ComplexBox:
    """The closed rectangle ``[re_lo, re_hi] + i[im_lo, im_hi]``."""

    re_lo: Dyadic
    re_hi: Dyadic
    im_lo: Dyadic
    im_hi: Dyadic

    def __post_init__(self):
        if self.re_lo > self.re_hi or self.im_lo > self.im_hi:
            raise ValueError(f"inverted box {self}")

    # -- construction ----------------------------------------------------
    @classmethod
    def point(cls, z) -> "ComplexBox":
        z = DyadicComplex.of(z)
        return cls(z.re, z.re, z.im, z.im)

    @classmethod
    def from_bounds(cls, re_lo, re_hi, im_lo, im_hi) -> "ComplexBox":
        return cls(Dyadic.of(re_lo), Dyadic.of(re_hi), Dyadic.of(im_lo), Dyadic.of(im_hi))

    @classmethod
    def around(cls, center, radius) -> "ComplexBox":
        """The square of half-side ``radius`` centred at ``center``."""
        c = DyadicComplex.of(center)
        r = Dyadic.of(radius)
        return cls(c.re - r, c.re + r, c.im - r, c.im + r)

    @classmethod
    def from_fixed(cls, fx: FixedBox, prec: int) -> "ComplexBox":
        e = -prec
        return cls(Dyadic(fx[0], e), Dyadic(fx[1], e), Dyadic(fx[2], e), Dyadic(fx[3], e))

    def to_fixed(self, prec: int) -> FixedBox:
        """Outward rounding to the grid ``2**-prec``."""
        return (
            self.re_lo.floor_scaled(prec),
            self.re_hi.ceil_scaled(prec),
            self.im_lo.floor_scaled(prec),
            self.im_hi.ceil_scaled(prec),
        )

    # -- geometry --------------------------------------------------------
    @property
    def width(self) -> Dyadic:
        return self.re_hi - self.re_lo

    @property
    def height(self) -> Dyadic:
        return self.im_hi - self.im_lo

    def midpoint(self) -> DyadicComplex:
        return DyadicComplex((self.re_lo + self.re_hi).half(), (self.im_lo + self.im_hi).half())

    def corners(self) -> Iterator[DyadicComplex]:
        for x in (self.re_lo, self.re_hi):
            for y in (self.im_lo, self.im_hi):
                yield DyadicComplex(x, y)

    def is_point(self) -> bool:
        return self.re_lo == self.re_hi and self.im_lo == self.im_hi

    def contains_point(self, z) -> bool:
        z = DyadicComplex.of(z)
        return self.re_lo <= z.re <= self.re_hi and self.im_lo <= z.im <= self.im_hi

    def contains(self, other: "ComplexBox") -> bool:
        return (
            self.re_lo <= other.re_lo
            and other.re_hi <= self.re_hi
            and self.im_lo <= other.im_lo
            and other.im_hi <= self.im_hi
        )

    def contains_interior(self, other: "ComplexBox") -> bool:
        """``other`` lies in the open interior of ``self``."""
        return (
            self.re_lo < other.re_lo
            and other.re_hi < self.re_hi
            and self.im_lo < other.im_lo
            and other.im_hi < self.im_hi
        )

    def intersects(self, other: "ComplexBox") -> bool:
        return not (
            other.re_hi < self.re_lo
            or self.re_hi < other.re_lo
            or other.im_hi < self.im_lo
            or self.im_hi < other.im_lo
        )

    def hull(self, other: "ComplexBox") -> "ComplexBox":
        return ComplexBox(
            min(self.re_lo, other.re_lo),
            max(self.re_hi, other.re_hi),
            min(self.im_lo, other.im_lo),
            max(self.im_hi, other.im_hi),
        )

    def contains_zero(self) -> bool:
        return self.re_lo.sign() <= 0 <= self.re_hi.sign() and self.im_lo.sign() <= 0 <= self.im_hi.sign()

    def split(self) -> Tuple["ComplexBox", "ComplexBox", "ComplexBox", "ComplexBox"]:
        """The four quadrants, ordered (re, im) = (lo,lo), (lo,hi), (hi,lo), (hi,hi)."""
        c = self.midpoint()
        return (
            ComplexBox(self.re_lo, c.re, self.im_lo, c.im),
            ComplexBox(self.re_lo, c.re, c.im, self.im_hi),
            ComplexBox(c.re, self.re_hi, self.im_lo, c.im),
            ComplexBox(c.re, self.re_hi, c.im, self.im_hi),
        )

    def inflate(self, r: Dyadic) -> "ComplexBox":
        return ComplexBox(self.re_lo - r, self.re_hi + r, self.im_lo - r, self.im_hi + r)

    def mag2_upper(self) -> Dyadic:
        """Exact ``max |z|^2`` over the box."""
        x = max(abs(self.re_lo), abs(self.re_hi))
        y = max(abs(self.im_lo), abs(self.im_hi))
        return x * x + y * y

    def mig2(self) -> Dyadic:
        """Exact ``min |z|^2`` over the box."""
        x = ZERO if self.re_lo.sign() <= 0 <= self.re_hi.sign() else min(abs(self.re_lo), abs(self.re_hi))
        y = ZERO if self.im_lo.sign() <= 0 <= self.im_hi.sign() else min(abs(self.im_lo), abs(self.im_hi))
        return x * x + y * y

    def abs_upper(self, prec: int = 64) -> Dyadic:
        return sqrt_upper(self.mag2_upper(), prec)

    def abs_lower(self, prec: int = 64) -> Dyadic:
        return sqrt_lower(self.mig2(), prec)

    def diameter_upper(self, prec: int = 64) -> Dyadic:
        w, h = self.width, self.height
        return sqrt_upper(w * w + h * h, prec)

    # -- arithmetic ------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, ComplexBox):
            other = ComplexBox.point(other)
        return ComplexBox(self.re_lo + other.re_lo, self.re_hi + other.re_hi,
                          self.im_lo + other.im_lo, self.im_hi + other.im_hi)

    __radd__ = __add__

    def __neg__(self):
        return ComplexBox(-self.re_hi, -self.re_lo, -self.im_hi, -self.im_lo)

    def __sub__(self, other):
        if not isinstance(other, ComplexBox):
            other = ComplexBox.point(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, ComplexBox):
            other = ComplexBox.point(other)
        return box_mul(self, other)

    __rmul__ = __mul__

    def scale(self, k: int) -> "ComplexBox":
        return ComplexBox(self.re_lo.scale(k), self.re_hi.scale(k), self.im_lo.scale(k), self.im_hi.scale(k))

    def __str__(self):
        return f"[{self.re_lo}, {self.re_hi}] + i[{self.im_lo}, {self.im_hi}]"


def _imul(al: Dyadic, ah: Dyadic, bl: Dyadic, bh: Dyadic) -> Tuple[Dyadic, Dyadic]:
    if al == ah and bl == bh:
        p = al * bl
        return p, p
    ps = (al * bl, al * bh, ah * bl, ah * bh)
    return min(ps), max(ps)


def box_mul(a: ComplexBox, b: ComplexBox) -> ComplexBox:
    """Exact rectangular enclosure of ``{z*w : z in a, w in b}``.

    Uses ``(x1 + i y1)(x2 + i y2) = (x1 x2 - y1 y2) + i (x1 y2 + x2 y1)`` with
    interval products for each term.
    """
    xxl, xxh = _imul(a.re_lo, a.re_hi, b.re_lo, b.re_hi)
    yyl, yyh = _imul(a.im_lo, a.im_hi, b.im_lo, b.im_hi)
    xyl, xyh = _imul(a.re_lo, a.re_hi, b.im_lo, b.im_hi)
    yxl, yxh = _imul(a.im_lo, a.im_hi, b.re_lo, b.re_hi)
    return ComplexBox(xxl - yyh, xxh - yyl, xyl + yxl, xyh + yxh)


def box_point_distance(a: ComplexBox, z, prec: int = 64) -> Dyadic:
    """Upper bound on the Euclidean distance from ``z`` to the box ``a``.

    The only rounding is the final square root, which is rounded up to a
    multiple of ``2**-prec``; the result is zero exactly when ``z`` lies in
    the box.
    """
    z = DyadicComplex.of(z)
    dx = a.re_lo - z.re if z.re < a.re_lo else (z.re - a.re_hi if z.re > a.re_hi else ZERO)
    dy = a.im_lo - z.im if z.im < a.im_lo else (z.im - a.im_hi if z.im > a.im_hi else ZERO)
    d2 = dx * dx + dy * dy
    if d2.mantissa == 0:
        return ZERO
    return sqrt_upper(d2, prec)


# ---------------------------------------------------------------------------
# fixed-point boxes: (re_lo, re_hi, im_lo, im_hi) scaled by 2**P
# ---------------------------------------------------------------------------

def fx_point(x: int, y: int) -> FixedBox:
    return (x, x, y, y)


def fx_add(a: FixedBox, b: FixedBox) -> FixedBox:
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3])


def fx_sub(a: FixedBox, b: FixedBox) -> FixedBox:
    return (a[0] - b[1], a[1] - b[0], a[2] - b[3], a[3] - b[2])


def fx_neg(a: FixedBox) -> FixedBox:
    return (-a[1], -a[0], -a[3], -a[2])


def fx_mul(a: FixedBox, b: FixedBox, P: int) -> FixedBox:
    """Product at scale ``2**-P``, rounded outward once per component."""
    axl, axh, ayl, ayh = a
    bxl, bxh, byl, byh = b
    if axl == axh and ayl == ayh:
        # point times box: linear in b, exact bounds from the endpoints
        if axl >= 0:
            xxl, xxh = axl * bxl, axl * bxh
        else:
            xxl, xxh = axl * bxh, axl * bxl
        if ayl >= 0:
            yyl, yyh = ayl * byl, ayl * byh
            yxl, yxh = ayl * bxl, ayl * bxh
        else:
            yyl, yyh = ayl * byh, ayl * byl
            yxl, yxh = ayl * bxh, ayl * bxl
        if axl >= 0:
            xyl, xyh = axl * byl, axl * byh
        else:
            xyl, xyh = axl * byh, axl * byl
    else:
        p = (axl * bxl, axl * bxh, axh * bxl, axh * bxh)
        xxl, xxh = min(p), max(p)
        p = (ayl * byl, ayl * byh, ayh * byl, ayh * byh)
        yyl, yyh = min(p), max(p)
        p = (axl * byl, axl * byh, axh * byl, axh * byh)
        xyl, xyh = min(p), max(p)
        p = (ayl * bxl, ayl * bxh, ayh * bxl, ayh * bxh)
        yxl, yxh = min(p), max(p)
    return (
        (xxl - yyh) >> P,
        -((yyl - xxh) >> P),
        (xyl + yxl) >> P,
        -((-(xyh + yxh)) >> P),
    )


def _isqr(lo: int, hi: int) -> Tuple[int, int]:
    if lo >= 0:
        return lo * lo, hi * hi
    if hi <= 0:
        return hi * hi, lo * lo
    return 0, max(lo * lo, hi * hi)


def fx_sqr(a: FixedBox, P: int) -> FixedBox:
    """Square of a box; tighter than ``fx_mul(a, a)``."""
    xl, xh, yl, yh = a
    x2l, x2h = _isqr(xl, xh)
    y2l, y2h = _isqr(yl, yh)
    p = (xl * yl, xl * yh, xh * yl, xh * yh)
    pl, ph = min(p), max(p)
    return (
        (x2l - y2h) >> P,
        -((y2l - x2h) >> P),
        (2 * pl) >> P,
        -((-2 * ph) >> P),
    )


def fx_mul_int(a: FixedBox, k: int) -> FixedBox:
    if k >= 0:
        return (a[0] * k, a[1] * k, a[2] * k, a[3] * k)
    return (a[1] * k, a[0] * k, a[3] * k, a[2] * k)


def fx_mag2(a: FixedBox) -> int:
    """``max |z|^2`` scaled by ``2**(2P)``."""
    x = max(-a[0], a[1])
    y = max(-a[2], a[3])
    return x * x + y * y


def fx_mig2(a: FixedBox) -> int:
    """``min |z|^2`` scaled by ``2**(2P)``."""
    x = a[0] if a[0] > 0 else (-a[1] if a[1] < 0 else 0)
    y = a[2] if a[2] > 0 else (-a[3] if a[3] < 0 else 0)
    return x * x + y * y


def fx_contains_zero(a: FixedBox) -> bool:
    return a[0] <= 0 <= a[1] and a[2] <= 0 <= a[3]


def fx_width(a: FixedBox) -> int:
    return max(a[1] - a[0], a[3] - a[2])


def fx_hull(a: FixedBox, b: FixedBox) -> FixedBox:
    return (min(a[0], b[0]), max(a[1], b[1]), min(a[2], b[2]), max(a[3], b[3]))


def fx_intersect(a: FixedBox, b: FixedBox):
    r = (max(a[0], b[0]), min(a[1], b[1]), max(a[2], b[2]), min(a[3], b[3]))
    if r[0] > r[1] or r[2] > r[3]:
        return None
    return r


def fx_rescale(a: FixedBox, old: int, new: int) -> FixedBox:
    """Change scale from ``2**-old`` to ``2**-new``, rounding outward."""
    if new >= old:
        s = new - old
        return (a[0] << s, a[1] << s, a[2] << s, a[3] << s)
    s = old - new
    return (a[0] >> s, -((-a[1]) >> s), a[2] >> s, -((-a[3]) >> s))


def fx_from_complex(z: complex, P: int) -> FixedBox:
    """A degenerate box at (roughly) the float ``z``; exact once constructed."""
    x = int(round(math.ldexp(z.real, P))) if P < 1000 else int(Fraction(z.real) * (1 << P))
    y = int(round(math.ldexp(z.imag, P))) if P < 1000 else int(Fraction(z.imag) * (1 << P))
    return (x, x, y, y)


def fx_to_complex(a: FixedBox, P: int) -> complex:
    return complex(math.ldexp((a[0] + a[1]) / 2, -P) if abs(a[0]) < 2**1000 else float(Fraction(a[0] + a[1], 2 << P)),
                   math.ldexp((a[2] + a[3]) / 2, -P) if abs(a[2]) < 2**1000 else float(Fraction(a[2] + a[3], 2 << P)))
