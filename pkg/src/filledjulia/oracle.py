"""Polynomials whose coefficients are only available through approximation queries.

A :class:`PolynomialOracle` answers ``coefficient(i, prec)`` with a dyadic
approximation of ``a_i`` whose real and imaginary parts are each within
``2**-(prec+1)`` of the true value (so the complex error is below
``2**-prec``).  Everything downstream works from these answers and from
the rectangles :meth:`PolynomialOracle.coefficient_box` built around them,
so no step ever needs the exact coefficient.

Three kinds of coefficient are supported: exact dyadics, exact rationals
(rounded on demand) and rotations ``exp(2*pi*i*theta)``, most importantly
the golden-mean rotation used for Siegel disks.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple, Union

from .dyadic import (
    ComplexBox,
    Dyadic,
    DyadicComplex,
    DyadicOverflowError,
    FixedBox,
    dyadic_round,
    fx_add,
    fx_mag2,
    fx_mig2,
    fx_mul,
    fx_mul_int,
    fx_sqr,
    fx_sub,
    parse_rational,
    sqrt_lower,
    sqrt_upper,
)
from .errors import PreconditionError, ResourceError

__all__ = [
    "GOLDEN",
    "CoefficientSource",
    "ExactCoefficient",
    "RationalCoefficient",
    "RotationCoefficient",
    "PolynomialOracle",
    "Polynomial",
    "IteratedPolynomial",
    "FixedPointEquation",
    "Escaped",
    "OrbitPoint",
    "parse_polynomial",
    "eval_enclosure",
    "iterate_enclosure",
    "derivative",
    "iterate_map_poly",
    "orbit",
    "pi_interval",
    "rotation_interval",
    "DEFAULT_DEGREE_CAP",
]

GOLDEN = "golden"

#: largest degree an expanded composition may reach
DEFAULT_DEGREE_CAP = 1024

# bail out of an orbit enclosure once its coordinates need this many bits
_MAX_ORBIT_BITS = 1 << 14


# ---------------------------------------------------------------------------
# certified constants
# ---------------------------------------------------------------------------

def _arctan_inv(x: int, F: int) -> Tuple[int, int]:
    """``atan(1/x) * 2**F`` as ``(approx, err)`` with ``|error| <= err`` ulps."""
    one = 1 << F
    total = 0
    k = 0
    power = x
    x2 = x * x
    while True:
        term = one // (power * (2 * k + 1))
        if term == 0:
            break
        total += -term if k & 1 else term
        k += 1
        power *= x2
    # one truncation per term, plus the alternating tail below one ulp
    return total, k + 1


@lru_cache(maxsize=32)
def pi_interval(F: int) -> Tuple[int, int]:
    """Integers ``lo, hi`` with ``lo <= pi * 2**F <= hi`` (Machin's formula)."""
    a, ea = _arctan_inv(5, F + 4)
    b, eb = _arctan_inv(239, F + 4)
    approx = 16 * a - 4 * b
    err = 16 * ea + 4 * eb
    return (approx - err) >> 4, -((-(approx + err)) >> 4)


def _exp_i_fixed(x: int, F: int) -> Tuple[int, int, int]:
    """``cos x``, ``sin x`` (scaled by ``2**F``) for ``x * 2**-F`` of modulus at most 4.

    Returns ``(c, s, err)`` where both components are within ``err`` ulps.
    """
    one = 1 << F
    X = abs(x)
    if X > 4 * one:
        raise PreconditionError("argument too large for the series")
    c = s = 0
    t = one
    e = 0  # error bound on t, in ulps
    k = 0
    total_err = 0
    while True:
        r = k & 3
        if r == 0:
            c += t
        elif r == 1:
            s += t
        elif r == 2:
            c -= t
        else:
            s -= t
        total_err += e
        k += 1
        t = (t * x) // (k * one)
        e = (e * X) // (k * one) + 2
        # k >= 8 >= 2|x|, so the rest is at most twice the next term
        if k >= 8 and abs(t) <= 2:
            break
    # tail: |sum_{j>=k} x^j/j!| <= 2 |x|^k/k! once k >= 2|x|
    total_err += 2 * (abs(t) + e) + 2
    return c, s, total_err


@lru_cache(maxsize=64)
def rotation_interval(theta: Union[Fraction, str], F: int) -> Tuple[FixedBox, int]:
    """Enclosure of ``exp(2*pi*i*theta)`` as a fixed box at scale ``2**-F``.

    ``theta`` is a :class:`~fractions.Fraction` or :data:`GOLDEN` for
    ``(sqrt(5) - 1) / 2``.
    """
    G = F + 24
    one = 1 << G
    if theta == GOLDEN:
        s5 = math.isqrt(5 << (2 * G))  # floor(sqrt(5) * 2^G)
        # theta - 1 = (sqrt5 - 3)/2, reduced to [-1/2, 1/2]
        t_lo = (s5 - 3 * one) >> 1
        t_hi = -((-(s5 + 1 - 3 * one)) >> 1)
    else:
        q = Fraction(theta)
        q -= math.floor(q + Fraction(1, 2))
        t_lo = (q.numerator << G) // q.denominator
        t_hi = -((-(q.numerator << G)) // q.denominator)
    pl, ph = pi_interval(G)
    prods = (2 * pl * t_lo, 2 * pl * t_hi, 2 * ph * t_lo, 2 * ph * t_hi)
    x_lo, x_hi = min(prods) >> G, -((-max(prods)) >> G)
    xm = (x_lo + x_hi) >> 1
    rad = max(x_hi - xm, xm - x_lo)
    c, s, err = _exp_i_fixed(xm, G)
    # |exp(ix) - exp(ixm)| <= |x - xm|
    err += rad + 1
    box = (c - err, c + err, s - err, s + err)
    shift = G - F
    return (box[0] >> shift, -((-box[1]) >> shift), box[2] >> shift, -((-box[3]) >> shift)), F


# ---------------------------------------------------------------------------
# coefficient sources
# ---------------------------------------------------------------------------

class CoefficientSource:
    """One coefficient of a polynomial, queryable to any precision."""

    #: the exact value when it is a dyadic, else ``None``
    exact: Optional[DyadicComplex] = None

    def approx(self, prec: int) -> DyadicComplex:
        raise NotImplementedError

    def describe(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class ExactCoefficient(CoefficientSource):
    value: DyadicComplex

    @property
    def exact(self) -> DyadicComplex:
        return self.value

    def approx(self, prec: int) -> DyadicComplex:
        return self.value

    def describe(self) -> str:
        return _format_complex(self.value.re.to_fraction(), self.value.im.to_fraction())


@dataclass(frozen=True)
class RationalCoefficient(CoefficientSource):
    re: Fraction
    im: Fraction = Fraction(0)

    def approx(self, prec: int) -> DyadicComplex:
        p = prec + 1
        return DyadicComplex(Dyadic(round(self.re * (1 << p)), -p), Dyadic(round(self.im * (1 << p)), -p))

    def describe(self) -> str:
        return _format_complex(self.re, self.im)


@dataclass(frozen=True)
class RotationCoefficient(CoefficientSource):
    """``exp(2*pi*i*theta)``; ``theta`` is a fraction or :data:`GOLDEN`."""

    theta: Union[Fraction, str] = GOLDEN

    @property
    def exact(self) -> Optional[DyadicComplex]:
        if self.theta == GOLDEN:
            return None
        q = Fraction(self.theta) % 1
        quarter = {Fraction(0): (1, 0), Fraction(1, 4): (0, 1), Fraction(1, 2): (-1, 0), Fraction(3, 4): (0, -1)}
        if q in quarter:
            return DyadicComplex(Dyadic(quarter[q][0]), Dyadic(quarter[q][1]))
        return None

    def approx(self, prec: int) -> DyadicComplex:
        ex = self.exact
        if ex is not None:
            return ex
        F = prec + 8
        box, _ = rotation_interval(self.theta, F)
        # box half-width is a handful of ulps at 2^-F, far below 2^-(prec+2)
        if max(box[1] - box[0], box[3] - box[2]) > (1 << 5):
            raise ResourceError("rotation enclosure unexpectedly wide")
        re_m = Dyadic(box[0] + box[1], -F - 1)
        im_m = Dyadic(box[2] + box[3], -F - 1)
        return DyadicComplex(dyadic_round(re_m, prec + 2), dyadic_round(im_m, prec + 2))

    def describe(self) -> str:
        return GOLDEN if self.theta == GOLDEN else f"rot({self.theta})"


@dataclass(frozen=True)
class _OracleCoefficient(CoefficientSource):
    """``factor * a_index`` of another oracle (used for derivatives)."""

    oracle: "PolynomialOracle"
    index: int
    factor: int = 1

    def approx(self, prec: int) -> DyadicComplex:
        extra = abs(self.factor).bit_length()
        a = self.oracle.coefficient(self.index, prec + extra)
        return DyadicComplex(a.re * self.factor, a.im * self.factor)

    def describe(self) -> str:
        return f"{self.factor}*a{self.index}"


def _format_complex(re_: Fraction, im: Fraction) -> str:
    def f(q: Fraction) -> str:
        return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"

    if im == 0:
        return f(re_)
    sign = "-" if im < 0 else "+"
    if re_ == 0:
        return f"{'-' if im < 0 else ''}{f(abs(im))}i"
    return f"{f(re_)}{sign}{f(abs(im))}i"


# ---------------------------------------------------------------------------
# polynomial oracles
# ---------------------------------------------------------------------------

def _horner_jet(coeffs: Sequence[FixedBox], w: FixedBox, P: int, order: int) -> List[FixedBox]:
    zero = (0, 0, 0, 0)
    one = (1 << P, 1 << P, 0, 0)
    v = coeffs[-1]
    d1 = d2 = zero
    # v is the function z itself after the first step of a monic z^d + 0 z^(d-1) + ...;
    # only then may v*w use the tighter square
    identity = False
    for i, a in enumerate(reversed(coeffs[:-1])):
        if order >= 2:
            d2 = fx_add(fx_mul(d2, w, P), d1)
        if order >= 1:
            d1 = fx_add(fx_mul(d1, w, P), v)
        if identity:
            v = fx_add(fx_sqr(w, P), a)
        else:
            v = fx_add(fx_mul(v, w, P), a)
        identity = i == 0 and coeffs[-1] == one and a == zero
    out = [v]
    if order >= 1:
        out.append(d1)
    if order >= 2:
        out.append(fx_mul_int(d2, 2))
    return out


class PolynomialOracle:
    """Base class: a polynomial known only through coefficient queries."""

    degree: int

    # -- coefficient access ---------------------------------------------
    def coefficient(self, i: int, prec: int) -> DyadicComplex:
        raise NotImplementedError

    def coefficient_box(self, i: int, prec: int) -> ComplexBox:
        """A rectangle guaranteed to contain ``a_i``."""
        a = self.coefficient(i, prec)
        r = Dyadic(1, -(prec + 1))
        return ComplexBox(a.re - r, a.re + r, a.im - r, a.im + r)

    def fixed_coefficients(self, P: int) -> Tuple[FixedBox, ...]:
        cache = self.__dict__.setdefault("_fixed_cache", {})
        if P not in cache:
            cache[P] = tuple(self.coefficient_box(i, P + 1).to_fixed(P) for i in range(self.degree + 1))
        return cache[P]

    def float_coefficients(self) -> Tuple[complex, ...]:
        cache = self.__dict__.get("_float_cache")
        if cache is None:
            cache = tuple(complex(self.coefficient(i, 60)) for i in range(self.degree + 1))
            self.__dict__["_float_cache"] = cache
        return cache

    # -- evaluation -----------------------------------------------------
    def jet(self, w: FixedBox, P: int, order: int = 0) -> List[FixedBox]:
        """Enclosures of ``f, f', f''`` (up to ``order``) over a fixed box."""
        return _horner_jet(self.fixed_coefficients(P), w, P, order)

    def jet_float(self, z: complex) -> Tuple[complex, complex]:
        c = self.float_coefficients()
        v = c[-1]
        d = 0j
        for a in reversed(c[:-1]):
            d = d * z + v
            v = v * z + a
        return v, d

    # -- bounds ---------------------------------------------------------
    def leading_lower(self, prec: int = 64) -> Dyadic:
        """Certified lower bound on ``|a_d|``."""
        for p in (prec, 2 * prec, 4 * prec, 8 * prec):
            lo = self.coefficient_box(self.degree, p).abs_lower(p)
            if lo.sign() > 0:
                return lo
        raise PreconditionError("leading coefficient is not provably nonzero")

    def coefficient_upper(self, i: int, prec: int = 64) -> Dyadic:
        return self.coefficient_box(i, prec).abs_upper(prec)

    def magnitude_bound(self, prec: int = 64) -> Dyadic:
        """``A >= max_i |a_i|``."""
        return max(self.coefficient_upper(i, prec) for i in range(self.degree + 1))

    def root_radius(self) -> Dyadic:
        """Cauchy bound: every root has modulus at most ``1 + max |a_i / a_d|``."""
        lead = self.leading_lower().to_fraction()
        m = max((self.coefficient_upper(i).to_fraction() for i in range(self.degree)), default=Fraction(0))
        return Dyadic(math.ceil((1 + m / lead) * 2**16), -16)

    def describe(self) -> str:
        return type(self).__name__


class Polynomial(PolynomialOracle):
    """``a_0 + a_1 z + ... + a_d z^d`` built from coefficient sources."""

    def __init__(self, coefficients: Sequence[Union[CoefficientSource, int, str, Fraction, DyadicComplex]]):
        srcs = [_as_source(c) for c in coefficients]
        while len(srcs) > 1 and srcs[-1].exact is not None and srcs[-1].exact.is_zero():
            srcs.pop()
        if len(srcs) < 2:
            raise PreconditionError("polynomial must have degree >= 1")
        self.sources = tuple(srcs)
        self.degree = len(srcs) - 1

    def coefficient(self, i: int, prec: int) -> DyadicComplex:
        if not 0 <= i <= self.degree:
            raise IndexError(i)
        return self.sources[i].approx(prec)

    def coefficient_box(self, i: int, prec: int) -> ComplexBox:
        ex = self.sources[i].exact
        if ex is not None:
            return ComplexBox.point(ex)
        return super().coefficient_box(i, prec)

    def describe(self) -> str:
        return ",".join(s.describe() for s in self.sources)

    def __repr__(self):
        return f"Polynomial({self.describe()!r})"

    def __reduce__(self):
        return (Polynomial, (list(self.sources),))


def _as_source(c) -> CoefficientSource:
    if isinstance(c, CoefficientSource):
        return c
    if isinstance(c, DyadicComplex):
        return ExactCoefficient(c)
    if isinstance(c, Dyadic):
        return ExactCoefficient(DyadicComplex(c))
    if isinstance(c, complex):
        return _source_from_fractions(Fraction(c.real), Fraction(c.imag))
    if isinstance(c, (int, Fraction)):
        return _source_from_fractions(Fraction(c), Fraction(0))
    if isinstance(c, str):
        return parse_coefficient(c)
    raise TypeError(f"cannot use {c!r} as a coefficient")


def _source_from_fractions(re_: Fraction, im: Fraction) -> CoefficientSource:
    def dyadic(q: Fraction) -> bool:
        d = q.denominator
        return d & (d - 1) == 0

    if dyadic(re_) and dyadic(im):
        return ExactCoefficient(DyadicComplex(Dyadic.from_fraction(re_), Dyadic.from_fraction(im)))
    return RationalCoefficient(re_, im)


def _split_complex(tok: str) -> Tuple[str, str]:
    body = tok[:-1]
    for idx in range(len(body) - 1, 0, -1):
        if body[idx] in "+-" and body[idx - 1] not in "^eE*(/":
            return body[:idx], body[idx:]
    return "0", body


def parse_coefficient(token: str) -> CoefficientSource:
    """Parse one coefficient: ``"-2"``, ``"1/3"``, ``"0.5-0.25i"``, ``"golden"``."""
    tok = token.strip().replace("−", "-").replace(" ", "")
    if not tok:
        raise ValueError("empty coefficient")
    if tok.lower() == GOLDEN:
        return RotationCoefficient(GOLDEN)
    if tok.endswith(("i", "j")):
        re_s, im_s = _split_complex(tok)
        if im_s in ("", "+"):
            im_s = "1"
        elif im_s == "-":
            im_s = "-1"
        return _source_from_fractions(parse_rational(re_s), parse_rational(im_s))
    return _source_from_fractions(parse_rational(tok), Fraction(0))


def parse_polynomial(text: str) -> Polynomial:
    """Parse the comma-separated coefficient list ``a_0, a_1, ..., a_d``.

    ``golden`` stands for ``exp(2*pi*i*theta)`` with ``theta`` the golden
    mean and is accepted only as ``a_1`` of a quadratic.

    >>> parse_polynomial("-2,0,1").degree
    2
    """
    tokens = [t for t in re.split(r",", text)]
    if any(not t.strip() for t in tokens):
        raise ValueError(f"malformed coefficient list {text!r}")
    srcs = [parse_coefficient(t) for t in tokens]
    p = Polynomial(srcs)
    if p.degree < 2:
        raise ValueError("polynomial degree must be at least 2")
    for i, s in enumerate(p.sources):
        if isinstance(s, RotationCoefficient) and s.theta == GOLDEN and not (i == 1 and p.degree == 2):
            raise ValueError("'golden' is only allowed as a_1 of a degree-2 polynomial")
    if p.sources[-1].exact is None or not p.sources[-1].exact.is_zero():
        p.leading_lower()
    return p


# ---------------------------------------------------------------------------
# derived oracles
# ---------------------------------------------------------------------------

def derivative(p: PolynomialOracle) -> Polynomial:
    """Oracle for ``p'`` with coefficients ``i * a_i``.

    >>> derivative(parse_polynomial("0,-3,0,1")).describe()
    '-3,0,3'
    """
    srcs: List[CoefficientSource] = []
    for i in range(1, p.degree + 1):
        if isinstance(p, Polynomial) and p.sources[i].exact is not None:
            srcs.append(ExactCoefficient(p.sources[i].exact * i))
        elif isinstance(p, Polynomial) and isinstance(p.sources[i], RationalCoefficient):
            s = p.sources[i]
            srcs.append(RationalCoefficient(s.re * i, s.im * i))
        else:
            srcs.append(_OracleCoefficient(p, i, i))
    return Polynomial(srcs)


class IteratedPolynomial(PolynomialOracle):
    """The ``n``-fold composition ``p o ... o p`` of degree ``d**n``.

    Evaluation iterates ``p`` (never expands).  Coefficient queries expand
    the composition in interval arithmetic on demand, so they are only
    practical for small degrees.
    """

    def __init__(self, base: PolynomialOracle, n: int, degree_cap: int = DEFAULT_DEGREE_CAP):
        if n < 1:
            raise PreconditionError("iteration count must be >= 1")
        self.base = base
        self.n = n
        self.degree = base.degree**n
        self.degree_cap = degree_cap
        self._expanded = {}

    def jet(self, w: FixedBox, P: int, order: int = 0) -> List[FixedBox]:
        one = (1 << P, 1 << P, 0, 0)
        zero = (0, 0, 0, 0)
        v, d1, d2 = w, one, zero
        for _ in range(self.n):
            j = self.base.jet(v, P, order)
            if order >= 2:
                d2 = fx_add(fx_mul(j[2], fx_sqr(d1, P), P), fx_mul(j[1], d2, P))
            if order >= 1:
                d1 = fx_mul(j[1], d1, P)
            v = j[0]
        return [v, d1, d2][: order + 1]

    def jet_float(self, z: complex) -> Tuple[complex, complex]:
        d = 1 + 0j
        for _ in range(self.n):
            v, dv = self.base.jet_float(z)
            d *= dv
            z = v
        return z, d

    def _expand(self, P: int) -> List[FixedBox]:
        if self.degree > self.degree_cap:
            raise ResourceError(f"composition degree {self.degree} exceeds cap {self.degree_cap}")
        if P in self._expanded:
            return self._expanded[P]
        base = list(self.base.fixed_coefficients(P))
        q = base[:]
        for _ in range(self.n - 1):
            acc = [base[-1]]
            for a in reversed(base[:-1]):
                acc = _poly_mul(acc, q, P)
                acc[0] = fx_add(acc[0], a)
            q = acc
        self._expanded[P] = q
        return q

    def coefficient(self, i: int, prec: int) -> DyadicComplex:
        if not 0 <= i <= self.degree:
            raise IndexError(i)
        guard = 16 + 4 * self.n * max(1, self.base.degree.bit_length())
        for _ in range(8):
            P = prec + guard
            box = self._expand(P)[i]
            if max(box[1] - box[0], box[3] - box[2]) <= 1 << (P - prec - 3):
                re_m = Dyadic(box[0] + box[1], -P - 1)
                im_m = Dyadic(box[2] + box[3], -P - 1)
                return DyadicComplex(dyadic_round(re_m, prec + 2), dyadic_round(im_m, prec + 2))
            guard *= 2
        raise ResourceError("could not expand composition to the requested precision")

    def describe(self) -> str:
        return f"iterate({self.base.describe()}, {self.n})"


def _poly_mul(a: List[FixedBox], b: List[FixedBox], P: int) -> List[FixedBox]:
    out = [(0, 0, 0, 0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == (0, 0, 0, 0):
            continue
        for j, y in enumerate(b):
            out[i + j] = fx_add(out[i + j], fx_mul(x, y, P))
    return out


class FixedPointEquation(PolynomialOracle):
    """``q(z) - z``; with ``q = p^n`` its roots are the points of period dividing ``n``."""

    def __init__(self, q: PolynomialOracle):
        self.q = q
        self.degree = q.degree
        if self.degree < 2:
            raise PreconditionError("fixed-point equation needs degree >= 2")

    @classmethod
    def periodic(cls, p: PolynomialOracle, n: int) -> "FixedPointEquation":
        return cls(IteratedPolynomial(p, n) if n > 1 else p)

    @property
    def base(self) -> PolynomialOracle:
        return self.q.base if isinstance(self.q, IteratedPolynomial) else self.q

    @property
    def period(self) -> int:
        return self.q.n if isinstance(self.q, IteratedPolynomial) else 1

    def coefficient(self, i: int, prec: int) -> DyadicComplex:
        a = self.q.coefficient(i, prec)
        return a - 1 if i == 1 else a

    def jet(self, w: FixedBox, P: int, order: int = 0) -> List[FixedBox]:
        j = self.q.jet(w, P, order)
        j[0] = fx_sub(j[0], w)
        if order >= 1:
            one = 1 << P
            j[1] = (j[1][0] - one, j[1][1] - one, j[1][2], j[1][3])
        return j

    def jet_float(self, z: complex) -> Tuple[complex, complex]:
        v, d = self.q.jet_float(z)
        return v - z, d - 1

    def escape_radius_squared(self, P: int) -> int:
        cache = self.__dict__.setdefault("_b2", {})
        if P not in cache:
            from .outer import escape_radius

            b = escape_radius(self.base).b
            cache[P] = b.ceil_scaled(P) ** 2
        return cache[P]

    def excludes(self, w: FixedBox, P: int) -> bool:
        """True when no periodic point can lie in ``w``: some iterate leaves the escape disk."""
        b2 = self.escape_radius_squared(P)
        if fx_mig2(w) > b2:
            return True
        v = w
        for _ in range(self.period):
            v = self.base.jet(v, P, 0)[0]
            if fx_mig2(v) > b2:
                return True
        return False

    def root_radius(self) -> Dyadic:
        from .outer import escape_radius

        return escape_radius(self.base).b

    def describe(self) -> str:
        return f"{self.q.describe()} - z"


def iterate_map_poly(p: PolynomialOracle, n: int, degree_cap: int = DEFAULT_DEGREE_CAP) -> PolynomialOracle:
    """Oracle for ``p^n``; ``n == 1`` returns ``p`` itself.

    Raises :class:`ResourceError` when ``d**n`` exceeds ``degree_cap``.
    """
    if n < 1:
        raise PreconditionError("n must be >= 1")
    if n == 1:
        return p
    if p.degree**n > degree_cap:
        raise ResourceError(f"degree {p.degree}**{n} exceeds cap {degree_cap}")
    return IteratedPolynomial(p, n, degree_cap)


# ---------------------------------------------------------------------------
# enclosures on ComplexBox
# ---------------------------------------------------------------------------

def _guard_bits(p: PolynomialOracle, mag: Dyadic) -> int:
    # depends on p and a fixed magnitude only, never on the input box, so that
    # sub-boxes are evaluated on the same grid as their parents (monotone refinement)
    mag_bits = math.ceil(float(mag) + 1).bit_length()
    return 8 + 2 * p.degree.bit_length() + p.degree * mag_bits


def _eval_magnitude(p: PolynomialOracle) -> Dyadic:
    cache = p.__dict__
    if "_eval_mag" not in cache:
        cache["_eval_mag"] = p.root_radius()
    return cache["_eval_mag"]


def eval_enclosure(p: PolynomialOracle, x: ComplexBox, prec: int) -> ComplexBox:
    """A box containing ``p(z)`` for every ``z`` in ``x``.

    Horner's scheme in outward-rounded interval arithmetic at a working
    precision a little finer than ``2**-prec``.  The working grid depends
    only on ``p`` and ``prec``; the rounding excess stays below ``2**-prec``
    on boxes within the root radius of ``p``.

    >>> p = parse_polynomial("-2,0,1")
    >>> str(eval_enclosure(p, ComplexBox.point(1), 10))
    '[-1, -1] + i[0, 0]'
    """
    if prec < 1:
        raise PreconditionError("prec must be >= 1")
    P = prec + _guard_bits(p, _eval_magnitude(p))
    v = p.jet(x.to_fixed(P), P, 0)[0]
    return ComplexBox.from_fixed(v, P)


@dataclass(frozen=True)
class Escaped:
    """Certified escape: every point's ``step``-th iterate lies outside the escape disk."""

    step: int


@dataclass(frozen=True)
class OrbitPoint:
    point: DyadicComplex
    index: int


def iterate_enclosure(
    p: PolynomialOracle,
    x: ComplexBox,
    k: int,
    prec: int,
    radius: Optional[Dyadic] = None,
) -> Union[ComplexBox, Escaped]:
    """Enclose ``p^k`` over ``x`` or certify escape.

    ``radius`` is the escape radius ``b`` (computed from ``p`` if omitted).
    ``Escaped(j)`` reports the first ``j`` at which the whole enclosure of
    ``p^j(x)`` lies outside the closed disk of radius ``b``; since
    ``|z| >= b`` forces ``|p(z)| >= 2|z|``, such points never return, so
    ``x`` misses ``p^{-k}(D)`` for every ``k >= j``.
    """
    if k < 1:
        raise PreconditionError("k must be >= 1")
    if radius is None:
        from .outer import escape_radius

        radius = escape_radius(p).b
    P = prec + _guard_bits(p, radius)
    b2 = radius.ceil_scaled(P) ** 2
    w = x.to_fixed(P)
    if fx_mig2(w) > b2:
        return Escaped(0)
    limit = _MAX_ORBIT_BITS + P
    for j in range(1, k + 1):
        w = p.jet(w, P, 0)[0]
        if fx_mig2(w) > b2:
            return Escaped(j)
        if max(abs(w[0]), abs(w[1]), abs(w[2]), abs(w[3])).bit_length() > limit:
            raise DyadicOverflowError("orbit enclosure grew beyond the supported range")
    return ComplexBox.from_fixed(w, P)


def orbit(p: PolynomialOracle, z, n: int, prec: int = 64) -> List[OrbitPoint]:
    """``z, p(z), ..., p^n(z)`` rounded to ``2**-prec`` (midpoints of enclosures)."""
    P = prec + 32
    w = ComplexBox.point(z).to_fixed(P)
    out = [OrbitPoint(DyadicComplex.of(z), 0)]
    for i in range(1, n + 1):
        w = p.jet(w, P, 0)[0]
        mid = DyadicComplex(Dyadic(w[0] + w[1], -P - 1), Dyadic(w[2] + w[3], -P - 1))
        out.append(OrbitPoint(mid.round(prec), i))
    return out


def abs_bounds_fixed(w: FixedBox, P: int, prec: int = 64) -> Tuple[Dyadic, Dyadic]:
    """``(lower, upper)`` bounds on ``|z|`` over a fixed box."""
    lo = sqrt_lower(Dyadic(fx_mig2(w), -2 * P), prec)
    hi = sqrt_upper(Dyadic(fx_mag2(w), -2 * P), prec)
    return lo, hi
