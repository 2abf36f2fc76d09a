"""Random generators and exact reference evaluators shared by the tests."""

from fractions import Fraction

import numpy as np

from filledjulia.dyadic import ComplexBox, Dyadic, DyadicComplex


def random_box(rng, mag=2, max_exp=-10):
    """A random box with corners in ``[-mag, mag]`` on a random dyadic grid."""
    e = int(rng.integers(max_exp, 1))
    scale = 1 << -e
    xs = sorted(int(v) for v in rng.integers(-mag * scale, mag * scale + 1, size=2))
    ys = sorted(int(v) for v in rng.integers(-mag * scale, mag * scale + 1, size=2))
    return ComplexBox(Dyadic(xs[0], e), Dyadic(xs[1], e), Dyadic(ys[0], e), Dyadic(ys[1], e))


def random_point_in(rng, box, extra_bits=8):
    """A dyadic point of ``box``, on a grid finer than the box's corners."""
    def pick(lo, hi):
        lo_f, hi_f = lo.to_fraction(), hi.to_fraction()
        t = Fraction(int(rng.integers(0, (1 << extra_bits) + 1)), 1 << extra_bits)
        return Dyadic.from_fraction(lo_f + t * (hi_f - lo_f))
    return DyadicComplex(pick(box.re_lo, box.re_hi), pick(box.im_lo, box.im_hi))


def exact_eval(coeffs, z):
    """Horner's rule in exact dyadic arithmetic for dyadic coefficients."""
    v = DyadicComplex.of(coeffs[-1])
    for a in reversed(coeffs[:-1]):
        v = v * z + DyadicComplex.of(a)
    return v


def random_int_poly(rng, degree=None, mag=3):
    d = int(rng.integers(2, 5)) if degree is None else degree
    coeffs = [int(c) for c in rng.integers(-mag, mag + 1, size=d)]
    lead = int(rng.choice([-2, -1, 1, 2]))
    return coeffs + [lead]


def segment_distance(z: complex) -> float:
    """Euclidean distance from ``z`` to the real segment ``[-2, 2]``."""
    x = min(max(z.real, -2.0), 2.0)
    return abs(z - x)


def uniform_segment(n, seed=0):
    return np.random.default_rng(seed).uniform(-2.0, 2.0, size=n)


# criterion number -> (title, passed, detail); printed at the end of the session
ACCEPTANCE = {}


def record(number, title, passed, detail=""):
    ACCEPTANCE[number] = (title, bool(passed), detail)
