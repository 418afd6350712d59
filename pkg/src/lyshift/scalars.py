"""Scalar arithmetic that stays safe over long product horizons.

Magnitudes are tracked as natural logarithms (``LogMag``) so that products of
up to ~10**6 factors never overflow a float; certificate replay uses exact
rationals instead.  A small ``Radical`` type represents c * r**(1/p) exactly,
which is all the p-norm machinery needs for witness vectors whose entries are
p-th roots of rationals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

#: Comparison tolerance in log domain (relative).
LOG_TOL = 1e-12

_NEG_INF = float("-inf")


def log_abs_fraction(x) -> float:
    """ln|x| for a rational of any bit size; -inf encodes zero.

    ``float(Fraction)`` overflows beyond ~1e308, so numerator and denominator
    are logged separately (``math.log`` accepts arbitrary-size ints).
    """
    x = Fraction(x)
    if x == 0:
        return _NEG_INF
    return math.log(abs(x.numerator)) - math.log(x.denominator)


def fraction_to_float(x: Fraction) -> float:
    """float(x) with graceful handling of huge numerators/denominators."""
    try:
        return float(x)
    except OverflowError:
        lg = log_abs_fraction(x)
        mag = math.inf if lg > 709 else math.exp(lg)
        return -mag if x < 0 else mag


@dataclass(frozen=True)
class LogMag:
    """|x| stored as ln|x|; log_abs == -inf encodes an exact zero."""

    log_abs: float

    @property
    def is_zero(self) -> bool:
        return self.log_abs == _NEG_INF

    def to_float(self) -> float:
        if self.is_zero:
            return 0.0
        return math.inf if self.log_abs > 709 else math.exp(self.log_abs)


LOGMAG_ZERO = LogMag(_NEG_INF)
LOGMAG_ONE = LogMag(0.0)


@dataclass(frozen=True)
class Radical:
    """coeff * radicand**(1/degree) with rational coeff and radicand >= 0.

    Closed under multiplication by rationals and under |.|**degree, which is
    what exact orbit simulation and p-sum seminorms require.
    """

    coeff: Fraction
    radicand: Fraction
    degree: int

    def __post_init__(self):
        if self.degree < 1:
            raise ValueError("degree must be >= 1")
        if self.radicand < 0:
            raise ValueError("radicand must be nonnegative")

    def to_float(self) -> float:
        r = fraction_to_float(self.radicand) ** (1.0 / self.degree)
        return fraction_to_float(self.coeff) * r


Scalar = Union[Fraction, Radical]


def scalar_is_zero(x: Scalar) -> bool:
    if isinstance(x, Radical):
        return x.coeff == 0 or x.radicand == 0
    return x == 0


def scalar_mul(x: Scalar, q) -> Scalar:
    """Multiply a scalar by a rational; Radicals keep their exact form."""
    q = Fraction(q)
    if isinstance(x, Radical):
        return Radical(x.coeff * q, x.radicand, x.degree)
    return x * q


def scalar_abs_pow(x: Scalar, p: int) -> Fraction:
    """|x|**p as an exact rational (p a positive integer).

    For a Radical the exponent must be a multiple of its degree.
    """
    if isinstance(x, Radical):
        if p % x.degree != 0:
            raise ValueError("exponent incompatible with radical degree")
        return abs(x.coeff) ** p * x.radicand ** (p // x.degree)
    return abs(x) ** p


def scalar_to_float(x: Scalar) -> float:
    if isinstance(x, Radical):
        return x.to_float()
    return fraction_to_float(x)


def scalar_log_abs(x: Scalar) -> float:
    if isinstance(x, Radical):
        if scalar_is_zero(x):
            return _NEG_INF
        return log_abs_fraction(x.coeff) + log_abs_fraction(x.radicand) / x.degree
    return log_abs_fraction(x)


def logmag_of(x) -> LogMag:
    """LogMag of an exact scalar; 0 maps to the absorbing zero sentinel."""
    if isinstance(x, (Fraction, int)):
        return LogMag(log_abs_fraction(x))
    if isinstance(x, Radical):
        return LogMag(scalar_log_abs(x))
    if isinstance(x, float):
        return LOGMAG_ZERO if x == 0.0 else LogMag(math.log(abs(x)))
    raise TypeError(f"unsupported scalar type {type(x)!r}")


def logmag_mul(a: LogMag, b: LogMag) -> LogMag:
    if a.is_zero or b.is_zero:
        return LOGMAG_ZERO
    return LogMag(a.log_abs + b.log_abs)


def logmag_pow(x: LogMag, e: float) -> LogMag:
    if x.is_zero:
        return LOGMAG_ZERO
    return LogMag(x.log_abs * e)


def logmag_product(xs: Iterable[LogMag]) -> LogMag:
    """Product of magnitudes; the empty product is 1, zero is absorbing."""
    terms = []
    for x in xs:
        if x.is_zero:
            return LOGMAG_ZERO
        terms.append(x.log_abs)
    return LogMag(math.fsum(terms)) if terms else LOGMAG_ONE


def exceeds(x: LogMag, threshold) -> bool:
    """Strict test |x| > threshold for a positive threshold."""
    if isinstance(threshold, (int, Fraction)):
        if threshold <= 0:
            raise ValueError("threshold must be positive")
        thr_log = log_abs_fraction(threshold)
    else:
        if threshold <= 0:
            raise ValueError("threshold must be positive")
        thr_log = math.log(threshold)
    if x.is_zero:
        return False
    return x.log_abs > thr_log


def logmag_close(a: LogMag, b: LogMag, tol: float = LOG_TOL) -> bool:
    """Approximate equality in log domain with relative tolerance ``tol``."""
    if a.is_zero or b.is_zero:
        return a.is_zero and b.is_zero
    scale = max(1.0, abs(a.log_abs), abs(b.log_abs))
    return abs(a.log_abs - b.log_abs) <= tol * scale
