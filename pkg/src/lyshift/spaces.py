"""Sequence spaces and seminorm evaluation on finitely supported vectors.

Supported kinds: c0(J), lp(J), weighted lp over Z, Koethe spaces defined by a
matrix (p = 0 gives sup seminorms, p >= 1 gives p-sums), and the product
space K^J with the seminorm family ||x||_k = max_{|j| <= k} |x_j|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Union

import numpy as np

from .scalars import (
    Radical,
    Scalar,
    fraction_to_float,
    log_abs_fraction,
    scalar_abs_pow,
    scalar_is_zero,
    scalar_log_abs,
    scalar_mul,
    scalar_to_float,
)
from .weights import (
    IndexDomain,
    SupRatio,
    WeightSpec,
    eval_weight,
    log_abs_array,
)


# ---------------------------------------------------------------------------
# Koethe matrices

@dataclass(frozen=True)
class ConstantMatrix:
    """a_{j,k} = value for every j, k (value 1 recovers c0 / lp)."""

    value: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))


@dataclass(frozen=True)
class PowerMatrix:
    """a_{j,k} = (|j| + 1)**k."""


@dataclass(frozen=True)
class ConstCol:
    value: Fraction


@dataclass(frozen=True)
class PowerCol:
    exponent: int


@dataclass(frozen=True)
class GeomCol:
    """a_j = base**(-|j|): a strictly decaying column."""

    base: Fraction


ColumnRule = Union[ConstCol, PowerCol, GeomCol]


@dataclass(frozen=True)
class ColumnsMatrix:
    """Explicit per-k column rules; k beyond the list falls back to powers.

    Column k > len(columns) evaluates (|j|+1)**(k - len(columns) + rest_exp).
    """

    columns: tuple
    rest_exp: int = 0


@dataclass(frozen=True)
class TableMatrix:
    entries: tuple          # ((j, k), value) pairs
    default: Fraction = Fraction(1)

    def __post_init__(self):
        frozen = tuple(sorted(((int(j), int(k)), Fraction(v)) for (j, k), v in dict(self.entries).items()))
        object.__setattr__(self, "entries", frozen)
        object.__setattr__(self, "default", Fraction(self.default))

    @property
    def entry_map(self) -> dict:
        return dict(self.entries)


MatrixKind = Union[ConstantMatrix, PowerMatrix, ColumnsMatrix, TableMatrix]


@dataclass(frozen=True)
class KotheMatrix:
    kind: MatrixKind
    domain: IndexDomain
    all_nonzero: bool = True
    k_probe: int = 8

    def validate(self, window: tuple[int, int] = (-64, 64)) -> None:
        """Sampled checks: monotone columns, a positive entry per row."""
        lo, hi = window
        if self.domain is IndexDomain.UNILATERAL:
            lo = max(lo, 1)
        for j in range(lo, hi + 1):
            prev = None
            positive = False
            for k in range(1, self.k_probe + 1):
                a = kothe_entry(self, j, k)
                if a < 0:
                    raise ValueError(f"negative matrix entry at ({j}, {k})")
                if prev is not None and a < prev:
                    raise ValueError(f"column not monotone at ({j}, {k})")
                positive = positive or a > 0
                prev = a
            if not positive:
                raise ValueError(f"row {j} has no positive entry within k_probe")


def kothe_entry(m: KotheMatrix, j: int, k: int) -> Fraction:
    """Exact matrix entry a_{j,k} (k >= 1)."""
    if k < 1:
        raise ValueError("seminorm index k must be >= 1")
    kind = m.kind
    if isinstance(kind, ConstantMatrix):
        return kind.value
    if isinstance(kind, PowerMatrix):
        return Fraction(abs(j) + 1) ** k
    if isinstance(kind, ColumnsMatrix):
        if k <= len(kind.columns):
            col = kind.columns[k - 1]
            if isinstance(col, ConstCol):
                return Fraction(col.value)
            if isinstance(col, PowerCol):
                return Fraction(abs(j) + 1) ** col.exponent
            if isinstance(col, GeomCol):
                return Fraction(col.base) ** (-abs(j))
            raise TypeError(f"unknown column rule {col!r}")
        return Fraction(abs(j) + 1) ** (k - len(kind.columns) + kind.rest_exp)
    if isinstance(kind, TableMatrix):
        return kind.entry_map.get((j, k), kind.default)
    raise TypeError(f"unknown matrix kind {kind!r}")


def kothe_log_column(m: KotheMatrix, k: int, idx: np.ndarray) -> np.ndarray:
    """ln a_{j,k} over an index array (vectorized for the catalog kinds)."""
    kind = m.kind
    if isinstance(kind, ConstantMatrix):
        return np.full(idx.shape, log_abs_fraction(kind.value))
    if isinstance(kind, PowerMatrix):
        return k * np.log(np.abs(idx).astype(np.float64) + 1.0)
    if isinstance(kind, ColumnsMatrix):
        if k <= len(kind.columns):
            col = kind.columns[k - 1]
            if isinstance(col, ConstCol):
                return np.full(idx.shape, log_abs_fraction(col.value))
            if isinstance(col, PowerCol):
                return col.exponent * np.log(np.abs(idx).astype(np.float64) + 1.0)
            if isinstance(col, GeomCol):
                return -np.abs(idx).astype(np.float64) * log_abs_fraction(col.base)
        e = k - len(kind.columns) + kind.rest_exp
        return e * np.log(np.abs(idx).astype(np.float64) + 1.0)
    return np.array([log_abs_fraction(kothe_entry(m, int(j), k)) for j in idx])


def kothe_sup_ratio(m: KotheMatrix, k: int, l: int) -> SupRatio:
    """Scan ratio a_{i,k} / a_{j+1,l} for the growth criterion."""
    return SupRatio(
        num_exact=lambda i: kothe_entry(m, i, k),
        den_exact=lambda j1: kothe_entry(m, j1, l),
        num_log=lambda idx: kothe_log_column(m, k, idx),
        den_log=lambda idx: kothe_log_column(m, l, idx),
    )


def power_matrix(domain: IndexDomain = IndexDomain.BILATERAL) -> KotheMatrix:
    return KotheMatrix(PowerMatrix(), domain)


def constant_matrix(domain: IndexDomain, value=1) -> KotheMatrix:
    v = Fraction(value)
    return KotheMatrix(ConstantMatrix(v), domain, all_nonzero=(v != 0))


# ---------------------------------------------------------------------------
# space kinds

@dataclass(frozen=True)
class C0Space:
    domain: IndexDomain


@dataclass(frozen=True)
class LpSpace:
    domain: IndexDomain
    p: float = 2


@dataclass(frozen=True)
class WeightedLpSpace:
    """lp over Z against a positive sequence nu: ||x||_p^p = sum |x_n|^p nu_n."""

    p: float
    nu: WeightSpec


@dataclass(frozen=True)
class KotheSpace:
    matrix: KotheMatrix
    p: float    # 0 selects sup seminorms, p >= 1 the p-sums

    def __post_init__(self):
        if not (self.p == 0 or self.p >= 1):
            raise ValueError("p must be 0 or >= 1")


@dataclass(frozen=True)
class ProductSpace:
    """K^J with seminorms ||x||_k = max_{|j| <= k} |x_j|."""

    domain: IndexDomain


SpaceSpec = Union[C0Space, LpSpace, WeightedLpSpace, KotheSpace, ProductSpace]


def space_domain(space: SpaceSpec) -> IndexDomain:
    if isinstance(space, (C0Space, LpSpace, ProductSpace)):
        return space.domain
    if isinstance(space, WeightedLpSpace):
        return IndexDomain.BILATERAL
    return space.matrix.domain


def space_p(space: SpaceSpec) -> Optional[float]:
    """The p of a p-sum space; None for sup-type evaluation."""
    if isinstance(space, (C0Space, ProductSpace)):
        return None
    if isinstance(space, KotheSpace):
        return None if space.p == 0 else space.p
    return space.p


# ---------------------------------------------------------------------------
# sparse vectors

@dataclass(frozen=True, eq=False)
class SparseVector:
    """Finitely supported sequence with exact entries; zeros are never stored."""

    domain: IndexDomain
    entries: tuple      # ((index, scalar), ...) sorted by index

    @classmethod
    def of(cls, mapping: Mapping[int, Scalar], domain: IndexDomain) -> "SparseVector":
        items = []
        for j, v in mapping.items():
            j = int(j)
            if domain is IndexDomain.UNILATERAL and j < 1:
                raise ValueError(f"index {j} outside unilateral domain")
            if isinstance(v, (int, str)):
                v = Fraction(v)
            if scalar_is_zero(v):
                continue
            items.append((j, v))
        return cls(domain, tuple(sorted(items)))

    @classmethod
    def basis(cls, j: int, domain: IndexDomain) -> "SparseVector":
        return cls.of({j: Fraction(1)}, domain)

    @classmethod
    def zero(cls, domain: IndexDomain) -> "SparseVector":
        return cls(domain, ())

    @property
    def entry_map(self) -> dict:
        return dict(self.entries)

    @property
    def support(self) -> tuple:
        return tuple(j for j, _ in self.entries)

    @property
    def is_zero(self) -> bool:
        return not self.entries

    def value_at(self, j: int) -> Scalar:
        return self.entry_map.get(j, Fraction(0))

    def scaled(self, q) -> "SparseVector":
        if Fraction(q) == 0:
            return SparseVector.zero(self.domain)
        return SparseVector(self.domain, tuple((j, scalar_mul(v, q)) for j, v in self.entries))

    def max_log_abs(self) -> float:
        if not self.entries:
            return float("-inf")
        return max(scalar_log_abs(v) for _, v in self.entries)

    def __eq__(self, other):
        if not isinstance(other, SparseVector):
            return NotImplemented
        return self.domain is other.domain and self.entries == other.entries

    def __repr__(self):
        inner = ", ".join(f"{j}: {v}" for j, v in self.entries)
        return f"SparseVector({self.domain.value}, {{{inner}}})"


def indicator(indices, domain: IndexDomain) -> SparseVector:
    """Characteristic vector of a finite index set (entries exactly 1)."""
    return SparseVector.of({int(j): Fraction(1) for j in indices}, domain)


# ---------------------------------------------------------------------------
# seminorms

@dataclass(frozen=True)
class SeminormValue:
    k: int
    value: float
    exact: Optional[Fraction] = None          # exact value when rational
    exact_power: Optional[Fraction] = None    # exact value**p for p-sum kinds
    p: Optional[float] = None

    def exceeds_one(self) -> Optional[bool]:
        """Exact test value > 1 when exact data is available."""
        if self.exact is not None:
            return self.exact > 1
        if self.exact_power is not None:
            return self.exact_power > 1
        return None

    def at_least_one(self) -> Optional[bool]:
        if self.exact is not None:
            return self.exact >= 1
        if self.exact_power is not None:
            return self.exact_power >= 1
        return None


def _weight_factor(space: SpaceSpec, j: int, k: int) -> Fraction:
    """The per-coordinate positive factor entering the seminorm."""
    if isinstance(space, (C0Space, LpSpace, ProductSpace)):
        return Fraction(1)
    if isinstance(space, WeightedLpSpace):
        return eval_weight(space.nu, j)
    return kothe_entry(space.matrix, j, k)


def _inth_root(x: int, p: int) -> int:
    """Floor of the integer p-th root (Newton iteration, exact)."""
    if x < 2:
        return x
    r = 1 << ((x.bit_length() + p - 1) // p)
    while True:
        nr = ((p - 1) * r + x // r ** (p - 1)) // p
        if nr >= r:
            return r
        r = nr


def _root_if_exact(power_sum: Fraction, p: int) -> Optional[Fraction]:
    """Exact p-th root of a nonnegative rational, if it exists."""
    if power_sum == 0:
        return Fraction(0)
    num, den = power_sum.numerator, power_sum.denominator
    rn = _inth_root(num, p)
    rd = _inth_root(den, p)
    if rn ** p == num and rd ** p == den:
        return Fraction(rn, rd)
    return None


def seminorm(space: SpaceSpec, x: SparseVector, k: int = 1) -> SeminormValue:
    """Seminorm ||x||_k, exact over the finite support.

    Banach kinds ignore k (single norm).  For p-sum kinds with integer p the
    exact p-th power is carried alongside the float value.
    """
    if x.domain is not space_domain(space):
        raise ValueError("vector domain does not match space domain")
    if isinstance(space, ProductSpace):
        best = Fraction(0)
        best_f = 0.0
        exact = True
        for j, v in x.entries:
            if abs(j) > k:
                continue
            if isinstance(v, Radical):
                exact = False
                best_f = max(best_f, abs(scalar_to_float(v)))
            else:
                best = max(best, abs(v))
        if exact:
            return SeminormValue(k, fraction_to_float(best), exact=best)
        best_f = max(best_f, fraction_to_float(best))
        return SeminormValue(k, best_f)

    p = space_p(space)
    if p is None:
        # sup-type: max_j factor * |x_j|
        best: Optional[Fraction] = Fraction(0)
        best_f = 0.0
        for j, v in x.entries:
            a = abs(_weight_factor(space, j, k))
            if isinstance(v, Radical):
                best = None
                best_f = max(best_f, fraction_to_float(a) * abs(scalar_to_float(v)))
            else:
                cand = a * abs(v)
                if best is not None:
                    best = max(best, cand)
                best_f = max(best_f, fraction_to_float(cand))
        if best is not None:
            return SeminormValue(k, fraction_to_float(best), exact=best)
        return SeminormValue(k, best_f)

    if float(p).is_integer():
        ip = int(p)
        total = Fraction(0)
        for j, v in x.entries:
            a = abs(_weight_factor(space, j, k))
            if isinstance(space, WeightedLpSpace):
                total += scalar_abs_pow(v, ip) * a
            else:
                total += scalar_abs_pow(v, ip) * a ** ip
        if total == 0:
            return SeminormValue(k, 0.0, exact=Fraction(0), exact_power=Fraction(0), p=p)
        value = math.exp(log_abs_fraction(total) / ip)
        return SeminormValue(k, value, exact=_root_if_exact(total, ip), exact_power=total, p=p)

    total_f = 0.0
    for j, v in x.entries:
        a = fraction_to_float(abs(_weight_factor(space, j, k)))
        if isinstance(space, WeightedLpSpace):
            total_f += abs(scalar_to_float(v)) ** p * a
        else:
            total_f += (a * abs(scalar_to_float(v))) ** p
    return SeminormValue(k, total_f ** (1.0 / p), p=p)


def seminorm_log(space: SpaceSpec, x: SparseVector, k: int = 1) -> float:
    """ln ||x||_k computed in log domain (for orbits with huge entries)."""
    if x.is_zero:
        return float("-inf")
    p = space_p(space)
    logs = []
    for j, v in x.entries:
        if isinstance(space, ProductSpace) and abs(j) > k:
            continue
        la = log_abs_fraction(abs(_weight_factor(space, j, k))) if not isinstance(space, (C0Space, LpSpace, ProductSpace)) else 0.0
        lv = scalar_log_abs(v)
        if isinstance(space, WeightedLpSpace):
            logs.append(lv + la / p)
        else:
            logs.append(lv + la)
    if not logs:
        return float("-inf")
    m = max(logs)
    if p is None:
        return m
    if m == float("-inf"):
        return m
    acc = sum(math.exp(p * (t - m)) for t in logs)
    return m + math.log(acc) / p


def canonical_norm_profile(space: SpaceSpec, j_range, k: int = 1) -> list:
    """[(j, seminorm of e_j)] across an index range."""
    dom = space_domain(space)
    out = []
    for j in j_range:
        j = int(j)
        if dom is IndexDomain.UNILATERAL and j < 1:
            continue
        out.append((j, seminorm(space, SparseVector.basis(j, dom), k)))
    return out


def canonical_norm_log_series(space: SpaceSpec, idx: np.ndarray, k: int = 1) -> np.ndarray:
    """ln ||e_j||_k vectorized over an index array."""
    if isinstance(space, (C0Space, LpSpace)):
        return np.zeros(idx.shape)
    if isinstance(space, ProductSpace):
        out = np.zeros(idx.shape)
        out[np.abs(idx) > k] = -np.inf
        return out
    if isinstance(space, WeightedLpSpace):
        return log_abs_array(space.nu, idx) / space.p
    if isinstance(space, KotheSpace):
        return kothe_log_column(space.matrix, k, idx)
    raise TypeError(f"unknown space {space!r}")
