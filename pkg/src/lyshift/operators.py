"""Weighted shifts and discrete weighted composition operators.

Everything acts on finitely supported vectors with exact entries.  Discrete
composition systems live on a finite index window; operations report boundary
leakage explicitly instead of silently truncating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Union

import numpy as np

from .scalars import (
    LOGMAG_ZERO,
    LogMag,
    fraction_to_float,
    log_abs_fraction,
    scalar_is_zero,
    scalar_mul,
)
from .spaces import (
    C0Space,
    KotheSpace,
    SpaceSpec,
    SparseVector,
    WeightedLpSpace,
    kothe_log_column,
)
from .weights import (
    Finite,
    IndexDomain,
    Infinite,
    SpecError,
    WeightSpec,
    eval_weight,
    log_abs_array,
    symbolic_weight_bound,
)


class BoundaryEscape(RuntimeError):
    """An orbit or preimage left the analysis window."""


# ---------------------------------------------------------------------------
# shifts

@dataclass(frozen=True)
class ShiftOperator:
    """Backward shift: (B_w x)_j = w_j * x_{j+1}."""

    weights: WeightSpec

    @property
    def domain(self) -> IndexDomain:
        return self.weights.domain


def apply_shift(op: ShiftOperator, x: SparseVector) -> SparseVector:
    """Exact application; support moves left by one, edge entries drop."""
    if x.domain is not op.domain:
        raise ValueError("vector and operator domains differ")
    out = {}
    for j, v in x.entries:
        m = j - 1
        if op.domain is IndexDomain.UNILATERAL and m < 1:
            continue
        w = eval_weight(op.weights, m)
        if w == 0:
            continue
        out[m] = scalar_mul(v, w)
    return SparseVector.of(out, x.domain)


# ---------------------------------------------------------------------------
# discrete systems

@dataclass(frozen=True)
class ShiftMap:
    d: int = 1          # f(n) = n + d


@dataclass(frozen=True)
class AffineMap:
    a: int
    b: int              # f(n) = a*n + b

    def __post_init__(self):
        if self.a == 0:
            raise ValueError("affine map must have a != 0")


@dataclass(frozen=True)
class TableMap:
    entries: tuple

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(sorted((int(k), int(v)) for k, v in dict(self.entries).items())))

    @property
    def entry_map(self) -> dict:
        return dict(self.entries)


MapKind = Union[ShiftMap, AffineMap, TableMap]


@dataclass(frozen=True)
class DiscreteSystem:
    """Countable discrete data for composition-operator analysis.

    ``window`` is the finite slice oft the index domain actually iterated;
    ``masses`` is an atomic measure (None means counting measure).
    """

    window: tuple[int, int]
    map_f: MapKind
    weights: WeightSpec
    p: float = 2
    masses: Optional[tuple] = None      # ((index, Fraction), ...) or None
    domain: IndexDomain = IndexDomain.BILATERAL

    def __post_init__(self):
        lo, hi = self.window
        if lo > hi:
            raise ValueError("empty window")
        if self.masses is not None:
            frozen = tuple(sorted((int(j), Fraction(v)) for j, v in dict(self.masses).items()))
            if any(v <= 0 for _, v in frozen):
                raise ValueError("masses must be strictly positive")
            object.__setattr__(self, "masses", frozen)

    def window_range(self) -> range:
        lo, hi = self.window
        if self.domain is IndexDomain.UNILATERAL:
            lo = max(lo, 1)
        return range(lo, hi + 1)

    def in_window(self, j: int) -> bool:
        lo, hi = self.window
        if self.domain is IndexDomain.UNILATERAL and j < 1:
            return False
        return lo <= j <= hi

    def in_domain(self, j: int) -> bool:
        return j >= 1 if self.domain is IndexDomain.UNILATERAL else True

    def mass(self, j: int) -> Fraction:
        if self.masses is None:
            return Fraction(1)
        return dict(self.masses).get(j, Fraction(1))

    def weight(self, j: int) -> Fraction:
        return eval_weight(self.weights, j)


def map_apply(sys: DiscreteSystem, n: int) -> Optional[int]:
    """f(n) in the conceptual (infinite) domain; None where undefined."""
    f = sys.map_f
    if isinstance(f, ShiftMap):
        m = n + f.d
    elif isinstance(f, AffineMap):
        m = f.a * n + f.b
    else:
        m = f.entry_map.get(n)
        if m is None:
            return None
    return m if sys.in_domain(m) else None


def map_preimage(sys: DiscreteSystem, m: int) -> tuple[int, ...]:
    """f^{-1}({m}) in the conceptual domain (window-wide for table maps)."""
    f = sys.map_f
    if isinstance(f, ShiftMap):
        q = m - f.d
        return (q,) if sys.in_domain(q) else ()
    if isinstance(f, AffineMap):
        q, r = divmod(m - f.b, f.a)
        return (q,) if r == 0 and sys.in_domain(q) else ()
    return tuple(sorted(k for k, v in f.entries if v == m))


def apply_composition(sys: DiscreteSystem, x: SparseVector) -> tuple[SparseVector, bool]:
    """(phi o f) * w on the window; returns (result, boundary_leak).

    ``boundary_leak`` is True when some entry of x sits at a point whose
    conceptual preimage exists but falls outside the window, so mass that the
    infinite system would have propagated was dropped.
    """
    out = {}
    for n in sys.window_range():
        m = map_apply(sys, n)
        if m is None:
            continue
        v = x.value_at(m)
        if scalar_is_zero(v):
            continue
        w = sys.weight(n)
        if w == 0:
            continue
        out[n] = scalar_mul(v, w)
    leak = False
    covered = set()
    for n in sys.window_range():
        m = map_apply(sys, n)
        if m is not None:
            covered.add(m)
    for j, _ in x.entries:
        if j in covered:
            continue
        if isinstance(sys.map_f, TableMap):
            leak = True
            break
        if map_preimage(sys, j):
            leak = True
            break
    return SparseVector.of(out, x.domain), leak


def cocycle(op, x: int, n: int) -> LogMag:
    """|w(f^{n-1} x) ... w(f x) w(x)| along the forward orbit of x.

    For a shift operator the orbit of x is x, x+1, ..., x+n-1.  Raises
    BoundaryEscape when a discrete system's orbit leaves its window.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if isinstance(op, ShiftOperator):
        if not op.weights.index_in_domain(x):
            raise SpecError(f"index {x} outside domain")
        total = 0.0
        for t in range(n):
            w = eval_weight(op.weights, x + t)
            if w == 0:
                return LOGMAG_ZERO
            total += log_abs_fraction(w)
        return LogMag(total)
    sys: DiscreteSystem = op
    cur = x
    total = 0.0
    for _ in range(n):
        if not sys.in_window(cur):
            raise BoundaryEscape(f"orbit left the window at {cur}")
        w = sys.weight(cur)
        if w == 0:
            return LOGMAG_ZERO
        total += log_abs_fraction(w)
        nxt = map_apply(sys, cur)
        if nxt is None:
            raise BoundaryEscape(f"map undefined at {cur}")
        cur = nxt
    return LogMag(total)


def cocycle_exact(sys: DiscreteSystem, x: int, n: int) -> Fraction:
    """|w^{(n)}(x)| as an exact rational."""
    cur = x
    prod = Fraction(1)
    for _ in range(n):
        if not sys.in_window(cur):
            raise BoundaryEscape(f"orbit left the window at {cur}")
        prod *= abs(sys.weight(cur))
        nxt = map_apply(sys, cur)
        if nxt is None:
            raise BoundaryEscape(f"map undefined at {cur}")
        cur = nxt
    return prod


class IndexSet(frozenset):
    """Finite index set with a window-truncation marker."""

    truncated: bool = False

    def __new__(cls, items, truncated: bool = False):
        self = super().__new__(cls, items)
        self.truncated = truncated
        return self


def preimage_n(sys: DiscreteSystem, B, n: int) -> IndexSet:
    """{x in window : f^n(x) in B}, by n-fold inverse images.

    ``truncated`` marks preimage points that fell outside the window and were
    dropped (the set itself stays sound as a subset).
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    cur = set(int(b) for b in B)
    truncated = False
    for _ in range(n):
        nxt = set()
        for m in cur:
            for q in map_preimage(sys, m):
                if sys.in_window(q):
                    nxt.add(q)
                else:
                    truncated = True
        cur = nxt
    return IndexSet(cur, truncated=truncated)


def mu_n(sys: DiscreteSystem, A, n: int) -> float:
    """Measure with density |w^(n)|^p against the atomic masses, on A.

    Accumulates through logs so horizon-scale products cannot overflow.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    total = 0.0
    for x in sorted(set(int(a) for a in A)):
        c = cocycle(sys, x, n)
        if c.is_zero:
            continue
        lg = sys.p * c.log_abs + log_abs_fraction(sys.mass(x))
        total += math.inf if lg > 709 else math.exp(lg)
    return total


def mu_n_exact(sys: DiscreteSystem, A, n: int) -> Fraction:
    """Exact value of mu_n on A; requires integer p."""
    if not float(sys.p).is_integer():
        raise ValueError("exact evaluation needs integer p")
    ip = int(sys.p)
    total = Fraction(0)
    for x in sorted(set(int(a) for a in A)):
        total += cocycle_exact(sys, x, n) ** ip * sys.mass(x)
    return total


def mu_measure(sys: DiscreteSystem, A) -> Fraction:
    return sum((sys.mass(int(x)) for x in set(A)), Fraction(0))


def image_n(sys: DiscreteSystem, A, n: int) -> IndexSet:
    """f^n(A) with a marker when the forward orbit leaves the window."""
    cur = set(int(a) for a in A)
    truncated = False
    for _ in range(n):
        nxt = set()
        for x in cur:
            m = map_apply(sys, x)
            if m is None:
                truncated = True
            else:
                nxt.add(m)
        cur = nxt
    return IndexSet(cur, truncated=truncated)


def shift_system(
    w: WeightSpec,
    window: tuple[int, int],
    p: float = 2,
    d: int = 1,
    masses=None,
) -> DiscreteSystem:
    """The shift f(n) = n + d as a discrete system over a window."""
    return DiscreteSystem(
        window=window,
        map_f=ShiftMap(d),
        weights=w,
        p=p,
        masses=masses,
        domain=w.domain,
    )


# ---------------------------------------------------------------------------
# well-definedness

@dataclass(frozen=True)
class WellDefinednessReport:
    condition: str                      # "c0-proper" | "lp-bounded" | "kothe-pairing"
    status: str                         # "verified" | "failed" | "undetermined-at-caps"
    bound: Optional[Fraction] = None    # c for lp; None otherwise
    k_to_m: Optional[tuple] = None      # Koethe case: ((k, m), ...)
    witness: Optional[tuple] = None     # concrete violation, replayable
    notes: tuple = ()

    @property
    def verified(self) -> bool:
        return self.status == "verified"


def _windowed_weight_sup(w: WeightSpec, window: tuple[int, int]) -> tuple[float, bool]:
    """(max |w_j| over window, growing trend flag)."""
    lo, hi = window
    if w.domain is IndexDomain.UNILATERAL:
        lo = max(lo, 1)
    idx = np.arange(lo, hi + 1, dtype=np.int64)
    logs = log_abs_array(w, idx)
    top = float(np.max(logs))
    third = max(1, idx.size // 3)
    growing = bool(np.max(logs[-third:]) > np.max(logs[:-third]) + 0.05) if idx.size > 3 else False
    return math.exp(min(top, 709)), growing


def _lp_composition_constant(sys: DiscreteSystem) -> Optional[Fraction]:
    """Smallest windowed c with integral of |w|^p over A <= c * mu(f(A)).

    Exact over the window for integer p; None when p is not an integer or the
    map leaves the window everywhere.
    """
    if not float(sys.p).is_integer():
        return None
    ip = int(sys.p)
    by_target: dict[int, Fraction] = {}
    for x in sys.window_range():
        m = map_apply(sys, x)
        if m is None:
            continue
        contrib = abs(sys.weight(x)) ** ip * sys.mass(x)
        by_target[m] = by_target.get(m, Fraction(0)) + contrib
    if not by_target:
        return None
    best = Fraction(0)
    for m, tot in by_target.items():
        best = max(best, tot / sys.mass(m))
    return best


def check_well_defined(op, space: SpaceSpec, caps: Optional[dict] = None) -> WellDefinednessReport:
    """Decide (inside caps) whether the operator acts boundedly on the space.

    Shift on c0/lp: bounded weights.  Discrete system on lp: the windowed
    constant c in the per-set mass inequality.  Koethe space: for each
    k <= k_max find m <= m_max with the column ratio bounded and non-growing
    on the window; verdicts beyond the window stay honest via
    "undetermined-at-caps".
    """
    caps = dict(caps or {})
    k_max = caps.get("k_max", 6)
    m_max = caps.get("m_max", 8)
    window = caps.get("window")

    if isinstance(space, KotheSpace):
        if not isinstance(op, ShiftOperator):
            return WellDefinednessReport("kothe-pairing", "undetermined-at-caps",
                                         notes=("only shifts supported on matrix spaces",))
        w = op.weights
        window = window or ((1, 4096) if w.domain is IndexDomain.UNILATERAL else (-4096, 4096))
        lo, hi = window
        if w.domain is IndexDomain.UNILATERAL:
            lo = max(lo, 1)
        idx = np.arange(lo, hi + 1, dtype=np.int64)
        wlog = log_abs_array(w, idx)
        k_to_m = []
        for k in range(1, k_max + 1):
            num = kothe_log_column(space.matrix, k, idx)
            hit = None
            for m in range(k, m_max + 1):
                den = kothe_log_column(space.matrix, m, idx + 1)
                # zero pairing: a_{j,k} must vanish wherever a_{j+1,m} does
                bad = np.isneginf(den) & ~np.isneginf(num)
                if np.any(bad):
                    j_bad = int(idx[np.argmax(bad)])
                    return WellDefinednessReport(
                        "kothe-pairing", "failed",
                        witness=(("j", j_bad), ("k", k), ("m", m)))
                ratio = num + wlog - den
                third = max(1, idx.size // 3)
                growing = np.max(ratio[-third:]) > np.max(ratio[:-third]) + 0.05
                if not growing and np.max(ratio) < 700:
                    hit = m
                    break
            if hit is None:
                return WellDefinednessReport("kothe-pairing", "undetermined-at-caps",
                                             k_to_m=tuple(k_to_m),
                                             notes=(f"no m <= {m_max} with bounded trend for k={k}",))
            k_to_m.append((k, hit))
        return WellDefinednessReport("kothe-pairing", "verified", k_to_m=tuple(k_to_m))

    if isinstance(op, ShiftOperator):
        w = op.weights
        wb = symbolic_weight_bound(w)
        if isinstance(wb, Finite):
            if isinstance(space, WeightedLpSpace):
                window = window or (-4096, 4096)
                idx = np.arange(window[0], window[1] + 1, dtype=np.int64)
                nlog = log_abs_array(space.nu, idx)
                step = nlog[:-1] - nlog[1:]   # ln(nu_j / nu_{j+1})
                if np.max(step) > 100:
                    return WellDefinednessReport("lp-bounded", "undetermined-at-caps",
                                                 notes=("measure ratio spikes on window",))
                return WellDefinednessReport("lp-bounded", "verified", bound=wb.bound,
                                             notes=("windowed measure-ratio check",))
            return WellDefinednessReport(
                "c0-proper" if isinstance(space, C0Space) else "lp-bounded",
                "verified", bound=wb.bound)
        if isinstance(wb, Infinite):
            return WellDefinednessReport("lp-bounded", "failed",
                                         witness=(("reason", "weights unbounded"),))
        window = window or ((1, 1 << 16) if w.domain is IndexDomain.UNILATERAL else (-(1 << 15), 1 << 15))
        sup, growing = _windowed_weight_sup(w, window)
        if growing:
            return WellDefinednessReport("lp-bounded", "undetermined-at-caps",
                                         notes=("windowed weight sup still growing",))
        return WellDefinednessReport("lp-bounded", "verified",
                                     bound=Fraction(sup).limit_denominator(10 ** 9),
                                     notes=("windowed bound only",))

    sys: DiscreteSystem = op
    if isinstance(space, C0Space):
        sup, growing = _windowed_weight_sup(sys.weights, sys.window)
        status = "undetermined-at-caps" if growing else "verified"
        notes = ("finite window: preimage properness holds trivially",)
        return WellDefinednessReport("c0-proper", status, bound=Fraction(sup).limit_denominator(10 ** 9), notes=notes)
    c = _lp_composition_constant(sys)
    if c is None:
        return WellDefinednessReport("lp-bounded", "undetermined-at-caps",
                                     notes=("no windowed constant computable",))
    if isinstance(sys.map_f, TableMap):
        notes = ("window-exact constant; table map unknown beyond window",)
        return WellDefinednessReport("lp-bounded", "verified", bound=c, notes=notes)
    wb = symbolic_weight_bound(sys.weights)
    if isinstance(wb, Finite) and sys.masses is None:
        ip = int(sys.p) if float(sys.p).is_integer() else None
        if ip is not None:
            c = max(c, wb.bound ** ip)
        return WellDefinednessReport("lp-bounded", "verified", bound=c)
    return WellDefinednessReport("lp-bounded", "verified", bound=c,
                                 notes=("window-exact constant",))
