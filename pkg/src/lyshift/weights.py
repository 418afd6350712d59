"""Weight sequences over N or Z.

A ``WeightSpec`` describes a weight sequence symbolically (constant, periodic,
a restricted rational expression, a named block generator, or a finite table
with tail rules).  On top of evaluation it provides absolute partial products,
backward products, a deterministic growth-level scan, and a small catalog of
sound symbolic sup / floor bounds used for refutations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .scalars import (
    LOGMAG_ONE,
    LOGMAG_ZERO,
    LogMag,
    log_abs_fraction,
)

LN2 = math.log(2.0)

# Exact replay of a scanned pair is skipped above this estimated bit size.
_EXACT_BIT_GUARD = 2_000_000


class IndexDomain(Enum):
    UNILATERAL = "unilateral"   # N = {1, 2, 3, ...}
    BILATERAL = "bilateral"     # Z


# ---------------------------------------------------------------------------
# weight forms

@dataclass(frozen=True)
class Constant:
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))


@dataclass(frozen=True)
class Periodic:
    """w_j = values[(j - offset) mod len(values)]."""

    values: tuple
    offset: int = 0

    def __post_init__(self):
        if not self.values:
            raise ValueError("period must be nonempty")
        object.__setattr__(self, "values", tuple(Fraction(v) for v in self.values))


@dataclass(frozen=True)
class RationalExpr:
    """w_j = coeff * (|j|+1)**pow_exp * geo**j / |j|**inv_exp.

    The inverse part requires |j| >= 1; standalone bilateral specs with
    inv_exp > 0 are rejected (use it as a table or generator tail).
    """

    coeff: Fraction = Fraction(1)
    pow_exp: int = 0
    geo: Fraction = Fraction(1)
    inv_exp: int = 0

    def __post_init__(self):
        object.__setattr__(self, "coeff", Fraction(self.coeff))
        object.__setattr__(self, "geo", Fraction(self.geo))
        if self.geo == 0:
            raise ValueError("geometric base must be nonzero")
        if self.inv_exp < 0:
            raise ValueError("inv_exp must be >= 0")


@dataclass(frozen=True)
class BlockGenerator:
    """Concatenated blocks starting at ``start``; a rule for j < start.

    Builtins:
      * ``geometric_tent(b)``: blocks (1, b, ..., b**n, ..., b**2, b), n >= 1.
        Block n occupies [start + n(n-1), start + n(n+1) - 1]; the peak b**n
        sits at block offset n.
      * ``half_double_runs(r)``: blocks of n copies of 1/r then n copies of r,
        same block geometry.
    """

    generator: str
    param: Fraction
    start: int = 0
    negative: Optional["Form"] = None

    def __post_init__(self):
        if self.generator not in ("geometric_tent", "half_double_runs"):
            raise ValueError(f"unknown generator {self.generator!r}")
        object.__setattr__(self, "param", Fraction(self.param))
        if self.param <= 0:
            raise ValueError("generator parameter must be positive")


def _freeze_entries(entries) -> tuple:
    return tuple(sorted((int(j), Fraction(v)) for j, v in dict(entries).items()))


@dataclass(frozen=True)
class Table:
    """Finite index -> value overrides plus tail rules.

    Indices >= 0 missing from the table use ``tail_pos``, indices < 0 use
    ``tail_neg`` (unilateral specs only ever consult ``tail_pos``).
    """

    entries: tuple
    tail_pos: Optional["Form"] = None
    tail_neg: Optional["Form"] = None

    def __post_init__(self):
        object.__setattr__(self, "entries", _freeze_entries(self.entries))

    @property
    def entry_map(self) -> dict:
        return dict(self.entries)


Form = Union[Constant, Periodic, RationalExpr, BlockGenerator, Table]


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class WeightSpec:
    domain: IndexDomain
    form: Form
    all_nonzero: bool = True

    def __post_init__(self):
        if isinstance(self.form, RationalExpr) and self.form.inv_exp > 0:
            if self.domain is IndexDomain.BILATERAL:
                raise SpecError("1/|j| form is undefined at 0; wrap it in a table or generator tail")

    def index_in_domain(self, j: int) -> bool:
        if self.domain is IndexDomain.UNILATERAL:
            return j >= 1
        return True


# ---------------------------------------------------------------------------
# evaluation

def _block_decompose(q: int) -> tuple[int, int]:
    """(block number n, offset t) for position q >= 0 in block geometry."""
    m = math.isqrt(q)
    n = m + 1 if q >= m * m + m else m
    if n == 0:
        n = 1
    return n, q - n * (n - 1)


def _eval_form(form: Form, j: int) -> Fraction:
    if isinstance(form, Constant):
        return form.value
    if isinstance(form, Periodic):
        return form.values[(j - form.offset) % len(form.values)]
    if isinstance(form, RationalExpr):
        v = form.coeff * Fraction(abs(j) + 1) ** form.pow_exp
        if form.geo != 1:
            v *= form.geo ** j
        if form.inv_exp:
            if j == 0:
                raise SpecError("1/|j| form evaluated at 0")
            v /= Fraction(abs(j)) ** form.inv_exp
        return v
    if isinstance(form, BlockGenerator):
        if j < form.start:
            if form.negative is None:
                raise SpecError(f"index {j} below generator start with no negative rule")
            return _eval_form(form.negative, j)
        n, t = _block_decompose(j - form.start)
        b = form.param
        if form.generator == "geometric_tent":
            e = t if t <= n else 2 * n - t
            return b ** e
        return (1 / b) if t < n else b
    if isinstance(form, Table):
        m = form.entry_map
        if j in m:
            return m[j]
        tail = form.tail_pos if j >= 0 else form.tail_neg
        if tail is None:
            raise SpecError(f"index {j} not covered by table or tail rule")
        return _eval_form(tail, j)
    raise TypeError(f"unknown form {form!r}")


def eval_weight(spec: WeightSpec, j: int) -> Fraction:
    """Exact value w_j; raises SpecError outside the index domain."""
    if not spec.index_in_domain(j):
        raise SpecError(f"index {j} outside {spec.domain.value} domain")
    v = _eval_form(spec.form, j)
    if spec.all_nonzero and v == 0:
        raise SpecError(f"spec declared nonzero but w_{j} = 0")
    return v


# ---------------------------------------------------------------------------
# vectorized log magnitudes

def _log_frac(v: Fraction) -> float:
    return log_abs_fraction(v)


def _block_numbers(q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    m = np.floor(np.sqrt(q.astype(np.float64))).astype(np.int64)
    # fix float sqrt at perfect-square boundaries
    m = np.where((m + 1) * (m + 1) <= q, m + 1, m)
    m = np.where(m * m > q, m - 1, m)
    n = np.where(q >= m * m + m, m + 1, m)
    n = np.maximum(n, 1)
    return n, q - n * (n - 1)


def log_abs_array(spec_or_form, idx: np.ndarray) -> np.ndarray:
    """ln|w_j| over an index array (-inf encodes zeros)."""
    form = spec_or_form.form if isinstance(spec_or_form, WeightSpec) else spec_or_form
    out = np.empty(idx.shape, dtype=np.float64)
    if isinstance(form, Constant):
        out.fill(_log_frac(form.value))
        return out
    if isinstance(form, Periodic):
        logs = np.array([_log_frac(v) for v in form.values])
        return logs[np.mod(idx - form.offset, len(form.values))]
    if isinstance(form, RationalExpr):
        a = np.abs(idx).astype(np.float64)
        out = np.full(idx.shape, _log_frac(form.coeff))
        if form.pow_exp:
            out += form.pow_exp * np.log(a + 1.0)
        if form.geo != 1:
            out += idx.astype(np.float64) * _log_frac(form.geo)
        if form.inv_exp:
            if np.any(idx == 0):
                raise SpecError("1/|j| form evaluated at 0")
            out -= form.inv_exp * np.log(a)
        return out
    if isinstance(form, BlockGenerator):
        neg = idx < form.start
        if np.any(neg):
            if form.negative is None:
                raise SpecError("index below generator start with no negative rule")
            out[neg] = log_abs_array(form.negative, idx[neg])
        pos = ~neg
        if np.any(pos):
            q = (idx[pos] - form.start).astype(np.int64)
            n, t = _block_numbers(q)
            lb = _log_frac(form.param)
            if form.generator == "geometric_tent":
                e = np.where(t <= n, t, 2 * n - t)
                out[pos] = e.astype(np.float64) * lb
            else:
                out[pos] = np.where(t < n, -lb, lb)
        return out
    if isinstance(form, Table):
        m = form.entry_map
        neg = idx < 0
        if np.any(neg):
            if form.tail_neg is not None:
                out[neg] = log_abs_array(form.tail_neg, idx[neg])
            elif not all(int(j) in m for j in idx[neg]):
                raise SpecError("negative index not covered by table")
        pos = ~neg
        if np.any(pos):
            if form.tail_pos is not None:
                out[pos] = log_abs_array(form.tail_pos, idx[pos])
            elif not all(int(j) in m for j in idx[pos]):
                raise SpecError("index not covered by table")
        if m:
            lo, hi = int(idx.min()), int(idx.max())
            for j, v in m.items():
                if lo <= j <= hi:
                    out[idx == j] = _log_frac(v)
        return out
    raise TypeError(f"unknown form {form!r}")


# ---------------------------------------------------------------------------
# products

def exact_abs_product(spec_or_form, i: int, j: int) -> Fraction:
    """|w_i ... w_j| as an exact rational (i <= j)."""
    form = spec_or_form.form if isinstance(spec_or_form, WeightSpec) else spec_or_form
    if i > j:
        raise SpecError("empty product range")
    prod = Fraction(1)
    for t in range(i, j + 1):
        prod *= abs(_eval_form(form, t))
        if prod == 0:
            return Fraction(0)
    return prod


def abs_product(spec: WeightSpec, i: int, j: int) -> LogMag:
    """|w_i ... w_j| in log magnitude; zero weights are absorbing."""
    if i > j:
        raise SpecError("invalid range: i must be <= j")
    if not (spec.index_in_domain(i) and spec.index_in_domain(j)):
        raise SpecError(f"range [{i}, {j}] leaves the {spec.domain.value} domain")
    logs = log_abs_array(spec, np.arange(i, j + 1, dtype=np.int64))
    if np.any(np.isneginf(logs)):
        return LOGMAG_ZERO
    return LogMag(math.fsum(logs.tolist()))


def backward_product(spec: WeightSpec, n: int, k: int = 1) -> LogMag:
    """|w_{-n} ... w_{-k}| for a bilateral spec (range [-n, -k], n >= k)."""
    if spec.domain is not IndexDomain.BILATERAL:
        raise SpecError("backward products require a bilateral domain")
    if n < k:
        raise SpecError("empty range: need n >= k")
    return abs_product(spec, -n, -k)


def backward_log_series(spec: WeightSpec, k: int, n_max: int) -> np.ndarray:
    """ln|w_{-n} ... w_{-k}| for n = k + m at result index m (m >= 0)."""
    if n_max < k:
        return np.empty(0)
    logs = log_abs_array(spec, np.arange(-n_max, -k + 1, dtype=np.int64))[::-1]
    return np.cumsum(logs)


# ---------------------------------------------------------------------------
# scan for growth levels

class Trend(Enum):
    GROWING = "growing"
    BOUNDED = "bounded"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class LevelRecord:
    level: int
    i: int
    j: int
    product: LogMag      # ratio-adjusted magnitude, strictly > 2**level


@dataclass(frozen=True)
class ScanResult:
    levels: tuple[LevelRecord, ...]
    exhausted_horizon: int
    trend: Trend

    def found(self, s: int) -> Optional[LevelRecord]:
        for rec in self.levels:
            if rec.level == s:
                return rec
        return None


@dataclass(frozen=True)
class SupRatio:
    """Adjusts scanned products to num(i) * |w_i...w_j| / den(j+1).

    ``den_*`` callbacks receive j+1 directly.  The identity ratio reduces the
    scan to plain partial products.
    """

    num_exact: Callable[[int], Fraction]
    den_exact: Callable[[int], Fraction]
    num_log: Callable[[np.ndarray], np.ndarray]
    den_log: Callable[[np.ndarray], np.ndarray]


def identity_ratio() -> SupRatio:
    one = Fraction(1)
    return SupRatio(
        num_exact=lambda i: one,
        den_exact=lambda j1: one,
        num_log=lambda idx: np.zeros(idx.shape),
        den_log=lambda idx: np.zeros(idx.shape),
    )


def _trailing_max(a: np.ndarray, width: int) -> np.ndarray:
    """out[t] = max(a[max(0, t - width + 1) .. t])."""
    n = a.size
    if n == 0 or width >= n:
        return np.maximum.accumulate(a)
    pad = (-n) % width
    b = np.concatenate([a, np.full(pad, -np.inf)])
    blocks = b.reshape(-1, width)
    left = np.maximum.accumulate(blocks, axis=1).ravel()[:n]
    right = np.maximum.accumulate(blocks[:, ::-1], axis=1)[:, ::-1].ravel()
    out = left.copy()
    t = np.arange(n)
    s = t - width + 1
    ok = s >= 1
    out[ok] = np.maximum(right[s[ok]], left[t[ok]])
    return out


def _entry_bits(form: Form, j: int) -> int:
    try:
        v = _eval_form(form, j)
    except SpecError:
        return _EXACT_BIT_GUARD + 1
    return v.numerator.bit_length() + v.denominator.bit_length()


def _estimate_bits(spec: WeightSpec, i: int, j: int) -> int:
    ends = max(_entry_bits(spec.form, i), _entry_bits(spec.form, j))
    return max(ends, 1) * (j - i + 1)


def exact_level_check(spec: WeightSpec, ratio: SupRatio, i: int, j: int, s: int) -> Optional[bool]:
    """Exact strict test num(i)*|w_i...w_j| > 2**s * den(j+1).

    Returns None when the exact product would be too large to replay.
    """
    if _estimate_bits(spec, i, j) > _EXACT_BIT_GUARD:
        return None
    lhs = abs(ratio.num_exact(i)) * exact_abs_product(spec, i, j)
    rhs = Fraction(2) ** s * abs(ratio.den_exact(j + 1))
    return lhs > rhs


def _scan_segments(idx: np.ndarray, logs: np.ndarray):
    """Maximal zero-free runs as (start_offset, end_offset) pairs."""
    finite = ~np.isneginf(logs)
    segs = []
    t = 0
    n = idx.size
    while t < n:
        if not finite[t]:
            t += 1
            continue
        start = t
        while t < n and finite[t]:
            t += 1
        segs.append((start, t - 1))
    return segs


def scan_sup(
    spec: WeightSpec,
    window: tuple[int, int],
    levels: int,
    ratio: Optional[SupRatio] = None,
    back_width: int = 4096,
) -> ScanResult:
    """Find, for each s <= levels, the first pair (i, j) in scan order with
    num(i) * |w_i ... w_j| / den(j+1) > 2**s.

    Scan order is increasing j, then decreasing i within ``back_width`` of j.
    Every recorded level is re-verified with exact rational arithmetic, so a
    recorded pair replays strictly.  The scan never claims boundedness: a full
    set of levels gives trend GROWING, anything else UNDETERMINED.
    """
    if levels < 1:
        raise ValueError("levels must be >= 1")
    lo, hi = window
    if spec.domain is IndexDomain.UNILATERAL and lo < 1:
        lo = 1
    if lo > hi:
        raise ValueError("empty window")
    if ratio is None:
        ratio = identity_ratio()

    idx = np.arange(lo, hi + 1, dtype=np.int64)
    logs = log_abs_array(spec, idx)
    num = ratio.num_log(idx)
    den = ratio.den_log(idx + 1)

    found: list[LevelRecord] = []
    s = 1
    for a, b in _scan_segments(idx, logs):
        if s > levels:
            break
        seg_logs = logs[a:b + 1]
        cp = np.cumsum(seg_logs)
        p_excl = cp - seg_logs
        q = num[a:b + 1] - p_excl
        base = cp - den[a:b + 1]
        m = _trailing_max(q, back_width)
        best = m + base
        jpos = 0
        nseg = b - a + 1
        while s <= levels and jpos < nseg:
            thr = s * LN2
            rel = np.nonzero(best[jpos:] > thr)[0]
            if rel.size == 0:
                break
            jpos += int(rel[0])
            j_abs = int(idx[a + jpos])
            i_lo = max(int(idx[a]), j_abs - back_width + 1)
            hit = None
            for i_abs in range(j_abs, i_lo - 1, -1):
                ipos = i_abs - int(idx[a])
                if q[ipos] + base[jpos] <= thr:
                    continue
                ok = exact_level_check(spec, ratio, i_abs, j_abs, s)
                if ok is None:
                    # replay too large: demand a float margin instead
                    if q[ipos] + base[jpos] > thr + 1e-6:
                        hit = (i_abs, False)
                        break
                    continue
                if ok:
                    hit = (i_abs, True)
                    break
            if hit is None:
                jpos += 1
                continue
            i_abs, exact = hit
            if exact:
                value = abs(ratio.num_exact(i_abs)) * exact_abs_product(spec, i_abs, j_abs)
                value /= abs(ratio.den_exact(j_abs + 1))
                prod = LogMag(log_abs_fraction(value))
            else:
                ipos = i_abs - int(idx[a])
                prod = LogMag(float(q[ipos] + base[jpos]))
            found.append(LevelRecord(level=s, i=i_abs, j=j_abs, product=prod))
            s += 1
            # the same pair may already clear the next threshold; stay put
    trend = Trend.GROWING if s > levels else Trend.UNDETERMINED
    return ScanResult(levels=tuple(found), exhausted_horizon=hi, trend=trend)


def find_pair_exceeding(
    spec: WeightSpec,
    window: tuple[int, int],
    threshold_log: float,
    exact_threshold: Optional[Fraction] = None,
    ratio: Optional[SupRatio] = None,
    back_width: int = 4096,
    exclude_j: frozenset = frozenset(),
    min_len: int = 1,
) -> Optional[tuple[int, int]]:
    """First (i, j) in scan order with adjusted product above a threshold.

    ``exclude_j`` skips columns already used; ``min_len`` forces
    j - i + 1 >= min_len.  When ``exact_threshold`` is given the strict
    inequality is re-verified rationally before a pair is accepted.
    """
    lo, hi = window
    if spec.domain is IndexDomain.UNILATERAL and lo < 1:
        lo = 1
    if ratio is None:
        ratio = identity_ratio()
    idx = np.arange(lo, hi + 1, dtype=np.int64)
    logs = log_abs_array(spec, idx)
    num = ratio.num_log(idx)
    den = ratio.den_log(idx + 1)
    for a, b in _scan_segments(idx, logs):
        seg_logs = logs[a:b + 1]
        cp = np.cumsum(seg_logs)
        p_excl = cp - seg_logs
        q = num[a:b + 1] - p_excl
        base = cp - den[a:b + 1]
        m = _trailing_max(q, back_width)
        cand = np.nonzero(m + base > threshold_log)[0]
        for jpos in cand:
            jpos = int(jpos)
            j_abs = int(idx[a + jpos])
            if j_abs in exclude_j:
                continue
            i_hi = min(j_abs - min_len + 1, j_abs)
            i_lo = max(int(idx[a]), j_abs - back_width + 1)
            for i_abs in range(i_hi, i_lo - 1, -1):
                ipos = i_abs - int(idx[a])
                if q[ipos] + base[jpos] <= threshold_log:
                    continue
                if exact_threshold is not None:
                    if _estimate_bits(spec, i_abs, j_abs) <= _EXACT_BIT_GUARD:
                        lhs = abs(ratio.num_exact(i_abs)) * exact_abs_product(spec, i_abs, j_abs)
                        if lhs <= exact_threshold * abs(ratio.den_exact(j_abs + 1)):
                            continue
                return (i_abs, j_abs)
    return None


# ---------------------------------------------------------------------------
# symbolic bounds (catalog prover)

class RangeKind(Enum):
    FORWARD_ALL = "all"           # products over any i <= j in the domain
    FORWARD_NONNEG = "nonneg"     # 0 <= i <= j
    FORWARD_NEG_ONLY = "neg"      # i <= j <= -1


@dataclass(frozen=True)
class Finite:
    bound: Fraction


class Infinite:
    def __repr__(self):
        return "Infinite()"

    def __eq__(self, other):
        return isinstance(other, Infinite)

    def __hash__(self):
        return hash("Infinite")


class Unknown:
    def __repr__(self):
        return "Unknown()"

    def __eq__(self, other):
        return isinstance(other, Unknown)

    def __hash__(self):
        return hash("Unknown")


SupBound = Union[Finite, Infinite, Unknown]

INFINITE = Infinite()
UNKNOWN = Unknown()

_MAX_ENUM_SPAN = 1 << 16


def _contiguous_extrema(values: Sequence[Fraction]) -> tuple[Fraction, Fraction]:
    """(max, min) of |product| over all nonempty contiguous runs, O(n)."""
    best_hi: Optional[Fraction] = None
    best_lo: Optional[Fraction] = None
    has_zero = False

    def feed_segment(seg):
        nonlocal best_hi, best_lo
        pref = Fraction(1)
        min_pref = Fraction(1)
        max_pref = Fraction(1)
        for v in seg:
            pref *= abs(v)
            hi_c = pref / min_pref
            lo_c = pref / max_pref
            best_hi = hi_c if best_hi is None else max(best_hi, hi_c)
            best_lo = lo_c if best_lo is None else min(best_lo, lo_c)
            min_pref = min(min_pref, pref)
            max_pref = max(max_pref, pref)

    seg: list[Fraction] = []
    for v in values:
        if v == 0:
            has_zero = True
            if seg:
                feed_segment(seg)
                seg = []
        else:
            seg.append(v)
    if seg:
        feed_segment(seg)
    if has_zero:
        best_lo = Fraction(0)
        if best_hi is None:
            best_hi = Fraction(0)
    if best_hi is None:
        raise ValueError("no values")
    return best_hi, best_lo


def _enum_form_extrema(form: Form, lo: int, hi: int) -> tuple[Fraction, Fraction]:
    if hi - lo + 1 > _MAX_ENUM_SPAN:
        raise SpecError("enumeration span too large")
    return _contiguous_extrema([_eval_form(form, j) for j in range(lo, hi + 1)])


def _tail_single_le_one(c: Fraction, a: int, b: int, g: Fraction, start: int) -> bool:
    """Prove c*(m+1)**a * g**m / m**b <= 1 for all m > start (exact)."""
    c, g = abs(c), abs(g)
    if c == 0:
        return True
    m0 = start + 1

    def h(m: int) -> Fraction:
        return c * Fraction(m + 1) ** a * g ** m / Fraction(m) ** b

    if g > 1:
        return False
    if g == 1:
        return a <= b and h(m0) <= 1    # then h is nonincreasing on m >= 1
    ratio_cap = g * (Fraction(m0 + 1) / m0) ** max(a, 0)
    return ratio_cap <= 1 and h(m0) <= 1


def _re_infinite_side(form: RationalExpr, side: int) -> bool:
    """True if |w_j| -> infinity provably as j -> side * infinity."""
    if form.coeff == 0:
        return False
    g = abs(form.geo)
    if side > 0:
        return g > 1 or (g == 1 and form.pow_exp > form.inv_exp)
    return g < 1 or (g == 1 and form.pow_exp > form.inv_exp)


def _probe_range(lo, hi, probe: int) -> tuple[int, int]:
    """Finite enumeration range standing in for a possibly infinite [lo, hi]."""
    left_inf = lo == -math.inf
    right_inf = hi == math.inf
    if left_inf and right_inf:
        return -probe, probe
    if right_inf:
        plo = int(lo)
        return plo, max(probe, plo + 16)
    if left_inf:
        phi = int(hi)
        return min(-probe, phi - 16), phi
    return int(lo), int(hi)


def _re_region_bounds(form: RationalExpr, lo, hi, probe: int) -> SupBound:
    left_inf = lo == -math.inf
    right_inf = hi == math.inf
    if right_inf and _re_infinite_side(form, +1):
        return INFINITE
    if left_inf and _re_infinite_side(form, -1):
        return INFINITE
    plo, phi = _probe_range(lo, hi, probe)
    if form.inv_exp and plo <= 0 <= phi:
        raise SpecError("1/|j| form evaluated at 0")
    if right_inf and not _tail_single_le_one(form.coeff, form.pow_exp, form.inv_exp, form.geo, phi):
        return UNKNOWN
    if left_inf and not _tail_single_le_one(form.coeff, form.pow_exp, form.inv_exp, 1 / form.geo, -plo):
        return UNKNOWN
    hi_prod, _ = _enum_form_extrema(form, plo, phi)
    return Finite(max(hi_prod, Fraction(1)))


def _table_regions(form: Table, lo, hi):
    """Split [lo, hi] into (rule, a, b) pieces; rule None marks a gap."""
    pieces = []
    keys = [j for j, _ in form.entries]
    if keys:
        k_lo, k_hi = min(keys), max(keys)
    else:
        k_lo, k_hi = 1, 0   # empty span

    def tail_pieces(a, b):
        # split a key-free range at 0 between the two tail rules
        out = []
        if a < 0:
            out.append((form.tail_neg, a, min(b, -1)))
        if b >= 0:
            out.append((form.tail_pos, max(a, 0), b))
        return [(r, x, y) for (r, x, y) in out if x <= y]

    if keys and lo <= k_hi and hi >= k_lo:
        h_lo, h_hi = max(lo, k_lo), min(hi, k_hi)
        if lo < h_lo:
            pieces += tail_pieces(lo, h_lo - 1)
        pieces.append(("head", h_lo, h_hi))
        if hi > h_hi:
            pieces += tail_pieces(h_hi + 1, hi)
    else:
        pieces += tail_pieces(lo, hi)
    return pieces


def _region_bounds(form: Form, lo, hi, probe: int) -> SupBound:
    """Sup bound for contiguous products of ``form`` inside [lo, hi]."""
    if lo > hi:
        return Finite(Fraction(1))
    if isinstance(form, Constant):
        c = abs(form.value)
        if c <= 1:
            return Finite(Fraction(1))
        if lo == -math.inf or hi == math.inf:
            return INFINITE
        return Finite(c ** (int(hi) - int(lo) + 1))
    if isinstance(form, Periodic):
        per = abs(math.prod(form.values, start=Fraction(1)))
        if lo > -math.inf and hi < math.inf:
            return Finite(max(_enum_form_extrema(form, int(lo), int(hi))[0], Fraction(1)))
        if any(v == 0 for v in form.values):
            hi2, _ = _contiguous_extrema(list(form.values) * 2)
            return Finite(max(hi2, Fraction(1)))
        if per > 1:
            return INFINITE
        hi2, _ = _contiguous_extrema(list(form.values) * 2)
        return Finite(max(hi2, Fraction(1)))
    if isinstance(form, RationalExpr):
        return _re_region_bounds(form, lo, hi, probe)
    if isinstance(form, BlockGenerator):
        parts: list[SupBound] = []
        if lo < form.start:
            if form.negative is None:
                return UNKNOWN
            parts.append(_region_bounds(form.negative, lo, min(hi, form.start - 1), probe))
        if hi >= form.start:
            b = form.param
            if hi == math.inf:
                if form.generator == "geometric_tent":
                    parts.append(Finite(Fraction(1)) if b <= 1 else INFINITE)
                else:
                    parts.append(Finite(Fraction(1)) if b == 1 else INFINITE)
            else:
                try:
                    parts.append(Finite(max(_enum_form_extrema(form, max(int(lo), form.start), int(hi))[0], Fraction(1))))
                except SpecError:
                    return UNKNOWN
        if any(isinstance(p, Infinite) for p in parts):
            return INFINITE
        if any(isinstance(p, Unknown) for p in parts):
            return UNKNOWN
        total = Fraction(1)
        for p in parts:
            total *= max(p.bound, Fraction(1))
        return Finite(total)
    if isinstance(form, Table):
        parts = []
        for rule, a, b in _table_regions(form, lo, hi):
            if rule == "head":
                try:
                    parts.append(Finite(max(_enum_form_extrema(form, a, b)[0], Fraction(1))))
                except SpecError:
                    return UNKNOWN
            elif rule is None:
                return UNKNOWN
            else:
                parts.append(_region_bounds(rule, a, b, probe))
        if any(isinstance(p, Infinite) for p in parts):
            return INFINITE
        if any(isinstance(p, Unknown) for p in parts):
            return UNKNOWN
        total = Fraction(1)
        for p in parts:
            total *= max(p.bound, Fraction(1))
        return Finite(total)
    raise TypeError(f"unknown form {form!r}")


def symbolic_sup_bound(spec: WeightSpec, range_kind: RangeKind, probe: int = 512) -> SupBound:
    """Sound symbolic answer for sup over |w_i ... w_j| in the given range.

    Finite(b) guarantees every product in range is <= b; Infinite guarantees
    unboundedness; everything else is Unknown.
    """
    if spec.domain is IndexDomain.UNILATERAL:
        if range_kind is RangeKind.FORWARD_NEG_ONLY:
            raise SpecError("no negative indices in a unilateral domain")
        lo, hi = 1, math.inf
    else:
        if range_kind is RangeKind.FORWARD_ALL:
            lo, hi = -math.inf, math.inf
        elif range_kind is RangeKind.FORWARD_NONNEG:
            lo, hi = 0, math.inf
        else:
            lo, hi = -math.inf, -1
    try:
        return _region_bounds(spec.form, lo, hi, probe)
    except SpecError:
        return UNKNOWN


def _region_floor(form: Form, lo, hi, probe: int) -> Optional[Fraction]:
    """Positive c with every contiguous product in [lo, hi] >= c, or None."""
    if lo > hi:
        return Fraction(1)
    if isinstance(form, Constant):
        c = abs(form.value)
        if c >= 1:
            return Fraction(1)
        if c == 0:
            return None
        if lo > -math.inf and hi < math.inf:
            return c ** (int(hi) - int(lo) + 1)
        return None
    if isinstance(form, Periodic):
        if any(v == 0 for v in form.values):
            return None
        if lo > -math.inf and hi < math.inf:
            return min(_enum_form_extrema(form, int(lo), int(hi))[1], Fraction(1))
        per = abs(math.prod(form.values, start=Fraction(1)))
        if per < 1:
            return None
        _, lo2 = _contiguous_extrema(list(form.values) * 2)
        return min(lo2, Fraction(1)) ** 2
    if isinstance(form, RationalExpr):
        if form.coeff == 0:
            return None
        if lo > -math.inf and hi < math.inf:
            try:
                _, lo2 = _enum_form_extrema(form, int(lo), int(hi))
            except SpecError:
                return None
            return min(lo2, Fraction(1)) if lo2 > 0 else None
        if form.inv_exp:
            return None
        inv = RationalExpr(coeff=1 / form.coeff, pow_exp=-form.pow_exp, geo=1 / form.geo)
        b = _region_bounds(inv, lo, hi, probe)
        return 1 / b.bound if isinstance(b, Finite) else None
    if isinstance(form, BlockGenerator):
        if form.param == 1 and (form.negative is None or lo >= form.start):
            return Fraction(1)
        return None
    if isinstance(form, Table):
        floor = Fraction(1)
        for rule, a, b in _table_regions(form, lo, hi):
            if rule == "head":
                try:
                    _, lo2 = _enum_form_extrema(form, a, b)
                except SpecError:
                    return None
                if lo2 == 0:
                    return None
                floor *= min(lo2, Fraction(1))
            elif rule is None:
                return None
            else:
                f = _region_floor(rule, a, b, probe)
                if f is None:
                    return None
                floor *= min(f, Fraction(1))
        return floor
    return None


@dataclass(frozen=True)
class PositiveFloor:
    bound: Fraction


class ZeroLimit:
    """Products over ever longer backward ranges provably tend to zero."""

    def __eq__(self, other):
        return isinstance(other, ZeroLimit)

    def __hash__(self):
        return hash("ZeroLimit")


ZERO_LIMIT = ZeroLimit()


def _form_vanishing_leftward(f: Form) -> bool:
    """True if products over [-n, c] provably tend to 0 as n grows."""
    if isinstance(f, Constant):
        return abs(f.value) < 1
    if isinstance(f, Periodic):
        return abs(math.prod(f.values, start=Fraction(1))) < 1
    if isinstance(f, RationalExpr):
        g = abs(f.geo)
        if abs(f.coeff) == 0:
            return True
        if g > 1:
            return True
        if g == 1 and f.pow_exp < f.inv_exp:
            return True
        return False
    return False


def symbolic_backward_floor(spec: WeightSpec, probe: int = 512):
    """Classify products |w_i ... w_j| confined to j <= -1.

    PositiveFloor(c): every such product is >= c > 0 (refutes any backward
    vanishing requirement).  ZERO_LIMIT: products over [-n, -k] provably tend
    to 0 as n grows, for every fixed k >= 1.  Unknown otherwise.
    """
    if spec.domain is not IndexDomain.BILATERAL:
        raise SpecError("backward floor requires a bilateral spec")
    form = spec.form

    if isinstance(form, (Constant, Periodic, RationalExpr)):
        if _form_vanishing_leftward(form):
            return ZERO_LIMIT
        f = _region_floor(form, -math.inf, -1, probe)
        return PositiveFloor(f) if f is not None else UNKNOWN

    if isinstance(form, BlockGenerator):
        if form.start < 0:
            return UNKNOWN
        neg, split = form.negative, min(form.start, 0)
        head_vals: list[Fraction] = []
    elif isinstance(form, Table):
        keys = [j for j, _ in form.entries]
        k_lo = min(keys) if keys else 0
        split = min(k_lo, 0)
        neg = form.tail_neg
        head_vals = [_eval_form(form, j) for j in range(split, 0)] if keys else []
    else:
        return UNKNOWN

    if neg is None:
        return UNKNOWN
    if _form_vanishing_leftward(neg):
        return ZERO_LIMIT
    f = _region_floor(neg, -math.inf, split - 1, probe)
    if f is None:
        return UNKNOWN
    if any(v == 0 for v in head_vals):
        return UNKNOWN
    for v in head_vals:
        f *= min(abs(v), Fraction(1))
    if head_vals:
        _, lo2 = _contiguous_extrema(head_vals)
        f = min(f, lo2)
    return PositiveFloor(f)


def symbolic_weight_bound(spec: WeightSpec, probe: int = 512) -> SupBound:
    """Sound bound on sup_j |w_j| over the whole domain."""

    def single(f: Form, lo, hi) -> SupBound:
        if lo > hi:
            return Finite(Fraction(0))
        if isinstance(f, Constant):
            return Finite(abs(f.value))
        if isinstance(f, Periodic):
            return Finite(max(abs(v) for v in f.values))
        if isinstance(f, RationalExpr):
            if (hi == math.inf and _re_infinite_side(f, +1)) or (lo == -math.inf and _re_infinite_side(f, -1)):
                return INFINITE
            plo, phi = _probe_range(lo, hi, probe)
            if f.inv_exp and plo <= 0 <= phi:
                return UNKNOWN
            ok_hi = hi != math.inf or _tail_single_le_one(f.coeff, f.pow_exp, f.inv_exp, f.geo, phi)
            ok_lo = lo != -math.inf or _tail_single_le_one(f.coeff, f.pow_exp, f.inv_exp, 1 / f.geo, -plo)
            if not (ok_hi and ok_lo):
                return UNKNOWN
            vals = [abs(_eval_form(f, j)) for j in range(plo, phi + 1)]
            return Finite(max(max(vals), Fraction(1)))
        if isinstance(f, BlockGenerator):
            if f.generator == "geometric_tent":
                pos: SupBound = Finite(Fraction(1)) if f.param <= 1 else INFINITE
            else:
                pos = Finite(max(f.param, 1 / f.param))
            if lo < f.start:
                if f.negative is None:
                    return UNKNOWN
                neg = single(f.negative, lo, f.start - 1)
            else:
                neg = Finite(Fraction(0))
            if isinstance(pos, Infinite) or isinstance(neg, Infinite):
                return INFINITE
            if isinstance(pos, Unknown) or isinstance(neg, Unknown):
                return UNKNOWN
            return Finite(max(pos.bound, neg.bound))
        if isinstance(f, Table):
            parts: list[SupBound] = []
            for rule, a, b in _table_regions(f, lo, hi):
                if rule == "head":
                    vals = [abs(_eval_form(f, j)) for j in range(a, b + 1)]
                    parts.append(Finite(max(vals) if vals else Fraction(0)))
                elif rule is None:
                    return UNKNOWN
                else:
                    parts.append(single(rule, a, b))
            if any(isinstance(p, Infinite) for p in parts):
                return INFINITE
            if any(isinstance(p, Unknown) for p in parts):
                return UNKNOWN
            return Finite(max((p.bound for p in parts), default=Fraction(0)))
        return UNKNOWN

    lo = 1 if spec.domain is IndexDomain.UNILATERAL else -math.inf
    try:
        return single(spec.form, lo, math.inf)
    except SpecError:
        return UNKNOWN


# ---------------------------------------------------------------------------
# convenience constructors

def constant_weights(value, domain: IndexDomain = IndexDomain.UNILATERAL) -> WeightSpec:
    v = Fraction(value)
    return WeightSpec(domain, Constant(v), all_nonzero=(v != 0))


def run_block_weights(r=2, negative_value=Fraction(1, 2)) -> WeightSpec:
    """Bilateral spec: 1/r-then-r run blocks on j >= 1, a constant on j <= 0."""
    return WeightSpec(
        IndexDomain.BILATERAL,
        BlockGenerator("half_double_runs", Fraction(r), start=1, negative=Constant(Fraction(negative_value))),
        all_nonzero=True,
    )


def tent_measure_weights(b=2) -> WeightSpec:
    """Bilateral positive sequence: tent blocks on j >= 0, 1/|j| on j <= -1."""
    return WeightSpec(
        IndexDomain.BILATERAL,
        BlockGenerator("geometric_tent", Fraction(b), start=0, negative=RationalExpr(inv_exp=1)),
        all_nonzero=True,
    )
