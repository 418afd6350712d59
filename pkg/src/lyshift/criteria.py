"""Verdict-producing chaos analyzers with replayable certificates.

Every analyzer is a semi-decision: numeric scans can only certify growth and
vanishing inside configured caps, so "not chaotic" is emitted exclusively by
the symbolic catalog prover, and everything else stays undetermined.  A
certified verdict carries index pairs and vanishing tables whose strict
inequalities replay under exact rational arithmetic.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .config import DEFAULT_CONFIG, AnalysisConfig, thread_cap
from .operators import (
    DiscreteSystem,
    ShiftMap,
    ShiftOperator,
    check_well_defined,
    cocycle_exact,
    map_apply,
    map_preimage,
    mu_measure,
    mu_n_exact,
    preimage_n,
)
from .orbitlab import simulate_orbit, unboundedness_evidence
from .scalars import log_abs_fraction
from .spaces import (
    C0Space,
    ConstantMatrix,
    KotheMatrix,
    KotheSpace,
    LpSpace,
    PowerMatrix,
    SpaceSpec,
    SparseVector,
    WeightedLpSpace,
    canonical_norm_log_series,
    kothe_entry,
    kothe_log_column,
    kothe_sup_ratio,
    seminorm,
)
from .weights import (
    BlockGenerator,
    Constant,
    Finite,
    IndexDomain,
    Infinite,
    Periodic,
    PositiveFloor,
    RangeKind,
    RationalExpr,
    ScanResult,
    SpecError,
    SupRatio,
    Trend,
    UNKNOWN,
    WeightSpec,
    ZERO_LIMIT,
    _region_bounds,
    _region_floor,
    backward_log_series,
    eval_weight,
    exact_abs_product,
    exact_level_check,
    identity_ratio,
    log_abs_array,
    scan_sup,
    symbolic_backward_floor,
    symbolic_sup_bound,
    symbolic_weight_bound,
)

LN2 = math.log(2.0)


class Status(Enum):
    CHAOTIC_CERTIFIED = "chaotic-certified"
    NOT_CHAOTIC_SYMBOLIC = "not-chaotic-symbolic"
    UNDETERMINED = "undetermined"


class SoundnessError(AssertionError):
    """A symbolic refutation collided with an exact certificate."""


@dataclass(frozen=True)
class VanishRecord:
    n: int
    value: float
    exact_zero: bool = False


@dataclass(frozen=True)
class CompositionLevel:
    level: int
    candidate: int        # anchor point of the candidate set
    n: int
    value_log: float


@dataclass(frozen=True)
class Certificate:
    growth: Optional[ScanResult] = None
    vanishing: tuple = ()                      # VanishRecord tuple
    case_tag: Optional[str] = None             # "I" / "II" for zero-weight analyses
    kothe_k: Optional[int] = None
    levels_by_l: tuple = ()                    # ((l, ScanResult), ...)
    vanishing_by_k: tuple = ()                 # ((k, VanishRecord tuple), ...)
    vanish_anchor: Optional[int] = None        # backward range endpoint k used
    composition_levels: tuple = ()             # CompositionLevel tuple


@dataclass(frozen=True)
class Refutation:
    reason: str
    family: str
    sup_bound: Optional[Fraction] = None
    backward_floor: Optional[Fraction] = None


@dataclass(frozen=True)
class Verdict:
    status: Status
    theorem_tag: str
    caps: tuple                                # ((name, value), ...)
    certificate: Optional[Certificate] = None
    refutation: Optional[Refutation] = None
    notes: tuple = ()

    @property
    def chaotic(self) -> bool:
        return self.status is Status.CHAOTIC_CERTIFIED


def _caps(config: AnalysisConfig, domain: IndexDomain, **extra) -> tuple:
    base = {
        "window": list(config.window(domain)),
        "levels": config.levels,
        "eps": config.eps,
        "horizon": config.horizon,
        "back_width": config.back_width,
    }
    base.update(extra)
    return tuple(sorted(base.items()))


# ---------------------------------------------------------------------------
# vanishing evidence

def _vanishing_records(logs: np.ndarray, eps: float, n_offset: int = 1,
                       max_records: int = 64) -> Optional[tuple]:
    """Halving chain of running minima ending strictly below eps.

    ``logs[m]`` is ln(value) at n = n_offset + m (-inf marks exact zeros).
    Returns None when the series never drops below eps.
    """
    eps_log = math.log(eps)
    records: list[VanishRecord] = []
    last = math.inf
    for m, lg in enumerate(logs):
        if lg < last - LN2 or (lg == -math.inf and last > -math.inf):
            n = n_offset + m
            if lg == -math.inf:
                records.append(VanishRecord(n, 0.0, exact_zero=True))
                last = -math.inf
                if len([r for r in records if r.exact_zero]) >= 4:
                    break
            else:
                records.append(VanishRecord(n, math.exp(max(lg, -745.0)), exact_zero=False))
                last = lg
            if len(records) >= max_records:
                break
    if not records:
        return None
    ok = records[-1].exact_zero or (last < eps_log)
    return tuple(records[-max_records:]) if ok else None


def _combined_vanishing(log_rows: Sequence[np.ndarray], eps: float,
                        n_offset: int = 1) -> Optional[tuple]:
    """Common vanishing subsequence: halving chain on the rowwise maximum."""
    if not log_rows:
        return None
    width = min(len(r) for r in log_rows)
    if width == 0:
        return None
    stacked = np.vstack([r[:width] for r in log_rows])
    return _vanishing_records(np.max(stacked, axis=0), eps, n_offset)


def _backward_series_logs(w: WeightSpec, k: int, horizon: int) -> np.ndarray:
    """ln |w_{-n} ... w_{-k}| for n = max(k, 1) ... horizon."""
    start = max(k, 1)
    full = backward_log_series(w, k, horizon)
    return full[start - k:]


# ---------------------------------------------------------------------------
# shift analyzers (Banach sequence spaces)

def _require_bounded(w: WeightSpec, config: AnalysisConfig) -> tuple:
    wb = symbolic_weight_bound(w, config.probe)
    if isinstance(wb, Infinite):
        raise SpecError("weight sequence is unbounded; the shift is not defined on this space")
    notes = ()
    if isinstance(wb, type(UNKNOWN)):
        lo, hi = config.window(w.domain)
        idx = np.arange(lo if w.domain is IndexDomain.BILATERAL else max(lo, 1), hi + 1, dtype=np.int64)
        logs = log_abs_array(w, idx)
        third = max(1, idx.size // 3)
        if np.max(logs[-third:]) > np.max(logs[:-third]) + 0.05:
            raise SpecError("weight sequence grows across the window; treating the shift as ill-defined")
        notes = ("boundedness checked on the window only",)
    return notes


def analyze_unilateral_shift(w: WeightSpec, space: SpaceSpec,
                             config: AnalysisConfig = DEFAULT_CONFIG) -> Verdict:
    """Growth-sup criterion for backward shifts on c0(N) / lp(N).

    Certified chaos needs all growth levels inside the window; the symbolic
    catalog alone may refute it.  The backward vanishing condition is
    vacuous here (n-step preimages of finite sets empty out), which is why a
    growth certificate suffices.
    """
    if w.domain is not IndexDomain.UNILATERAL:
        raise SpecError("this analyzer expects a unilateral spec")
    if not isinstance(space, (C0Space, LpSpace)):
        raise SpecError("this analyzer expects c0(N) or lp(N)")
    notes = _require_bounded(w, config)
    tag = "unilateral-banach-sup"
    caps = _caps(config, w.domain)

    sup = symbolic_sup_bound(w, RangeKind.FORWARD_ALL, config.probe)
    scan = scan_sup(w, config.window(w.domain), config.levels, back_width=config.back_width)

    if isinstance(sup, Finite):
        if scan.trend is Trend.GROWING:
            raise SoundnessError("finite symbolic bound against a replayed growth certificate")
        ref = Refutation("forward-products-bounded", family=type(w.form).__name__,
                         sup_bound=sup.bound)
        return Verdict(Status.NOT_CHAOTIC_SYMBOLIC, tag, caps, refutation=ref, notes=notes)
    if scan.trend is Trend.GROWING:
        cert = Certificate(growth=scan)
        return Verdict(Status.CHAOTIC_CERTIFIED, tag, caps, certificate=cert,
                       notes=notes + ("backward vanishing vacuous: finite-set preimages empty out",))
    return Verdict(Status.UNDETERMINED, tag, caps, notes=notes)


def analyze_bilateral_shift_nonzero(w: WeightSpec, space: SpaceSpec,
                                    config: AnalysisConfig = DEFAULT_CONFIG) -> Verdict:
    """Two-condition criterion on c0(Z) / lp(Z) for nonzero weights:
    backward products must vanish along a subsequence and forward products
    must be unbounded.
    """
    if w.domain is not IndexDomain.BILATERAL:
        raise SpecError("this analyzer expects a bilateral spec")
    if not w.all_nonzero:
        raise SpecError("zero weights present: use the general bilateral analyzer")
    notes = _require_bounded(w, config)
    tag = "bilateral-banach-sup-liminf"
    caps = _caps(config, w.domain)

    sup = symbolic_sup_bound(w, RangeKind.FORWARD_ALL, config.probe)
    floor = symbolic_backward_floor(w, config.probe)

    scan = scan_sup(w, config.window(w.domain), config.levels, back_width=config.back_width)
    logs = _backward_series_logs(w, 1, config.horizon)
    vanish = _vanishing_records(logs, config.eps)

    if isinstance(floor, PositiveFloor):
        if vanish is not None and float(floor.bound) >= config.eps:
            raise SoundnessError("positive backward floor against sub-eps vanishing evidence")
        ref = Refutation("backward-products-bounded-below", family=type(w.form).__name__,
                         backward_floor=floor.bound,
                         sup_bound=sup.bound if isinstance(sup, Finite) else None)
        return Verdict(Status.NOT_CHAOTIC_SYMBOLIC, tag, caps, refutation=ref, notes=notes)
    if isinstance(sup, Finite):
        if scan.trend is Trend.GROWING:
            raise SoundnessError("finite symbolic bound against a replayed growth certificate")
        ref = Refutation("forward-products-bounded", family=type(w.form).__name__,
                         sup_bound=sup.bound)
        return Verdict(Status.NOT_CHAOTIC_SYMBOLIC, tag, caps, refutation=ref, notes=notes)

    if scan.trend is Trend.GROWING and vanish is not None:
        cert = Certificate(growth=scan, vanishing=vanish, vanish_anchor=1)
        return Verdict(Status.CHAOTIC_CERTIFIED, tag, caps, certificate=cert, notes=notes)
    return Verdict(Status.UNDETERMINED, tag, caps, notes=notes)


def _zero_positions(w: WeightSpec, window: tuple[int, int]) -> list[int]:
    lo, hi = window
    idx = np.arange(lo, hi + 1, dtype=np.int64)
    logs = log_abs_array(w, idx)
    return [int(j) for j in idx[np.isneginf(logs)]]


def analyze_bilateral_shift_general(w: WeightSpec, space: SpaceSpec,
                                    config: AnalysisConfig = DEFAULT_CONFIG) -> Verdict:
    """Bilateral criterion with zero weights allowed.

    Case I: nonnegative-side products unbounded and some backward range
    vanishes (zero weights give exact-zero products).  Case II: bounded
    nonnegative side, unbounded negative side, and backward vanishing for
    every k up to the cap.
    """
    if w.domain is not IndexDomain.BILATERAL:
        raise SpecError("this analyzer expects a bilateral spec")
    if w.all_nonzero:
        return analyze_bilateral_shift_nonzero(w, space, config)
    notes = _require_bounded(w, config)
    tag = "bilateral-banach-zero-weights"
    caps = _caps(config, w.domain, k_cap=config.k_cap, k_search=config.k_search)
    lo, hi = config.window(w.domain)

    beta_plus_sym = symbolic_sup_bound(w, RangeKind.FORWARD_NONNEG, config.probe)
    beta_minus_sym = symbolic_sup_bound(w, RangeKind.FORWARD_NEG_ONLY, config.probe)
    floor = symbolic_backward_floor(w, config.probe)

    # case I: growth on [0, hi]
    plus_scan = scan_sup(w, (0, hi), config.levels, back_width=config.back_width)
    if plus_scan.trend is Trend.GROWING:
        if isinstance(beta_plus_sym, Finite):
            raise SoundnessError("finite nonnegative-side bound against a growth certificate")
        zeros = _zero_positions(w, (max(lo, -config.k_search), config.k_search))
        vanish = None
        anchor = None
        if zeros:
            z = min(zeros, key=lambda t: (abs(t), t < 0))
            anchor = -z
            logs = _backward_series_logs(w, anchor, max(abs(z) + 8, 8))
            vanish = _vanishing_records(logs, config.eps)
        if vanish is None:
            for k in sorted(range(-config.k_search, config.k_search + 1), key=lambda t: (abs(t), t < 0)):
                logs = _backward_series_logs(w, k, config.horizon)
                vanish = _vanishing_records(logs, config.eps)
                if vanish is not None:
                    anchor = k
                    break
        if vanish is not None:
            cert = Certificate(growth=plus_scan, vanishing=vanish, case_tag="I", vanish_anchor=anchor)
            return Verdict(Status.CHAOTIC_CERTIFIED, tag, caps, certificate=cert, notes=notes)

    # case II: bounded nonnegative side, growth strictly left of zero
    if isinstance(beta_plus_sym, Finite):
        minus_scan = scan_sup(w, (lo, -1), config.levels, back_width=config.back_width)
        if minus_scan.trend is Trend.GROWING:
            if isinstance(beta_minus_sym, Finite):
                raise SoundnessError("finite negative-side bound against a growth certificate")
            rows = []
            per_k = []
            ok = True
            for k in range(1, config.k_cap + 1):
                logs = _backward_series_logs(w, k, config.horizon)
                rec = _vanishing_records(logs, config.eps)
                if rec is None:
                    ok = False
                    break
                rows.append(logs)
                per_k.append((k, rec))
            if ok:
                combined = _combined_vanishing(rows, config.eps)
                if combined is not None:
                    cert = Certificate(growth=minus_scan, vanishing=combined, case_tag="II",
                                       vanishing_by_k=tuple(per_k), vanish_anchor=1)
                    return Verdict(Status.CHAOTIC_CERTIFIED, tag, caps, certificate=cert, notes=notes)

    case1_refuted = isinstance(beta_plus_sym, Finite)
    case2_refuted = (isinstance(beta_plus_sym, Infinite)
                     or isinstance(beta_minus_sym, Finite)
                     or isinstance(floor, PositiveFloor))
    if case1_refuted and case2_refuted:
        ref = Refutation(
            "both-zero-weight-cases-refuted", family=type(w.form).__name__,
            sup_bound=beta_plus_sym.bound,
            backward_floor=floor.bound if isinstance(floor, PositiveFloor) else None)
        return Verdict(Status.NOT_CHAOTIC_SYMBOLIC, tag, caps, refutation=ref, notes=notes)
    return Verdict(Status.UNDETERMINED, tag, caps, notes=notes)


# ---------------------------------------------------------------------------
# discrete composition analyzers

def _shift_form(sys: DiscreteSystem) -> Optional[WeightSpec]:
    """The weight spec when the system is the canonical step-one shift."""
    if isinstance(sys.map_f, ShiftMap) and sys.map_f.d == 1 and sys.masses is None:
        return sys.weights
    return None


def _candidate_series(sys: DiscreteSystem, B: frozenset, n_max: int,
                      sup_mode: bool) -> np.ndarray:
    """ln of the n-step mass (or sup cocycle) over in-window preimages of B.

    Stops early (shorter array) as soon as a conceptual preimage point falls
    outside the window, so no vanishing evidence is faked by truncation.
    """
    lmass = {}
    cur: dict[int, float] = {int(b): 0.0 for b in B}
    out = []
    for _ in range(n_max):
        nxt: dict[int, float] = {}
        truncated = False
        for p, acc in cur.items():
            for q in map_preimage(sys, p):
                if not sys.in_window(q):
                    truncated = True
                    continue
                wq = sys.weight(q)
                lw = -math.inf if wq == 0 else log_abs_fraction(wq)
                # each q has a single image, so it appears at most once
                nxt[q] = lw + acc
        if truncated:
            break
        if not nxt:
            out.append(-math.inf)
            cur = {}
            continue
        cur = nxt
        if sup_mode:
            out.append(max(cur.values()))
        else:
            terms = []
            for q, lg in cur.items():
                if q not in lmass:
                    lmass[q] = log_abs_fraction(sys.mass(q))
                if lg > -math.inf:
                    terms.append(sys.p * lg + lmass[q])
            if not terms:
                out.append(-math.inf)
            else:
                m = max(terms)
                out.append(m + math.log(sum(math.exp(t - m) for t in terms)))
    return np.array(out)


def _composition_levels(sys: DiscreteSystem, candidates: Sequence[frozenset],
                        sup_mode: bool, config: AnalysisConfig):
    """Deterministic (n ascending, candidate ascending) growth-level search."""
    lo, hi = sys.window
    idx = np.arange(lo, hi + 1, dtype=np.int64)
    pos = {int(j): t for t, j in enumerate(idx)}
    fv = np.array([pos.get(map_apply(sys, int(j)), -1) if map_apply(sys, int(j)) is not None else -1
                   for j in idx], dtype=np.int64)
    logw = log_abs_array(sys.weights, idx)
    lmass = np.array([log_abs_fraction(sys.mass(int(j))) for j in idx])

    anchors = [min(c) for c in candidates]
    anchor_pos = np.full(idx.size, -1, dtype=np.int64)
    cand_of_pos = {}
    for ci, c in enumerate(candidates):
        if len(c) == 1:
            t = pos.get(min(c))
            if t is not None:
                anchor_pos[t] = ci
                cand_of_pos[t] = ci
    singleton_only = all(len(c) == 1 for c in candidates)
    mass_of_cand = [float(mu_measure(sys, c)) for c in candidates]
    lmass_cand = np.array([math.log(m) for m in mass_of_cand])

    levels: list[CompositionLevel] = []
    s = 1
    n_cap = min(config.horizon, idx.size * 2)
    S = logw.copy()
    tgt = fv.copy()
    for n in range(1, n_cap + 1):
        alive = tgt >= 0
        if not np.any(alive):
            break
        if singleton_only:
            if sup_mode:
                bucket = np.full(idx.size, -np.inf)
                np.maximum.at(bucket, tgt[alive], S[alive])
                vals = bucket
            else:
                acc = np.zeros(idx.size)
                contrib = np.exp(np.clip(sys.p * S[alive] + lmass[alive], -745, 700))
                np.add.at(acc, tgt[alive], contrib)
                with np.errstate(divide="ignore"):
                    vals = np.log(acc) - lmass_cand_at(idx.size, lmass_cand, cand_of_pos)
        else:
            vals = None
        while s <= config.levels:
            thr = s * LN2
            found = None
            if singleton_only:
                mask = anchor_pos >= 0
                good = np.nonzero(mask & (vals > thr))[0]
                for t in good:
                    ci = cand_of_pos[int(t)]
                    cand = candidates[ci]
                    ok = _exact_composition_check(sys, cand, n, s, sup_mode)
                    if ok:
                        found = (ci, float(vals[int(t)]))
                        break
            else:
                for ci, cand in enumerate(candidates):
                    series = _candidate_series(sys, cand, n, sup_mode)
                    if len(series) < n:
                        continue
                    v = series[n - 1] - (0.0 if sup_mode else lmass_cand[ci])
                    if v > thr and _exact_composition_check(sys, cand, n, s, sup_mode):
                        found = (ci, float(v))
                        break
            if found is None:
                break
            ci, v = found
            levels.append(CompositionLevel(level=s, candidate=anchors[ci], n=n, value_log=v))
            s += 1
        if s > config.levels:
            break
        step_alive = tgt >= 0
        S = np.where(step_alive, S + logw[np.clip(tgt, 0, idx.size - 1)], S)
        tgt = np.where(step_alive, fv[np.clip(tgt, 0, idx.size - 1)], -1)
    return levels


def lmass_cand_at(size: int, lmass_cand: np.ndarray, cand_of_pos: dict) -> np.ndarray:
    out = np.zeros(size)
    for t, ci in cand_of_pos.items():
        out[t] = lmass_cand[ci]
    return out


def _exact_composition_check(sys: DiscreteSystem, B: frozenset, n: int, s: int,
                             sup_mode: bool) -> bool:
    """Exact windowed replay of a composition growth level."""
    pre = preimage_n(sys, B, n)
    if not pre:
        return False
    if sup_mode:
        best = max(cocycle_exact(sys, q, n) for q in pre)
        return best > Fraction(2) ** s
    val = mu_n_exact(sys, pre, n)
    return val > Fraction(2) ** s * mu_measure(sys, B)


def _composition_analyze(sys: DiscreteSystem, candidates, sup_mode: bool,
                         config: AnalysisConfig) -> Verdict:
    tag = "sup-composition-family" if sup_mode else "lp-composition-family"
    caps = _caps(config, sys.domain, window=list(sys.window), p=None if sup_mode else sys.p)

    if candidates is None:
        lo, hi = sys.window
        if sys.domain is IndexDomain.UNILATERAL:
            lo = max(lo, 1)
        candidates = [frozenset({j}) for j in range(lo, hi + 1)]
    else:
        candidates = [frozenset(int(x) for x in c) for c in candidates]
    if not candidates:
        raise ValueError("empty candidate family")

    shift_w = _shift_form(sys)
    refutation = None
    ref_notes: tuple = ()
    if shift_w is not None:
        try:
            if sys.domain is IndexDomain.UNILATERAL:
                sub = analyze_unilateral_shift(shift_w, LpSpace(IndexDomain.UNILATERAL, sys.p)
                                               if not sup_mode else C0Space(IndexDomain.UNILATERAL), config)
            elif shift_w.all_nonzero:
                sub = analyze_bilateral_shift_nonzero(shift_w, LpSpace(IndexDomain.BILATERAL, sys.p)
                                                      if not sup_mode else C0Space(IndexDomain.BILATERAL), config)
            else:
                sub = analyze_bilateral_shift_general(shift_w, LpSpace(IndexDomain.BILATERAL, sys.p)
                                                      if not sup_mode else C0Space(IndexDomain.BILATERAL), config)
            if sub.status is Status.NOT_CHAOTIC_SYMBOLIC:
                refutation = sub.refutation
                ref_notes = ("refutation delegated to the shift analyzer",)
        except SpecError:
            pass
    if refutation is None and isinstance(sys.weights.form, Constant) and sys.masses is None:
        if abs(sys.weights.form.value) <= 1:
            refutation = Refutation("cocycle-never-exceeds-one", family="Constant",
                                    sup_bound=max(abs(sys.weights.form.value), Fraction(1)))
            ref_notes = ("constant weight of modulus at most one",)

    levels = _composition_levels(sys, candidates, sup_mode, config)
    have_all_levels = len(levels) >= config.levels

    if have_all_levels:
        used = sorted({lv.candidate for lv in levels})
        rows = []
        ok = True
        per_cand = []
        for a in used:
            cand = next(c for c in candidates if min(c) == a)
            series = _candidate_series(sys, cand, config.horizon, sup_mode)
            if len(series) == 0:
                ok = False
                break
            target_eps = config.eps if sup_mode else config.eps ** sys.p
            rec = _vanishing_records(series, target_eps)
            if rec is None:
                ok = False
                break
            rows.append(series)
            per_cand.append((a, rec))
        if ok:
            target_eps = config.eps if sup_mode else config.eps ** sys.p
            combined = _combined_vanishing(rows, target_eps)
            if combined is not None:
                if refutation is not None:
                    raise SoundnessError("symbolic refutation against a replayed composition certificate")
                cert = Certificate(vanishing=combined, composition_levels=tuple(levels),
                                   vanishing_by_k=tuple(per_cand))
                return Verdict(Status.CHAOTIC_CERTIFIED, tag, caps, certificate=cert)

    if refutation is not None:
        return Verdict(Status.NOT_CHAOTIC_SYMBOLIC, tag, caps, refutation=refutation, notes=ref_notes)
    return Verdict(Status.UNDETERMINED, tag, caps)


def analyze_composition_discrete(sys: DiscreteSystem, candidates=None,
                                 config: AnalysisConfig = DEFAULT_CONFIG) -> Verdict:
    """Mass-ratio criterion for discrete weighted composition on lp.

    Candidates default to singletons across the window.  Certification needs
    the per-set mass ratios to clear every growth level and the masses of the
    used sets to vanish along a common subsequence; the vanishing tolerance
    is eps**p to match amplitude semantics.
    """
    return _composition_analyze(sys, candidates, sup_mode=False, config=config)


def analyze_c0_discrete(sys: DiscreteSystem, candidates=None,
                        config: AnalysisConfig = DEFAULT_CONFIG) -> Verdict:
    """Sup-norm cocycle criterion for discrete weighted composition on c0."""
    return _composition_analyze(sys, candidates, sup_mode=True, config=config)


# ---------------------------------------------------------------------------
# Koethe-space analyzer

def _matrix_entry_floor(matrix: KotheMatrix) -> Optional[Fraction]:
    kind = matrix.kind
    if isinstance(kind, ConstantMatrix):
        return kind.value if kind.value > 0 else None
    if isinstance(kind, PowerMatrix):
        return Fraction(1)
    return None


def _kothe_refutation(w: WeightSpec, matrix: KotheMatrix,
                      config: AnalysisConfig) -> Optional[Refutation]:
    """Catalog proofs that no seminorm index can satisfy the growth test."""
    kind = matrix.kind
    domain = w.domain
    if isinstance(kind, ConstantMatrix):
        sup = symbolic_sup_bound(w, RangeKind.FORWARD_ALL, config.probe)
        if isinstance(sup, Finite):
            return Refutation("forward-products-bounded", family=type(w.form).__name__,
                              sup_bound=sup.bound)
    if isinstance(kind, PowerMatrix) and domain is IndexDomain.UNILATERAL:
        sup = symbolic_sup_bound(w, RangeKind.FORWARD_ALL, config.probe)
        if isinstance(sup, Finite):
            # row factor (i+1)**k / (j+2)**k <= 1 whenever i <= j
            return Refutation("power-rows-dominated", family=type(w.form).__name__,
                              sup_bound=sup.bound)
    if domain is IndexDomain.BILATERAL:
        floor = symbolic_backward_floor(w, config.probe)
        entry_floor = _matrix_entry_floor(matrix)
        if isinstance(floor, PositiveFloor) and entry_floor is not None:
            return Refutation("backward-products-bounded-below", family=type(w.form).__name__,
                              backward_floor=floor.bound * entry_floor)
    return None


def _kothe_vanishing(w: WeightSpec, matrix: KotheMatrix, k_cap: int,
                     config: AnalysisConfig):
    """Backward series ln(a_{-n,k} |w_{-n}...w_{-1}|) for each k <= cap."""
    horizon = config.horizon
    prod = _backward_series_logs(w, 1, horizon)
    idx = -np.arange(1, horizon + 1, dtype=np.int64)
    rows = []
    per_k = []
    for k in range(1, k_cap + 1):
        logs = prod + kothe_log_column(matrix, k, idx)
        rec = _vanishing_records(logs, config.eps)
        if rec is None:
            return None, None
        rows.append(logs)
        per_k.append((k, rec))
    combined = _combined_vanishing(rows, config.eps)
    return combined, tuple(per_k)


def analyze_kothe(w: WeightSpec, matrix: KotheMatrix, p: float,
                  k_cap: Optional[int] = None, l_cap: Optional[int] = None,
                  config: AnalysisConfig = DEFAULT_CONFIG) -> Verdict:
    """Matrix-ratio criterion for weighted shifts on a matrix sequence space.

    Searches k <= k_cap such that for every l <= l_cap the ratio-adjusted
    scan clears all growth levels; the bilateral case additionally needs the
    backward matrix-weighted products to vanish for every k along a common
    subsequence.  Caps are echoed in the verdict; nothing is claimed beyond
    them.
    """
    if not matrix.all_nonzero:
        raise SpecError("matrix with zero entries is outside this criterion")
    if not w.all_nonzero:
        raise SpecError("zero weights are outside the matrix-space criterion")
    if w.domain is not matrix.domain:
        raise SpecError("weight and matrix domains differ")
    k_cap = k_cap if k_cap is not None else config.k_cap
    l_cap = l_cap if l_cap is not None else config.l_cap
    tag = "kothe-ratio-criterion"
    caps = _caps(config, w.domain, k_cap=k_cap, l_cap=l_cap, p=p)

    wd = check_well_defined(ShiftOperator(w), KotheSpace(matrix, p),
                            {"k_max": k_cap, "m_max": max(k_cap, l_cap) + 4})
    notes: tuple = ()
    if wd.status == "failed":
        raise SpecError(f"shift not well defined on the space: {wd.witness}")
    if wd.status != "verified":
        notes = ("well-definedness undetermined at caps; proceeding",)

    window = config.window(w.domain)

    def scan_for(k: int, l: int) -> ScanResult:
        return scan_sup(w, window, config.levels, ratio=kothe_sup_ratio(matrix, k, l),
                        back_width=config.back_width)

    chosen_k = None
    levels_by_l: tuple = ()
    workers = thread_cap()
    for k in range(1, k_cap + 1):
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as ex:
                results = list(ex.map(lambda l: (l, scan_for(k, l)), range(1, l_cap + 1)))
        else:
            results = [(l, scan_for(k, l)) for l in range(1, l_cap + 1)]
        if all(res.trend is Trend.GROWING for _, res in results):
            chosen_k = k
            levels_by_l = tuple(sorted(results))
            break

    vanishing = ()
    per_k = ()
    vanish_ok = True
    if w.domain is IndexDomain.BILATERAL:
        combined, per_k_t = _kothe_vanishing(w, matrix, k_cap, config)
        if combined is None:
            vanish_ok = False
        else:
            vanishing, per_k = combined, per_k_t

    refutation = _kothe_refutation(w, matrix, config)

    if chosen_k is not None and vanish_ok:
        if refutation is not None:
            raise SoundnessError("matrix-space refutation against a replayed certificate")
        cert = Certificate(growth=levels_by_l[0][1], vanishing=vanishing,
                           kothe_k=chosen_k, levels_by_l=levels_by_l,
                           vanishing_by_k=per_k, vanish_anchor=1)
        return Verdict(Status.CHAOTIC_CERTIFIED, tag, caps, certificate=cert, notes=notes)
    if refutation is not None:
        return Verdict(Status.NOT_CHAOTIC_SYMBOLIC, tag, caps, refutation=refutation, notes=notes)
    return Verdict(Status.UNDETERMINED, tag, caps, notes=notes)


# ---------------------------------------------------------------------------
# orbit-based classification and the hypercyclicity contrast

class TrichotomyClass(Enum):
    DENSELY_CHAOTIC_EVIDENCE = "densely-chaotic-evidence"
    ALL_ORBITS_VANISH_EVIDENCE = "all-orbits-vanish-evidence"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class TrichotomyReport:
    classification: TrichotomyClass
    notes: tuple = ()
    seed_summaries: tuple = ()     # (label, min, max, last) per seed


def _default_seeds(op: ShiftOperator, space: SpaceSpec, horizon: int, k_eval: int):
    dom = op.domain
    seeds = []
    rng = range(1, 5) if dom is IndexDomain.UNILATERAL else range(-2, 3)
    for j in rng:
        if dom is IndexDomain.UNILATERAL and j < 1:
            continue
        seeds.append((f"e_{j}", SparseVector.basis(j, dom)))
    length = horizon + k_eval + 8
    lo = 1 if dom is IndexDomain.UNILATERAL else -length
    ones = SparseVector.of({j: Fraction(1) for j in range(lo, length + 1)}, dom)
    seeds.append(("ones-truncation", ones))
    return seeds


def trichotomy_classify(op: ShiftOperator, space: SpaceSpec,
                        horizon: Optional[int] = None, seeds=None,
                        config: AnalysisConfig = DEFAULT_CONFIG) -> TrichotomyReport:
    """Orbit-based split: either some orbit refuses to vanish (dense-chaos
    evidence) or all seed orbits decay and a catalog argument covers the rest.

    Bilateral use requires numeric evidence that the backward canonical-vector
    sequence has a vanishing subsequence; without it the report stays
    undetermined.
    """
    horizon = horizon or config.horizon
    k_eval = 1
    notes: list[str] = []
    if op.domain is IndexDomain.BILATERAL:
        n_arr = np.arange(1, horizon + 1, dtype=np.int64)
        logs = _backward_series_logs(op.weights, 1, horizon) + \
            canonical_norm_log_series(space, -n_arr, k_eval)
        drops = _vanishing_records(logs, eps=math.exp(np.min(logs) + 1e-9) if logs.size else 1.0,
                                   max_records=64)
        halvings = 0 if drops is None else len(drops)
        if halvings < 3 and symbolic_backward_floor(op.weights, config.probe) is not ZERO_LIMIT:
            return TrichotomyReport(TrichotomyClass.UNDETERMINED,
                                    notes=("no evidence that backward canonical terms vanish",))
        notes.append("backward canonical terms show a vanishing subsequence")

    if seeds is None:
        seeds = _default_seeds(op, space, horizon, k_eval)
    summaries = []
    dense = False
    all_decay = True
    for label, seed in seeds:
        ref = seminorm(space, seed, k_eval).value
        trace = simulate_orbit(op, seed, space, horizon, k_set=(k_eval,))
        vals = [v for _, v in trace.series(k_eval)]
        mn, mx, last = min(vals), max(vals), vals[-1]
        summaries.append((label, mn, mx, last))
        growth = unboundedness_evidence(trace, ladder=config.ladder, k=k_eval)
        if growth.verdict == "growing":
            dense = True
            notes.append(f"seed {label}: orbit climbs the whole growth ladder")
        elif ref > 0 and mn >= 0.5 * ref and mn > 0:
            dense = True
            notes.append(f"seed {label}: orbit stays above half the seed seminorm")
        if last > config.eps:
            all_decay = False
    if dense:
        return TrichotomyReport(TrichotomyClass.DENSELY_CHAOTIC_EVIDENCE, tuple(notes), tuple(summaries))

    sup = symbolic_sup_bound(op.weights, RangeKind.FORWARD_ALL, config.probe)
    if (op.domain is IndexDomain.UNILATERAL and isinstance(space, (C0Space, LpSpace))
            and isinstance(sup, Finite)):
        notes.append("bounded products push every tail below any threshold on these spaces")
        return TrichotomyReport(TrichotomyClass.ALL_ORBITS_VANISH_EVIDENCE, tuple(notes), tuple(summaries))
    if all_decay:
        notes.append("all seed orbits decayed below eps, but no catalog argument covers general vectors")
    return TrichotomyReport(TrichotomyClass.UNDETERMINED, tuple(notes), tuple(summaries))


@dataclass(frozen=True)
class HypercyclicityReport:
    first_condition: tuple      # (l, min_value, dips_found) per l
    second_condition: tuple
    obstructions: tuple         # (side, l, floor) proven lower bounds
    joint_dips: tuple           # common subsequence records, if any
    verdict_evidence: str       # "obstruction" | "candidate-subsequence" | "inconclusive"


def _canonical_norm_floor(space: SpaceSpec, lo_index: int) -> Optional[Fraction]:
    """Positive floor on ||e_j|| for all j >= lo_index, when provable."""
    if isinstance(space, (C0Space, LpSpace)):
        return Fraction(1)
    if isinstance(space, WeightedLpSpace):
        form = space.nu.form
        if isinstance(form, BlockGenerator) and form.generator == "geometric_tent" \
                and form.param >= 1 and lo_index >= form.start:
            return Fraction(1)
        return None
    if isinstance(space, KotheSpace):
        kind = space.matrix.kind
        if isinstance(kind, PowerMatrix):
            return Fraction(1)
        if isinstance(kind, ConstantMatrix) and kind.value > 0:
            return kind.value
        return None
    return None


def _anchored_prefix_bound(w: WeightSpec, l: int, probe: int) -> Optional[Fraction]:
    """M with |w_l ... w_{l+n-1}| <= M for every n >= 1, when provable."""
    form = w.form
    if isinstance(form, Constant):
        return Fraction(1) if abs(form.value) <= 1 else None
    if isinstance(form, Periodic):
        per = abs(math.prod(form.values, start=Fraction(1)))
        if per > 1:
            return None
        L = len(form.values)
        best = Fraction(0)
        prod = Fraction(1)
        for t in range(l, l + 2 * L):
            prod *= abs(eval_weight(w, t))
            best = max(best, prod)
        return max(best, Fraction(1))
    if isinstance(form, RationalExpr):
        b = _region_bounds(form, l, math.inf, probe)
        return b.bound if isinstance(b, Finite) else None
    if isinstance(form, BlockGenerator) and form.generator == "half_double_runs":
        if form.param < 1:
            return None
        bound = Fraction(1)
        start = form.start
        if l < start:
            if not isinstance(form.negative, Constant) or abs(form.negative.value) > 1:
                return None
            anchor = start
        else:
            anchor = l
        # within the anchor's block the running prefix is computed exactly;
        # every later block starts and ends at running value 1
        from .weights import _block_decompose
        n_blk, _ = _block_decompose(anchor - start)
        blk_end = start + n_blk * (n_blk + 1) - 1
        prod = Fraction(1)
        for t in range(anchor, blk_end + 1):
            prod *= abs(eval_weight(w, t))
            bound = max(bound, prod)
        return bound
    return None


def _anchored_backward_floor(w: WeightSpec, l: int, probe: int) -> Optional[Fraction]:
    """c > 0 with |w_{l-n} ... w_{l-1}| >= c for every n >= 1, when provable."""
    return _region_floor(w.form, -math.inf, l - 1, probe)


def hypercyclicity_check(w: WeightSpec, space: SpaceSpec, horizon: Optional[int] = None,
                         l_range: Sequence[int] = range(-2, 3), k: int = 1,
                         config: AnalysisConfig = DEFAULT_CONFIG) -> HypercyclicityReport:
    """Contrast check: evaluate the two canonical-vector sequences whose joint
    vanishing along a common subsequence characterizes a dense orbit.

    Reports either a proven obstruction (one sequence bounded below via the
    catalog), a candidate common subsequence, or inconclusive data.
    """
    if w.domain is not IndexDomain.BILATERAL:
        raise SpecError("the contrast check runs on bilateral shifts")
    horizon = horizon or config.horizon
    n_arr = np.arange(1, horizon + 1, dtype=np.int64)
    first_rows = []
    second_rows = []
    first_summary = []
    second_summary = []
    obstructions = []
    for l in l_range:
        l = int(l)
        wlog_back = log_abs_array(w, np.arange(l - horizon, l, dtype=np.int64))[::-1]
        back = np.cumsum(wlog_back)      # ln|w_{l-n} ... w_{l-1}|
        a_first = back + canonical_norm_log_series(space, l - n_arr, k)
        wlog_fwd = log_abs_array(w, np.arange(l, l + horizon, dtype=np.int64))
        fwd = np.cumsum(wlog_fwd)        # ln|w_l ... w_{l+n-1}|
        a_second = canonical_norm_log_series(space, l + n_arr, k) - fwd
        first_rows.append(a_first)
        second_rows.append(a_second)
        first_summary.append((l, float(np.min(a_first)),
                              _vanishing_records(a_first, config.eps) is not None))
        second_summary.append((l, float(np.min(a_second)),
                               _vanishing_records(a_second, config.eps) is not None))
        nf = _canonical_norm_floor(space, l + 1)
        pm = _anchored_prefix_bound(w, l, config.probe)
        if nf is not None and pm is not None:
            obstructions.append(("second", l, nf / pm))
        bf = _anchored_backward_floor(w, l, config.probe)
        # norms of e_{l-n} need a floor over all j <= l-1
        nfb = _canonical_norm_floor(space, 0) if isinstance(space, (C0Space, LpSpace, KotheSpace)) else None
        if isinstance(space, KotheSpace) and not isinstance(space.matrix.kind, (PowerMatrix, ConstantMatrix)):
            nfb = None
        if bf is not None and nfb is not None:
            obstructions.append(("first", l, bf * nfb))

    joint = _combined_vanishing(first_rows + second_rows, config.eps)
    if obstructions:
        verdict = "obstruction"
    elif joint is not None:
        verdict = "candidate-subsequence"
    else:
        verdict = "inconclusive"
    return HypercyclicityReport(tuple(first_summary), tuple(second_summary),
                                tuple(obstructions), joint or (), verdict)


# ---------------------------------------------------------------------------
# certificate replay

def replay_certificate(verdict: Verdict, w: Optional[WeightSpec] = None,
                       matrix: Optional[KotheMatrix] = None,
                       sys: Optional[DiscreteSystem] = None,
                       eps: float = 1e-9) -> tuple[bool, tuple]:
    """Re-verify every strict inequality in a certificate with exact rationals.

    Returns (ok, problems).  Level records must beat their 2**s thresholds
    exactly; vanishing records must be strictly decreasing with the last one
    below eps (exact zeros replay as exact zeros).
    """
    problems: list[str] = []
    cert = verdict.certificate
    if cert is None:
        return False, ("no certificate on this verdict",)

    def check_scan(scan: ScanResult, ratio: Optional[SupRatio], label: str):
        for rec in scan.levels:
            ok = exact_level_check(w, ratio or identity_ratio(), rec.i, rec.j, rec.level)
            if ok is None:
                problems.append(f"{label} level {rec.level}: replay too large for exact arithmetic")
            elif not ok:
                problems.append(f"{label} level {rec.level}: strict inequality fails exactly")

    def check_vanishing(records, anchor: int, kothe_k: Optional[int], label: str):
        prev = None
        for rec in records:
            if w is None:
                problems.append(f"{label}: no weight spec to replay against")
                return
            lo_i, hi_i = -rec.n, -anchor
            if lo_i > hi_i:
                problems.append(f"{label} n={rec.n}: empty backward range")
                continue
            val = exact_abs_product(w, lo_i, hi_i)
            if kothe_k is not None and matrix is not None:
                val *= kothe_entry(matrix, -rec.n, kothe_k)
            if rec.exact_zero:
                if val != 0:
                    problems.append(f"{label} n={rec.n}: recorded exact zero is nonzero")
            else:
                if val == 0:
                    problems.append(f"{label} n={rec.n}: nonzero record replayed to zero")
                if prev is not None and val >= prev:
                    problems.append(f"{label} n={rec.n}: values not strictly decreasing")
            prev = val if val != 0 else None
        if records and not records[-1].exact_zero:
            lo_i, hi_i = -records[-1].n, -anchor
            val = exact_abs_product(w, lo_i, hi_i)
            if kothe_k is not None and matrix is not None:
                val *= kothe_entry(matrix, -records[-1].n, kothe_k)
            if not val < Fraction(eps).limit_denominator(10 ** 30):
                problems.append(f"{label}: final value not below eps")

    if cert.growth is not None and w is not None:
        check_scan(cert.growth, None, "growth")
    for l, scan in cert.levels_by_l:
        if w is not None and matrix is not None and cert.kothe_k is not None:
            check_scan(scan, kothe_sup_ratio(matrix, cert.kothe_k, l), f"l={l}")
    if cert.vanishing and w is not None and cert.composition_levels == ():
        anchor = cert.vanish_anchor if cert.vanish_anchor is not None else 1
        if cert.kothe_k is not None:
            for kk, recs in cert.vanishing_by_k:
                check_vanishing(recs, anchor, kk, f"vanishing k={kk}")
        else:
            check_vanishing(cert.vanishing, anchor, None, "vanishing")
            for kk, recs in cert.vanishing_by_k:
                check_vanishing(recs, kk, None, f"vanishing k={kk}")
    if cert.composition_levels:
        if sys is None:
            problems.append("composition levels present but no system to replay against")
        else:
            for lv in cert.composition_levels:
                ok = _exact_composition_check(sys, frozenset({lv.candidate}), lv.n, lv.level,
                                              sup_mode=(verdict.theorem_tag == "sup-composition-family"))
                if not ok:
                    problems.append(f"composition level {lv.level}: fails exact replay")
    return (not problems), tuple(problems)
