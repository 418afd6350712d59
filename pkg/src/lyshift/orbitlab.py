"""Orbit simulation and trajectory statistics.

Orbits are iterated exactly; seminorm evaluation switches to a log-domain
path once entries leave the 2**+-512 magnitude band, and the switch step is
recorded on the trace so certificates never silently depend on float drift.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .operators import DiscreteSystem, ShiftOperator, apply_composition, apply_shift
from .spaces import SeminormValue, SpaceSpec, SparseVector, seminorm, seminorm_log

_SWITCH_LOG = 512 * math.log(2.0)


@dataclass(frozen=True)
class OrbitStep:
    n: int
    values: tuple            # ((k, SeminormValue), ...) for the requested k set
    boundary: bool = False

    def value(self, k: int) -> SeminormValue:
        for kk, v in self.values:
            if kk == k:
                return v
        raise KeyError(k)


@dataclass(frozen=True)
class OrbitTrace:
    steps: tuple
    k_set: tuple
    switch_step: Optional[int] = None    # first step evaluated in log domain

    def series(self, k: int) -> list:
        return [(st.n, st.value(k).value) for st in self.steps]

    def max_value(self, k: int) -> float:
        return max((st.value(k).value for st in self.steps), default=0.0)

    def min_value(self, k: int) -> float:
        return min((st.value(k).value for st in self.steps), default=0.0)


def _step(op, x: SparseVector) -> tuple[SparseVector, bool]:
    if isinstance(op, ShiftOperator):
        return apply_shift(op, x), False
    return apply_composition(op, x)


def simulate_orbit(
    op,
    x: SparseVector,
    space: SpaceSpec,
    horizon: int,
    k_set: Sequence[int] = (1,),
) -> OrbitTrace:
    """Track seminorms of op^n(x) for n = 1..horizon.

    Iteration is exact; per-step seminorms are exact until entry magnitudes
    pass 2**+-512, after which values come from the log-domain evaluator and
    the trace records the switch.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    ks = tuple(dict.fromkeys(int(k) for k in k_set))
    steps = []
    switch: Optional[int] = None
    cur = x
    for n in range(1, horizon + 1):
        cur, boundary = _step(op, cur)
        big = not cur.is_zero and abs(cur.max_log_abs()) > _SWITCH_LOG
        if big and switch is None:
            switch = n
        vals = []
        for k in ks:
            if big:
                lg = seminorm_log(space, cur, k)
                v = SeminormValue(k, 0.0 if lg == -math.inf else math.exp(min(lg, 709)))
            else:
                v = seminorm(space, cur, k)
            vals.append((k, v))
        steps.append(OrbitStep(n=n, values=tuple(vals), boundary=boundary))
        if cur.is_zero:
            # the orbit is exactly zero from here on; extend cheaply
            zero_vals = tuple((k, SeminormValue(k, 0.0, exact=Fraction(0))) for k in ks)
            for m in range(n + 1, horizon + 1):
                steps.append(OrbitStep(n=m, values=zero_vals, boundary=False))
            break
    return OrbitTrace(steps=tuple(steps), k_set=ks, switch_step=switch)


@dataclass(frozen=True)
class NsEvidence:
    dips: tuple                  # (n, max-over-k value) with value < eps
    verdict: str                 # "in-ns-evidence" | "none"
    exact_zero_tail: bool = False


def ns_membership_evidence(trace: OrbitTrace, eps: float) -> NsEvidence:
    """Steps where every requested seminorm drops below eps.

    Evidence requires dips that persist into the tail of the horizon (late
    dips, or an exactly-zero tail), since a single early dip says nothing
    about a subsequence tending to zero.
    """
    dips = []
    for st in trace.steps:
        top = max(v.value for _, v in st.values)
        if top < eps:
            dips.append((st.n, top))
    if not dips:
        return NsEvidence((), "none")
    last = trace.steps[-1]
    exact_zero = all(v.exact == 0 for _, v in last.values if v.exact is not None) and \
        any(v.exact == 0 for _, v in last.values)
    horizon = last.n
    late = dips[-1][0] >= max(1, horizon // 2)
    verdict = "in-ns-evidence" if (late or exact_zero) else "none"
    return NsEvidence(tuple(dips), verdict, exact_zero_tail=exact_zero)


@dataclass(frozen=True)
class GrowthEvidence:
    rungs: tuple                 # (s, first n with value > 2**s)
    verdict: str                 # "growing" | "undetermined"


def unboundedness_evidence(trace: OrbitTrace, ladder: int = 12, k: Optional[int] = None) -> GrowthEvidence:
    """First step climbing past each rung 2**s, s = 1..ladder."""
    kk = k if k is not None else trace.k_set[0]
    rungs = []
    s = 1
    for st in trace.steps:
        v = st.value(kk).value
        while s <= ladder and v > 2.0 ** s:
            rungs.append((s, st.n))
            s += 1
        if s > ladder:
            break
    verdict = "growing" if s > ladder else "undetermined"
    return GrowthEvidence(tuple(rungs), verdict)


def write_trace_csv(trace: OrbitTrace, path: str) -> None:
    """Columns: n, k, seminorm, boundary_flag."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "k", "seminorm", "boundary_flag"])
        for st in trace.steps:
            for k, v in st.values:
                w.writerow([st.n, k, repr(v.value), int(st.boundary)])
