"""Shared knobs for scans, analyzers and orbit runs."""

from __future__ import annotations

import os
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class AnalysisConfig:
    """Caps and tolerances for the semi-decision machinery.

    Numeric scans can only certify growth / vanishing inside these caps; a
    verdict always echoes the caps it was computed under.
    """

    window_uni: tuple[int, int] = (1, 1 << 20)
    window_bi: tuple[int, int] = (-(1 << 19), 1 << 19)
    back_width: int = 4096          # i-search depth below each j in scans
    levels: int = 10                # growth levels: thresholds 2**s, s <= levels
    eps: float = 1e-9               # vanishing tolerance
    k_cap: int = 6                  # "for all k" quantifier cap
    l_cap: int = 6                  # "for all l" quantifier cap
    horizon: int = 4096             # orbit / series length
    k_search: int = 64              # zero-weight case (I): |k| search window
    ladder: int = 12                # unboundedness rungs 2**s, s <= ladder
    probe: int = 2048               # exact probe half-width for symbolic bounds

    def window(self, domain) -> tuple[int, int]:
        from .weights import IndexDomain

        if domain is IndexDomain.UNILATERAL:
            return self.window_uni
        return self.window_bi

    def with_window(self, domain, window: tuple[int, int]) -> "AnalysisConfig":
        from .weights import IndexDomain

        if domain is IndexDomain.UNILATERAL:
            return replace(self, window_uni=window)
        return replace(self, window_bi=window)


DEFAULT_CONFIG = AnalysisConfig()


def thread_cap() -> int:
    """Parallelism cap from LYSHIFT_THREADS (default 1)."""
    try:
        return max(1, int(os.environ.get("LYSHIFT_THREADS", "1")))
    except ValueError:
        return 1
