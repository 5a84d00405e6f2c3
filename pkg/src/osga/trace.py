"""Per-iteration trace records shared by all solvers."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass
class TraceRecord:
    """One solver iteration: best objective so far plus solver-specific
    diagnostics (eta/alpha are populated by the subgradient solver only;
    delta is filled in by the harness once a reference value is known)."""

    iter: int
    elapsed: float
    f: float
    delta: float | None = None
    eta: float | None = None
    alpha: float | None = None
