"""Heuristic ``T^n`` by see-saw block ascent, dimension profiles and gap detection.

Each see-saw half step is an exact block maximization: Alice's vectors are
set parallel to ``M b``, then Bob's parallel to ``M^T a``.  The objective can
therefore only increase.  Restarts are independent and seeded from
``(config.seed, restart_index)``, so results do not depend on how the
restarts are split across workers.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from dimwitness.classical import ENUMERATION_CAP, classical_max
from dimwitness.core import BellExpression, bob_value, normalize_rows, witness_dimension
from dimwitness.errors import DimensionError, DomainError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 50
    max_sweeps: int = 10000
    conv_tol: float = 1e-11
    gap_tol: float = 1e-5
    seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        if self.restarts < 1 or self.max_sweeps < 1 or self.jobs < 1:
            raise DomainError("restarts, max_sweeps and jobs must be positive")
        if not (self.conv_tol > 0 and self.gap_tol > 0):
            raise DomainError("tolerances must be positive")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")


@dataclass
class OptRun:
    n: int
    value: float
    bob: np.ndarray
    converged: bool
    sweeps: int
    restart_index: int
    history: list[float] | None = None


@dataclass
class ProfileEntry:
    n: int
    value: float
    converged: bool
    restarts: int
    source: str = "heuristic"  # heuristic | exact | analytic
    bob: np.ndarray | None = field(default=None, repr=False)


@dataclass
class DimensionProfile:
    entries: list[ProfileEntry]

    @property
    def values(self) -> list[float]:
        return [e.value for e in self.entries]

    def __getitem__(self, n: int) -> ProfileEntry:
        for e in self.entries:
            if e.n == n:
                return e
        raise KeyError(n)


@dataclass(frozen=True)
class Gap:
    n: int
    n_next: int
    size: float
    witness_dim: int
    threshold: float
    grade: str


@dataclass
class WitnessReport:
    profile: DimensionProfile
    gaps: list[Gap]
    witness_dim: int | None
    grade: str | None
    threshold: float | None


def _run_batch(m: np.ndarray, b: np.ndarray, max_sweeps: int, conv_tol: float,
               history: bool = False):
    """See-saw on a stack of Bob initializations ``b`` of shape ``(R, m_B, n)``.

    A restart stops updating once its per-sweep gain drops below
    ``conv_tol`` relative to its value, so its trajectory never depends on
    the other members of the batch.
    """
    b = np.array(b, dtype=float)
    mt = m.T
    h = m @ b
    val = np.linalg.norm(h, axis=-1).sum(axis=-1)
    converged = np.zeros(len(b), dtype=bool)
    sweeps = np.zeros(len(b), dtype=int)
    trace = [val.copy()] if history else None
    active = np.arange(len(b))
    for sweep in range(1, max_sweeps + 1):
        if active.size == 0:
            break
        a = normalize_rows(h[active])
        bn = normalize_rows(mt @ a)
        hn = m @ bn
        vn = np.linalg.norm(hn, axis=-1).sum(axis=-1)
        gain = vn - val[active]
        b[active] = bn
        h[active] = hn
        val[active] = vn
        sweeps[active] = sweep
        if history:
            trace.append(val.copy())
        done = gain <= conv_tol * np.maximum(np.abs(vn), 1e-300)
        converged[active[done]] = True
        active = active[~done]
    return val, b, converged, sweeps, trace


def seesaw(expr: BellExpression, n: int, init, config: OptimizerConfig | None = None,
           restart_index: int = 0, record_history: bool = False) -> OptRun:
    """Run the see-saw from Bob vectors ``init`` (shape ``(m_B, n)``) until the
    relative per-sweep gain is below ``config.conv_tol`` or the sweep budget runs out."""
    config = config or OptimizerConfig()
    if n < 1:
        raise DomainError("dimension must be at least 1")
    b0 = np.atleast_2d(np.asarray(init, dtype=float))
    if b0.shape != (expr.cols, n):
        raise DimensionError(f"initial Bob vectors must have shape {(expr.cols, n)}, got {b0.shape}")
    val, b, conv, sweeps, trace = _run_batch(expr.matrix, b0[None], config.max_sweeps,
                                             config.conv_tol, history=record_history)
    hist = [float(t[0]) for t in trace] if record_history else None
    return OptRun(n=n, value=float(val[0]), bob=b[0], converged=bool(conv[0]),
                  sweeps=int(sweeps[0]), restart_index=restart_index, history=hist)


def initial_bob(m_b: int, n: int, seed: int, restart_index: int) -> np.ndarray:
    """Normalized standard-normal vectors from the generator for ``(seed, restart_index)``."""
    rng = np.random.default_rng([seed, restart_index])
    return normalize_rows(rng.standard_normal((m_b, n)))


def max_over_restarts(expr: BellExpression, n: int, config: OptimizerConfig | None = None) -> OptRun:
    """Best of ``config.restarts`` independent see-saw runs; ties go to the lowest restart index."""
    config = config or OptimizerConfig()
    if n < 1:
        raise DomainError("dimension must be at least 1")
    indices = np.arange(config.restarts)

    def work(chunk):
        init = np.stack([initial_bob(expr.cols, n, config.seed, int(r)) for r in chunk])
        return chunk, _run_batch(expr.matrix, init, config.max_sweeps, config.conv_tol)

    chunks = [c for c in np.array_split(indices, min(config.jobs, config.restarts)) if c.size]
    if len(chunks) == 1:
        results = [work(chunks[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            results = list(pool.map(work, chunks))

    best = None
    for chunk, (val, b, conv, sweeps, _) in results:
        for k, r in enumerate(chunk):
            if best is None or val[k] > best.value:
                best = OptRun(n=n, value=float(val[k]), bob=b[k], converged=bool(conv[k]),
                              sweeps=int(sweeps[k]), restart_index=int(r))
    return best


def _pad(bob: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros((bob.shape[0], n))
    out[:, : bob.shape[1]] = bob
    return out


def dimension_profile(expr: BellExpression, n_max: int | None = None,
                      config: OptimizerConfig | None = None,
                      analytic: dict[int, float] | None = None) -> DimensionProfile:
    """Best values found for ``n = 1 .. n_max``.

    ``n = 1`` comes from exact enumeration when the expression is narrow
    enough.  Every heuristic entry additionally runs one see-saw warm-started
    from the previous dimension's solution padded with zeros, which keeps the
    profile nondecreasing.  ``analytic`` maps dimensions to known exact values
    that replace the numerical ones.
    """
    config = config or OptimizerConfig()
    n_max = n_max if n_max is not None else min(expr.rows, expr.cols)
    if n_max < 1:
        raise DomainError("n_max must be at least 1")
    analytic = analytic or {}
    entries: list[ProfileEntry] = []
    prev: ProfileEntry | None = None
    for n in range(1, n_max + 1):
        if n in analytic:
            entries.append(ProfileEntry(n, float(analytic[n]), True, 0, "analytic"))
            continue
        if n == 1 and expr.cols <= ENUMERATION_CAP:
            res = classical_max(expr)
            z = np.array(res.argmax, dtype=float)[:, None]
            entry = ProfileEntry(1, res.value, True, 0, "exact", z)
        else:
            if n == 1:
                log.warning("%d columns exceed the enumeration cap; T^1 is a see-saw estimate",
                            expr.cols)
            run = max_over_restarts(expr, n, config)
            used = config.restarts
            if prev is not None:
                warm = seesaw(expr, n, _pad(prev.bob, n), config, restart_index=config.restarts)
                used += 1
                if warm.value > run.value:
                    run = warm
            entry = ProfileEntry(n, run.value, run.converged, used, "heuristic", run.bob)
            if prev is not None and entry.value < prev.value:
                bob = _pad(prev.bob, n)
                entry = ProfileEntry(n, max(prev.value, bob_value(expr, bob)), prev.converged,
                                     used, "heuristic", bob)
        entries.append(entry)
        prev = entry
    return DimensionProfile(entries)


def detect_gaps(profile: DimensionProfile, config: OptimizerConfig | None = None,
                field: str = "complex") -> WitnessReport:
    """Flag every ``n`` with ``T^(n+1) - T^n > max(gap_tol, gap_tol * T^(n+1))``.

    Both entries must be converged.  A gap is graded ``analytic`` only when
    both sides come from closed forms or exact enumeration.
    """
    config = config or OptimizerConfig()
    gaps = []
    entries = sorted(profile.entries, key=lambda e: e.n)
    for lo, hi in zip(entries, entries[1:]):
        if hi.n != lo.n + 1 or not (lo.converged and hi.converged):
            continue
        size = hi.value - lo.value
        if size > max(config.gap_tol, config.gap_tol * abs(hi.value)):
            exact = lo.source in ("analytic", "exact") and hi.source in ("analytic", "exact")
            gaps.append(Gap(lo.n, hi.n, size, witness_dimension(lo.n, field), lo.value,
                            "analytic" if exact else "heuristic"))
    if not gaps:
        return WitnessReport(profile, [], None, None, None)
    top = max(gaps, key=lambda g: (g.witness_dim, g.n))
    grade = "analytic" if all(g.grade == "analytic" for g in gaps) else "heuristic"
    return WitnessReport(profile, gaps, top.witness_dim, grade, top.threshold)


def analyze(expr: BellExpression, n_max: int | None = None,
            config: OptimizerConfig | None = None,
            analytic: dict[int, float] | None = None) -> WitnessReport:
    config = config or OptimizerConfig()
    return detect_gaps(dimension_profile(expr, n_max, config, analytic), config)


def ratio(profile: DimensionProfile, n: int) -> float:
    """``T^(n+1) / T^n`` from a profile."""
    lo = profile[n].value
    return math.inf if lo == 0 else profile[n + 1].value / lo
