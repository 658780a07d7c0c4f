"""Principal-side algorithms.

A threshold test repeats the designed scheme until a useful signal lands
and reads the verdict off the agent's response.  Binary search over
testable thresholds turns those one-bit answers into a confidence interval
for the hidden bias level.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .agent import BiasedAgent, sample_episode
from .core import ZERO_MASS, Instance, SignalingScheme
from .design import DesignResult, design_scheme
from .errors import DegenerateParameters, NothingTestable, Timeout
from .geometry import testable_range

# Default step budget: the exact horizon for residual failure probability
# 1e-9, so a Timeout is practically impossible yet runtime stays bounded.
DEFAULT_TIMEOUT_DELTA = 1e-9


class Verdict:
    GEQ = "geq"
    LEQ = "leq"


@dataclass(frozen=True, eq=False)
class ThresholdVerdict:
    """Outcome of one threshold test.

    ``steps`` counts episodes until the first useful signal; the verdict is
    read from that single episode.  ``trace`` holds every episode when
    recording was requested.
    """

    verdict: str
    steps: int
    trace: tuple | None = None

    def to_json_dict(self) -> dict:
        return {"verdict": self.verdict, "steps": int(self.steps)}


@dataclass(frozen=True, eq=False)
class BiasInterval:
    """Binary-search output: bias level bracketed in [lo, hi].

    ``censored`` marks runs where every query answered "at or above", so
    the upper end is clipped to 1 rather than the untestable region's edge.
    """

    lo: float
    hi: float
    queries: int
    censored: bool

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def to_json_dict(self) -> dict:
        return {
            "lo": float(self.lo),
            "hi": float(self.hi),
            "queries": int(self.queries),
            "censored": bool(self.censored),
        }


class ConfidenceHorizon(NamedTuple):
    exact: int
    bound: int


class ComplexityEstimate(NamedTuple):
    mean: float
    stderr: float | None


@lru_cache(maxsize=4096)
def cached_design(instance: Instance, tau: float) -> DesignResult:
    """Design once per (instance, threshold); binary search reuses it."""
    return design_scheme(instance, tau)


def steps_for_confidence(p_star: float, delta: float) -> ConfidenceHorizon:
    """Episodes needed so a useful signal arrives with probability 1 - delta.

    ``exact`` is the smallest horizon whose miss probability drops to
    ``delta``; ``bound`` is the standard log(1/delta)/p overestimate.
    """
    if not 0.0 < p_star <= 1.0 or not 0.0 < delta < 1.0:
        raise DegenerateParameters(f"p_star={p_star}, delta={delta}")
    if p_star == 1.0:
        exact = 1
    else:
        q = 1.0 - p_star
        t = max(1, math.ceil(math.log(delta) / math.log(q)))
        while t > 1 and q ** (t - 1) <= delta:
            t -= 1
        while q**t > delta:
            t += 1
        exact = t
    bound = math.ceil(math.log(1.0 / delta) / p_star)
    return ConfidenceHorizon(exact=exact, bound=bound)


def threshold_test_on_scheme(
    instance: Instance,
    scheme: SignalingScheme,
    useful_signals,
    agent: BiasedAgent,
    rng: np.random.Generator,
    max_steps: int,
    record_trace: bool = False,
) -> ThresholdVerdict:
    """Run episodes until a signal from ``useful_signals`` arrives.

    On that episode the agent's move decides: sticking with the default
    action means the bias is at or above the threshold the scheme was built
    for, anything else means at or below.  Raises Timeout if no useful
    signal lands within ``max_steps``.
    """
    useful = set(useful_signals)
    trace = [] if record_trace else None
    for step in range(1, max_steps + 1):
        episode = sample_episode(agent, instance, scheme, rng)
        if record_trace:
            trace.append(episode)
        _, signal, action = episode
        if signal in useful:
            verdict = Verdict.GEQ if action == instance.default_action else Verdict.LEQ
            return ThresholdVerdict(
                verdict=verdict, steps=step, trace=tuple(trace) if record_trace else None
            )
    raise Timeout(max_steps)


def threshold_test(
    instance: Instance,
    tau: float,
    agent: BiasedAgent,
    rng: np.random.Generator,
    max_steps: int | None = None,
    record_trace: bool = False,
) -> ThresholdVerdict:
    """Decide whether the agent's bias is >= tau or <= tau.

    Designs (or reuses) the optimal direct scheme for ``tau``; useful
    signals are the non-default recommendations.  Raises Untestable when
    the threshold cannot be tested at all.
    """
    design = cached_design(instance, tau)
    probs = design.scheme.signal_probs(instance.prior)
    useful = [
        s
        for i, s in enumerate(design.scheme.signals)
        if s != instance.default_action and probs[i] > ZERO_MASS
    ]
    if max_steps is None:
        max_steps = steps_for_confidence(design.useful_mass, DEFAULT_TIMEOUT_DELTA).exact
    return threshold_test_on_scheme(
        instance, design.scheme, useful, agent, rng, max_steps, record_trace
    )


def empirical_sample_complexity(
    instance: Instance,
    tau: float,
    agent: BiasedAgent,
    rng: np.random.Generator,
    trials: int,
) -> ComplexityEstimate:
    """Monte-Carlo estimate of the expected episodes per threshold test.

    The step count is geometric with success probability equal to the
    designed useful mass, so the mean converges to its reciprocal.  The
    standard error is None for a single trial.
    """
    if trials < 1:
        raise DegenerateParameters(f"trials={trials}")
    cached_design(instance, tau)  # fail fast on untestable thresholds
    steps = np.empty(trials)
    for k in range(trials):
        steps[k] = threshold_test(instance, tau, agent, rng).steps
    mean = float(steps.mean())
    stderr = float(steps.std(ddof=1) / math.sqrt(trials)) if trials > 1 else None
    return ComplexityEstimate(mean=mean, stderr=stderr)


def estimate_bias(
    instance: Instance,
    agent: BiasedAgent,
    epsilon: float,
    rng: np.random.Generator,
    max_steps_per_test: int | None = None,
) -> BiasInterval:
    """Bracket the hidden bias level by binary search over thresholds.

    Searches [0, tau_max], halving until the bracket is at most ``epsilon``
    wide; each query is one threshold test.  When every answer says "at or
    above" the level may lie beyond the testable range, so the interval is
    censored to [lo, 1].  If the requested width already covers the whole
    searchable range, a single query at tau_max settles which side applies.
    Raises NothingTestable when no threshold is testable at all.
    """
    if not 0.0 < epsilon < 1.0:
        raise DegenerateParameters(f"epsilon={epsilon}")
    tau_max = testable_range(instance)
    if tau_max <= ZERO_MASS:
        raise NothingTestable("default action dominates everywhere")

    lo, hi = 0.0, tau_max
    queries = 0
    saw_leq = False
    while hi - lo > epsilon:
        mid = 0.5 * (lo + hi)
        verdict = threshold_test(instance, mid, agent, rng, max_steps_per_test)
        queries += 1
        if verdict.verdict == Verdict.GEQ:
            lo = mid
        else:
            hi = mid
            saw_leq = True

    if queries == 0:
        verdict = threshold_test(instance, tau_max, agent, rng, max_steps_per_test)
        if verdict.verdict == Verdict.GEQ:
            return BiasInterval(lo=tau_max, hi=1.0, queries=1, censored=True)
        return BiasInterval(lo=0.0, hi=tau_max, queries=1, censored=False)

    if not saw_leq:
        return BiasInterval(lo=lo, hi=1.0, queries=queries, censored=True)
    return BiasInterval(lo=lo, hi=hi, queries=queries, censored=False)
