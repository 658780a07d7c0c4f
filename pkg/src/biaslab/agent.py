"""Simulated agent with a hidden bias level.

The agent knows the committed scheme, so it computes the correct Bayesian
posterior for each signal; the distortion happens only when mixing that
posterior back toward the prior.  ``preference_sign`` is the algebraic
shortcut for the same comparison, used to cross-validate simulations.
"""

from dataclasses import dataclass, field

import numpy as np

from .core import (
    ATOL,
    ZERO_MASS,
    Instance,
    SignalingScheme,
    TieBreak,
    bayes_posterior,
    best_response,
)
from .bias_models import BiasFunction, LinearBias
from .errors import OutOfRangeBias, ZeroProbabilitySignal


@dataclass(frozen=True, eq=False)
class BiasedAgent:
    """Ground-truth oracle: acts optimally for its distorted belief."""

    w: float
    bias_fn: BiasFunction = field(default_factory=LinearBias)
    tiebreak: TieBreak = TieBreak.PREFER_DEFAULT

    def __post_init__(self):
        if not 0.0 <= self.w <= 1.0:
            raise OutOfRangeBias(f"bias level {self.w} outside [0, 1]")


def agent_act(agent: BiasedAgent, instance: Instance, scheme: SignalingScheme, signal) -> str:
    """Action the agent takes after observing ``signal``."""
    posterior = bayes_posterior(instance, scheme, signal)
    belief = agent.bias_fn.evaluate(instance.prior, posterior, agent.w)
    return best_response(instance, belief, agent.tiebreak).action


def preference_sign(
    instance: Instance, scheme: SignalingScheme, signal, a1, a2, w: float
) -> int:
    """Sign of the agent's preference for ``a1`` over ``a2`` given ``signal``.

    +1 when a level-``w`` agent strictly prefers a1, -1 when it strictly
    prefers a2, 0 within the shared tolerance band.  Equals the sign of the
    expected-utility gap under the linear distorted belief, but evaluated
    without forming the posterior (the signal mass multiplies through).
    """
    if not 0.0 <= w <= 1.0:
        raise OutOfRangeBias(f"bias level {w} outside [0, 1]")
    s = scheme.signal_index(signal)
    mu0 = instance.prior.probs
    if float(scheme.cond[s] @ mu0) <= ZERO_MASS:
        raise ZeroProbabilitySignal(f"signal {signal!r} is never sent")
    du = instance.utility[instance.action_index(a1)] - instance.utility[instance.action_index(a2)]
    mean_du = float(mu0 @ du)
    expr = float(np.dot(scheme.cond[s] * mu0, (1.0 - w) * du + w * mean_du))
    if abs(expr) <= ATOL:
        return 0
    return 1 if expr > 0 else -1


def sample_episode(
    agent: BiasedAgent, instance: Instance, scheme: SignalingScheme, rng: np.random.Generator
) -> tuple:
    """Draw one (state, signal, action) episode.

    The state comes from the prior, the signal from the committed scheme's
    conditional row, and the action from the agent.  Deterministic given
    the generator state.
    """
    state_cdf = np.cumsum(instance.prior.probs)
    t = int(np.searchsorted(state_cdf, rng.random(), side="right"))
    t = min(t, instance.n_states - 1)

    col = scheme.cond[:, t]
    signal_cdf = np.cumsum(col)
    s = int(np.searchsorted(signal_cdf, rng.random() * signal_cdf[-1], side="right"))
    if s >= scheme.n_signals:  # guard against cumulative rounding
        s = int(np.max(np.flatnonzero(col > 0.0)))

    signal = scheme.signals[s]
    return instance.states[t], signal, agent_act(agent, instance, scheme, signal)
