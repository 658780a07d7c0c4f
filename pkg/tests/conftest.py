import numpy as np
import pytest

from biaslab import make_instance
from biaslab.core import Belief, SignalingScheme
from biaslab.errors import NoUniqueDefault


@pytest.fixture
def coin_instance():
    """Fair vs loaded coin, pay-to-flip-again deal: net payoffs of the deal."""
    return make_instance(
        states=["fair", "unfair"],
        actions=["Active", "Passive"],
        prior=[0.5, 0.5],
        utility=[[1.4 * 0.5 - 1.0, 1.4 * 0.9 - 1.0], [0.0, 0.0]],
    )


@pytest.fixture
def twostate_instance():
    """Indifference belief at 0.5, prior 0.2: the canonical finite case."""
    return make_instance(
        states=["Good", "Bad"],
        actions=["Active", "Passive"],
        prior=[0.2, 0.8],
        utility=[[1.0, -1.0], [0.0, 0.0]],
    )


@pytest.fixture
def symmetric3_instance():
    """Mirror-image risky actions around a safe default: single-sample case."""
    return make_instance(
        states=["G", "B"],
        actions=["a0", "a1", "a2"],
        prior=[0.5, 0.5],
        utility=[[0.1, 0.1], [1.0, -1.0], [-1.0, 1.0]],
    )


def two_state_family(mu0: float, mu_star: float):
    """Two-state, two-action instance with the given prior and indifference belief."""
    return make_instance(
        states=["Good", "Bad"],
        actions=["Active", "Passive"],
        prior=[mu0, 1.0 - mu0],
        utility=[[1.0 - mu_star, -mu_star], [0.0, 0.0]],
    )


def random_instance(rng, n_states=None, n_actions=None, min_margin=1e-3):
    """Random valid instance: floored prior keeps useful masses workable."""
    while True:
        n_s = n_states or int(rng.integers(2, 6))
        n_a = n_actions or int(rng.integers(2, 6))
        prior = 0.8 * rng.dirichlet(np.ones(n_s)) + 0.2 / n_s
        utility = rng.normal(size=(n_a, n_s))
        try:
            inst = make_instance(
                states=[f"t{i}" for i in range(n_s)],
                actions=[f"a{i}" for i in range(n_a)],
                prior=prior,
                utility=utility,
            )
        except NoUniqueDefault:
            continue
        if inst.prior_margin > min_margin:
            return inst


def random_scheme(rng, n_states: int, n_signals=None) -> SignalingScheme:
    cols = n_signals or int(rng.integers(2, 7))
    cond = rng.random((cols, n_states)) + 1e-3
    cond /= cond.sum(axis=0, keepdims=True)
    return SignalingScheme(signals=tuple(f"s{i}" for i in range(cols)), cond=cond)


def random_belief(rng, dim: int) -> Belief:
    return Belief(rng.dirichlet(np.ones(dim)))
