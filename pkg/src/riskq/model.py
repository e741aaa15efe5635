"""Discrete-time risk-sensitive queue model.

The embedded chain has states ``0..B`` (queue length) and two actions,
0 (idle) and 1 (attempt a transmission). Every transition carries a one-step
cost that enters the multiplicative Bellman operator as ``exp(gamma * cost)``.
"""

import contextlib
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, ParameterRangeError

IDLE = 0
TRANSMIT = 1

# exp overflows a double just above 709
EXPONENT_LIMIT = 700.0

_kernel_fault = None


@dataclass(frozen=True)
class ModelParams:
    """Buffer size, channel success probability, costs and risk parameter.

    Parameters
    ----------
    B : int
        Buffer size; states are ``0..B``.
    p : float
        Probability that an attempted transmission succeeds before the next
        arrival, strictly between 0 and 1.
    C, R, L : float
        Transmission cost, delivery reward and loss penalty (all >= 0).
    gamma : float
        Risk-sensitivity parameter (> 0).
    """

    B: int
    p: float
    C: float
    R: float
    L: float
    gamma: float

    def __post_init__(self):
        if isinstance(self.B, bool) or int(self.B) != self.B or self.B < 1:
            raise DomainError(f"B must be an integer >= 1, got {self.B!r}")
        object.__setattr__(self, "B", int(self.B))
        for name in ("p", "C", "R", "L", "gamma"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if not 0.0 < self.p < 1.0:
            raise DomainError(f"p must lie in (0, 1), got {self.p}")
        if self.gamma <= 0:
            raise DomainError(f"gamma must be > 0, got {self.gamma}")
        for name in ("C", "R", "L"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.gamma * (self.C + self.L) > EXPONENT_LIMIT or self.gamma * self.C > EXPONENT_LIMIT:
            raise ParameterRangeError(
                f"gamma*(C+L) = {self.gamma * (self.C + self.L):.6g} exceeds {EXPONENT_LIMIT}; "
                "multiplicative weights would overflow"
            )
        zero = [name for name in ("C", "R", "L") if getattr(self, name) == 0]
        if zero:
            warnings.warn(
                f"{', '.join(zero)} = 0; structural results assume strictly positive costs",
                stacklevel=3,
            )

    @classmethod
    def from_rates(cls, lam, mu, **kwargs):
        """Build the embedded-chain model from arrival rate ``lam`` and service rate ``mu``."""
        return cls(p=embed_continuous(lam, mu), **kwargs)

    @property
    def n_states(self):
        return self.B + 1

    @property
    def states(self):
        return range(self.B + 1)

    def with_cost(self, C):
        """Copy of the model with transmission cost ``C``."""
        return ModelParams(self.B, self.p, C, self.R, self.L, self.gamma)

    def as_dict(self):
        return {"B": self.B, "p": self.p, "C": self.C, "R": self.R, "L": self.L, "gamma": self.gamma}


class TransitionEntry(NamedTuple):
    next_state: int
    probability: float
    step_cost: float


def embed_continuous(lam, mu):
    """Probability that service finishes before the next arrival, ``mu / (lam + mu)``."""
    if not (lam > 0 and mu > 0):
        raise DomainError(f"rates must be positive, got lambda={lam}, mu={mu}")
    return mu / (lam + mu)


def transition_kernel(model, state, action):
    """Successor states, probabilities and one-step costs for ``(state, action)``."""
    B, p, C, R, L = model.B, model.p, model.C, model.R, model.L
    if isinstance(state, bool) or int(state) != state or not 0 <= state <= B:
        raise DomainError(f"state must be an integer in [0, {B}], got {state!r}")
    if action not in (IDLE, TRANSMIT):
        raise DomainError(f"action must be 0 or 1, got {action!r}")
    state = int(state)

    if action == IDLE:
        entries = [TransitionEntry(state + 1, 1.0, 0.0)] if state < B else [TransitionEntry(B, 1.0, L)]
    elif state == 0:
        entries = [TransitionEntry(1, 1.0, C)]
    elif state < B:
        entries = [TransitionEntry(state - 1, p, C - R), TransitionEntry(state + 1, 1.0 - p, C)]
    else:
        entries = [TransitionEntry(B - 1, p, C - R), TransitionEntry(B, 1.0 - p, C + L)]

    if _kernel_fault is not None and action == TRANSMIT and len(entries) == 2:
        first = entries[0]
        entries[0] = first._replace(probability=first.probability + _kernel_fault)
    return entries


@contextlib.contextmanager
def corrupted_kernel(delta=0.05):
    """Test hook: inflate the success probability of transmit transitions by ``delta``.

    Rows of the kernel no longer sum to one while the hook is active, so every
    cross-check that rebuilds the model independently should disagree.
    """
    global _kernel_fault
    previous, _kernel_fault = _kernel_fault, float(delta)
    try:
        yield
    finally:
        _kernel_fault = previous


def weight_matrices(model):
    """Stack ``W[u, i, j] = p(j | i, u) * exp(gamma * Co(i, j, u))``, shape ``(2, B+1, B+1)``."""
    n = model.n_states
    W = np.zeros((2, n, n))
    for u in (IDLE, TRANSMIT):
        for i in range(n):
            for nxt, prob, cost in transition_kernel(model, i, u):
                W[u, i, nxt] += prob * math.exp(model.gamma * cost)
    return W


def _check_value(model, V):
    V = np.asarray(V, dtype=float)
    if V.shape != (model.n_states,):
        raise DomainError(f"value function must have length {model.n_states}, got shape {V.shape}")
    if not np.all(V > 0):
        raise DomainError("value function must be strictly positive")
    return V


def q_factors(model, V, state):
    """Return ``(J0, J1)``, the one-step costs-to-go of idling and transmitting at ``state``."""
    V = _check_value(model, V)
    out = []
    for u in (IDLE, TRANSMIT):
        out.append(
            sum(prob * math.exp(model.gamma * cost) * V[nxt] for nxt, prob, cost in transition_kernel(model, state, u))
        )
    return out[0], out[1]


def bellman_apply(model, V, W=None):
    """One application of the multiplicative Bellman operator.

    Returns the unnormalized minimum over actions and the greedy policy.
    Ties go to idle.
    """
    V = _check_value(model, V)
    if W is None:
        W = weight_matrices(model)
    J = W @ V
    greedy = (J[TRANSMIT] < J[IDLE]).astype(int)
    return np.minimum(J[IDLE], J[TRANSMIT]), greedy


def differential(model, V):
    """``J(n, 0) - J(n, 1)`` for every state, from the closed case formulas.

    Positive entries are states where transmitting is strictly better.
    """
    V = _check_value(model, V)
    B, p, g = model.B, model.p, model.gamma
    eC = math.exp(g * model.C)
    succ = p * math.exp(g * (model.C - model.R))
    keep = 1.0 - (1.0 - p) * eC

    dJ = np.empty(B + 1)
    dJ[0] = (1.0 - eC) * V[1]
    if B > 1:
        dJ[1:B] = V[2:] * keep - succ * V[: B - 1]
    dJ[B] = V[B] * keep * math.exp(g * model.L) - succ * V[B - 1]
    return dJ
