"""Brute-force ground truth: policy enumeration, exact exponential moments, risk-neutral limit."""

import itertools
import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .errors import DomainError, NumericError
from .linalg import power_iteration
from .model import ModelParams, transition_kernel

ENUMERATION_CAP = 20
TIE_RTOL = 1e-10


def policy_matrix(model, policy):
    """``M[i, j] = p(j | i, pi(i)) * exp(gamma * Co(i, j, pi(i)))`` from the transition kernel."""
    actions = np.asarray(policy, dtype=int)
    if actions.shape != (model.n_states,):
        raise DomainError(f"policy must have length {model.n_states}")
    M = np.zeros((model.n_states, model.n_states))
    for i, u in enumerate(actions):
        for nxt, prob, cost in transition_kernel(model, i, int(u)):
            M[i, nxt] += prob * math.exp(model.gamma * cost)
    return M


def spectral_radius(M, max_iter=20_000):
    """Perron root of a nonnegative matrix and its right eigenvector.

    The eigenvector is scaled so entry 0 is 1, or so its largest entry is 1
    when entry 0 vanishes. Power iteration handles everything except
    defective dominant eigenvalues, which show up for some non-threshold
    policies as two identical 2-cycles in series. There it converges only
    like ``1/k``, so once ``max_iter`` is reached the dense eigensolver takes
    over.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DomainError("expected a square matrix")
    if np.any(M < 0) or not np.any(M > 0):
        raise DomainError("matrix must be nonnegative and not identically zero")
    try:
        rho, x = power_iteration(M, max_iter=max_iter)
    except NumericError:
        rho, x = _dense_perron(M)
    return rho, _normalize(x)


def _dense_perron(M):
    w, v = np.linalg.eig(M)
    k = int(np.argmax(np.abs(w)))
    x = np.abs(np.real(v[:, k]))
    return float(np.abs(w[k])), x / x.max()


def _normalize(x):
    x = np.asarray(x, dtype=float)
    if x[0] > 1e-14 * x.max():
        return x / x[0]
    return x / x.max()


def _batched_radii(mats, max_iter=2_000):
    rho, _, ok = power_iteration(mats, max_iter=max_iter, strict=False)
    for k in np.flatnonzero(~ok):
        rho[k] = _dense_perron(mats[k])[0]
    return rho


@dataclass
class OracleVerdict:
    best_policy: np.ndarray
    best_alpha: float
    is_threshold: bool
    per_policy_table: List[Tuple[Tuple[int, ...], float]]

    @property
    def threshold(self):
        if not self.is_threshold:
            return None
        ones = np.flatnonzero(self.best_policy == 1)
        return int(ones[0]) if ones.size else len(self.best_policy)


def enumerate_policies(model, include_dominated=False, max_iter=2_000):
    """Evaluate every deterministic stationary policy and return the cheapest.

    State 0 is pinned to idle unless ``include_dominated``. Policies are
    listed in lexicographic order of their action tuples.

    Spectral radii within ``1e-10`` (relative) of the minimum count as ties.
    When the growth rate is dominated by the loss loop at ``B``, policies
    that differ only in rarely visited states can tie to 1e-14, below what
    any eigenvalue routine resolves. Among tied policies, the first one that
    is greedy with respect to its own Perron eigenvector (so that it solves
    the Bellman equation) wins. If none passes, the most idle policy wins.
    """
    B = model.B
    if B > ENUMERATION_CAP:
        raise DomainError(f"enumeration over 2^{B} policies refused; cap is B <= {ENUMERATION_CAP}")
    W = np.stack([policy_matrix(model, np.full(B + 1, u)) for u in (0, 1)])

    if include_dominated:
        policies = list(itertools.product((0, 1), repeat=B + 1))
    else:
        policies = [(0,) + rest for rest in itertools.product((0, 1), repeat=B)]
    rows = np.arange(B + 1)
    radii = np.empty(len(policies))
    chunk = 4096
    for start in range(0, len(policies), chunk):
        acts = np.array(policies[start : start + chunk])
        mats = W[acts, rows[None, :]]
        radii[start : start + len(acts)] = _batched_radii(mats, max_iter)

    best_alpha = float(radii.min())
    tied = np.flatnonzero(radii <= best_alpha * (1 + TIE_RTOL))
    best_idx = next((int(k) for k in tied if _solves_bellman(W, policies[k])), int(tied[0]))
    best = np.array(policies[best_idx])
    ones = np.flatnonzero(best == 1)
    is_thr = bool(ones.size == 0 or np.all(best[ones[0] :] == 1))
    table = [(pol, float(r)) for pol, r in zip(policies, radii)]
    return OracleVerdict(best, best_alpha, is_thr, table)


def _solves_bellman(W, policy, rtol=1e-9):
    acts = np.asarray(policy)
    rows = np.arange(len(acts))
    M = W[acts, rows]
    _, V = spectral_radius(M)
    if not np.all(V > 0):
        return False
    J = W @ V
    chosen = J[acts, rows]
    return bool(np.all(chosen <= J.min(axis=0) * (1 + rtol)))


def exp_moment_exact(model, policy, horizon, initial_state=None):
    """``E[exp(gamma * S_T) | Q(0) = i]`` by ``T`` matrix-vector products against ones.

    Returns the whole vector over initial states when ``initial_state`` is None.
    """
    if horizon < 0:
        raise DomainError("horizon must be >= 0")
    M = policy_matrix(model, policy)
    m = np.ones(model.n_states)
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(int(horizon)):
            m = M @ m
    if not np.all(np.isfinite(m)):
        raise NumericError("exponential moment overflowed; use log_exp_moment_exact")
    return m if initial_state is None else float(m[initial_state])


def log_exp_moment_exact(model, policy, horizon, initial_state=None):
    """Logarithm of :func:`exp_moment_exact`, rescaling after every product."""
    if horizon < 0:
        raise DomainError("horizon must be >= 0")
    M = policy_matrix(model, policy)
    m = np.ones(model.n_states)
    shift = 0.0
    for _ in range(int(horizon)):
        m = M @ m
        top = m.max()
        m /= top
        shift += math.log(top)
    with np.errstate(divide="ignore"):
        out = np.log(m) + shift
    return out if initial_state is None else float(out[initial_state])


def risk_neutral_average_cost(model, tol=1e-12, max_iter=1_000_000, aperiodicity=0.5):
    """Optimal long-run expected cost per step by relative value iteration.

    The one-step cost is the expected ``Co`` under the kernel. The chain is
    made lazy (stay put with probability ``aperiodicity``, costs scaled by
    the complement), which rescales the average cost by the same factor and
    leaves optimal policies alone.
    """
    n = model.n_states
    P = np.zeros((2, n, n))
    c = np.zeros((2, n))
    for u in (0, 1):
        for i in range(n):
            for nxt, prob, cost in transition_kernel(model, i, u):
                P[u, i, nxt] += prob
                c[u, i] += prob * cost
    a = aperiodicity
    P = a * np.eye(n)[None] + (1 - a) * P
    c = (1 - a) * c

    h = np.zeros(n)
    for _ in range(max_iter):
        Th = (c + P @ h).min(axis=0)
        g = Th[0]
        h_new = Th - g
        if np.max(np.abs(h_new - h)) < tol * max(1.0, np.max(np.abs(h_new))):
            return float(g / (1 - a))
        h = h_new
    raise NumericError(f"risk-neutral RVI did not converge in {max_iter} iterations")


def random_model_grid(n, seed=0, B_range=(1, 5), gammas=(0.1, 0.5, 1.0, 2.0), cost_high=3.0):
    """Random desk-scale models: ``B`` uniform in ``B_range``, ``p`` in (0.05, 0.95), costs in (0, cost_high)."""
    rng = np.random.default_rng(seed)
    models = []
    while len(models) < n:
        B = int(rng.integers(B_range[0], B_range[1] + 1))
        p = float(rng.uniform(0.05, 0.95))
        gamma = float(rng.choice(gammas))
        C, R, L = (float(x) for x in rng.uniform(0.0, cost_high, 3))
        if min(C, R, L) <= 0 or gamma * (C + L) > 700:
            continue
        models.append(ModelParams(B, p, C, R, L, gamma))
    return models
