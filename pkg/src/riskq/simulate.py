"""Seeded Monte Carlo simulation of the embedded queue.

Random numbers come from numpy's counter-based Philox generator. Replications
are grouped into fixed blocks of ``BLOCK`` paths. Each block's key is
hashed by ``SeedSequence`` from ``(master_seed, block index)``, and a block
always draws a full ``(horizon, BLOCK)`` array of uniforms. So the path of
replication ``r`` depends only on ``(master_seed, r)``: it is unchanged by
the total replication count and by the order in which blocks run.

The exponential-moment estimator has a relative variance that grows roughly
geometrically with the horizon. Keep horizons at 50 or below, and use
:func:`riskq.oracle.exp_moment_exact` for longer ones.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from .errors import DomainError
from .model import transition_kernel

BLOCK = 8192


@dataclass(frozen=True)
class SimConfig:
    horizon: int = 20
    replications: int = 100_000
    master_seed: int = 0
    initial_state: int = 0

    def __post_init__(self):
        if self.horizon < 1:
            raise DomainError("horizon must be >= 1")
        if self.replications < 1:
            raise DomainError("replications must be >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise DomainError("master_seed must be an unsigned 64-bit integer")


@dataclass
class SimResult:
    mean_exp_moment: float
    std_error: float
    empirical_rs_cost: float
    log_mean_exp_moment: float
    replications: int
    degenerate: bool = False
    per_rep_S: Optional[np.ndarray] = None


@dataclass
class PathResult:
    states: np.ndarray
    actions: np.ndarray
    S_T: float


def _kernel_tables(model):
    """Per (state, action): first-branch probability, and next state / cost for both branches."""
    n = model.n_states
    first_prob = np.ones((n, 2))
    nxt = np.zeros((n, 2, 2), dtype=np.int64)
    cost = np.zeros((n, 2, 2))
    for i in range(n):
        for u in (0, 1):
            entries = transition_kernel(model, i, u)
            if len(entries) > 2:
                raise DomainError("simulator supports at most two branches per (state, action)")
            first_prob[i, u] = entries[0].probability if len(entries) == 2 else 1.0
            for k in range(2):
                e = entries[min(k, len(entries) - 1)]
                nxt[i, u, k] = e.next_state
                cost[i, u, k] = e.step_cost
    return first_prob, nxt, cost


def _check_policy(model, policy):
    actions = np.asarray(policy, dtype=np.int64)
    if actions.shape != (model.n_states,) or not np.all((actions == 0) | (actions == 1)):
        raise DomainError(f"policy must be a 0/1 array of length {model.n_states}")
    return actions


def _run(tables, actions, start, uniforms, record=False):
    """Advance a batch of paths through the columns of ``uniforms`` (shape ``(T, n)``)."""
    first_prob, nxt, cost = tables
    T, n = uniforms.shape
    s = np.full(n, start, dtype=np.int64)
    total = np.zeros(n)
    states = np.empty((T + 1, n), dtype=np.int64) if record else None
    acts = np.empty((T, n), dtype=np.int64) if record else None
    if record:
        states[0] = s
    for t in range(T):
        u = actions[s]
        branch = (uniforms[t] >= first_prob[s, u]).astype(np.int64)
        total += cost[s, u, branch]
        s = nxt[s, u, branch]
        if record:
            acts[t] = u
            states[t + 1] = s
    return total, states, acts


def _block_uniforms(master_seed, block, horizon):
    seq = np.random.SeedSequence([int(master_seed) & 0xFFFFFFFFFFFFFFFF, int(block)])
    return np.random.Generator(np.random.Philox(seq)).random((horizon, BLOCK))


def simulate_path(model, policy, horizon, seed, initial_state=0):
    """One trajectory of length ``horizon``; ``S_T`` sums transmit costs, minus rewards, plus losses."""
    actions = _check_policy(model, policy)
    if not 0 <= initial_state <= model.B:
        raise DomainError("initial_state out of range")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))
    uniforms = rng.random((int(horizon), 1))
    total, states, acts = _run(_kernel_tables(model), actions, initial_state, uniforms, record=True)
    return PathResult(states[:, 0], acts[:, 0], float(total[0]))


def simulate_paths(model, policy, cfg, record=False):
    """Path totals ``S_T`` for every replication (and states/actions if ``record``).

    Replication ``r`` lives in block ``r // BLOCK``, column ``r % BLOCK``.
    """
    actions = _check_policy(model, policy)
    if not 0 <= cfg.initial_state <= model.B:
        raise DomainError("initial_state out of range")
    tables = _kernel_tables(model)
    n_blocks = -(-cfg.replications // BLOCK)
    totals, all_states, all_acts = [], [], []
    for b in range(n_blocks):
        take = min(BLOCK, cfg.replications - b * BLOCK)
        uniforms = _block_uniforms(cfg.master_seed, b, cfg.horizon)[:, :take]
        total, states, acts = _run(tables, actions, cfg.initial_state, uniforms, record)
        totals.append(total)
        if record:
            all_states.append(states)
            all_acts.append(acts)
    S = np.concatenate(totals)
    if record:
        return S, np.concatenate(all_states, axis=1), np.concatenate(all_acts, axis=1)
    return S


def estimate_risk_cost(model, policy, cfg, keep_paths=False, log_domain=True):
    """Monte Carlo estimate of ``E[exp(gamma * S_T)]`` from ``cfg.initial_state``.

    In the log domain, every block is reduced with log-sum-exp, and block
    results are combined in block order, so large exponents never overflow.
    The direct domain averages ``exp(gamma * S_T)`` in the same order. The
    standard error is the sample standard deviation over ``sqrt(n)``. A
    single replication reports 0 and sets ``degenerate``.
    """
    S = simulate_paths(model, policy, cfg)
    n = S.size
    x = model.gamma * S
    if log_domain:
        block_lse = [logsumexp(x[i : i + BLOCK]) for i in range(0, n, BLOCK)]
        log_mean = float(logsumexp(block_lse)) - math.log(n)
        with np.errstate(over="ignore"):
            mean = math.exp(log_mean) if log_mean < 709 else math.inf
        shift = float(x.max())
        w = np.exp(x - shift)
        sd = float(np.std(w, ddof=1)) * math.exp(shift) if n > 1 else 0.0
    else:
        w = np.exp(x)
        mean = float(sum(float(w[i : i + BLOCK].sum()) for i in range(0, n, BLOCK)) / n)
        log_mean = math.log(mean)
        sd = float(np.std(w, ddof=1)) if n > 1 else 0.0
    return SimResult(
        mean_exp_moment=mean,
        std_error=sd / math.sqrt(n),
        empirical_rs_cost=log_mean / (model.gamma * cfg.horizon),
        log_mean_exp_moment=log_mean,
        replications=n,
        degenerate=n == 1,
        per_rep_S=S if keep_paths else None,
    )
