"""Relative value iteration for the multiplicative Bellman equation."""

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .errors import ConvergenceError, DomainError, NonThresholdPolicyError, PropertyViolation, RiskQError
from .model import bellman_apply, differential, weight_matrices

MONOTONE_RTOL = 1e-12


@dataclass(frozen=True)
class RviOptions:
    """Stopping rule and bookkeeping for :func:`rvi_solve`.

    ``aperiodicity`` mixes the previous iterate into each update,
    ``V~ <- (1 - a) * T(V) + a * T(V)(0) * V``. The fixed point, the growth
    rate and the greedy policy are unchanged, but the ``-alpha`` mode that
    near-periodic queues carry is damped out. ``aperiodicity=0`` reproduces
    the plain update.
    """

    tolerance: float = 1e-12
    max_iterations: int = 1_000_000
    policy_stability_window: int = 10
    record_diagnostics: bool = False
    aperiodicity: float = 0.5

    def __post_init__(self):
        if not self.tolerance > 0:
            raise DomainError("tolerance must be > 0")
        if self.max_iterations < 1:
            raise DomainError("max_iterations must be >= 1")
        if self.policy_stability_window < 1:
            raise DomainError("policy_stability_window must be >= 1")
        if not 0 <= self.aperiodicity < 1:
            raise DomainError("aperiodicity must lie in [0, 1)")


@dataclass(frozen=True)
class ThresholdPolicy:
    """Transmit iff the queue length is at least ``tau``; ``tau = B + 1`` never transmits."""

    tau: int

    def actions(self, B):
        if not 1 <= self.tau <= B + 1:
            raise DomainError(f"tau must lie in [1, {B + 1}], got {self.tau}")
        return (np.arange(B + 1) >= self.tau).astype(int)


@dataclass
class IterationDiagnostic:
    iteration: int
    monotone: bool
    first_violation: Optional[int]
    threshold: Optional[int]
    sign_pattern: bool


@dataclass
class SolveReport:
    alpha: float
    rs_average_cost: float
    value: np.ndarray
    policy: np.ndarray
    threshold: Optional[int]
    iterations: int
    residual: float
    alpha_spread: float
    converged: bool = True
    diagnostics: List[IterationDiagnostic] = field(default_factory=list)

    @property
    def is_threshold(self):
        return self.threshold is not None


@dataclass
class MonotoneReport:
    monotone: bool
    first_violation: Optional[int]


def extract_threshold(policy):
    """Threshold of an idle-then-transmit action array.

    >>> extract_threshold([0, 0, 1, 1]).tau
    2
    """
    actions = np.asarray(policy, dtype=int)
    transmit = np.flatnonzero(actions == 1)
    if transmit.size == 0:
        return ThresholdPolicy(len(actions))
    first = int(transmit[0])
    bad = [int(s) for s in np.flatnonzero(actions[first:] == 0) + first]
    if bad:
        raise NonThresholdPolicyError(bad)
    return ThresholdPolicy(first)


def _threshold_or_none(policy):
    try:
        return extract_threshold(policy).tau
    except NonThresholdPolicyError:
        return None


def check_differential_monotone(profile):
    """Whether ``profile`` is non-decreasing up to ``1e-12 * max|profile|``.

    ``first_violation`` is the first state whose entry falls below its predecessor.
    """
    d = np.asarray(profile, dtype=float)
    scale = float(np.max(np.abs(d))) if d.size else 0.0
    drops = np.flatnonzero(np.diff(d) < -MONOTONE_RTOL * scale)
    if drops.size:
        return MonotoneReport(False, int(drops[0]) + 1)
    return MonotoneReport(True, None)


def sign_pattern_holds(profile, tau):
    """Non-positive below ``tau`` and non-negative from ``tau`` on, up to ``1e-12 * scale``."""
    d = np.asarray(profile, dtype=float)
    tol = MONOTONE_RTOL * float(np.max(np.abs(d)))
    return bool(np.all(d[:tau] <= tol) and np.all(d[tau:] >= -tol))


def _diagnose(k, dJ, greedy):
    mono = check_differential_monotone(dJ)
    tau = _threshold_or_none(greedy)
    sign_ok = tau is not None and sign_pattern_holds(dJ, tau)
    return IterationDiagnostic(k, mono.monotone, mono.first_violation, tau, sign_ok)


def rvi_solve(model, opts=None, V0=None):
    """Solve ``alpha V(i) = min_u sum_j exp(gamma Co) p(j|i,u) V(j)`` with ``V(0) = 1``.

    Iterates are normalized so that state 0 has value 1. The loop stops once
    the relative sup-norm change of the normalized iterate drops below
    ``opts.tolerance`` and the greedy policy has been the same for
    ``opts.policy_stability_window`` consecutive iterations.

    With ``record_diagnostics`` set, each iteration records whether
    ``J(n,0) - J(n,1)`` is non-decreasing in ``n``, the greedy threshold (or
    ``None``) and whether the differential has the matching sign pattern.
    These checks are only structurally meaningful for ``V0 = 1``.

    Raises
    ------
    ConvergenceError
        When ``max_iterations`` is exhausted; the partial report is attached.
    """
    opts = opts or RviOptions()
    W = weight_matrices(model)
    V = np.ones(model.n_states) if V0 is None else np.array(V0, dtype=float)
    if V.shape != (model.n_states,) or not np.all(V > 0):
        raise DomainError("initial value function must be positive with length B+1")
    V = V / V[0]
    mix = opts.aperiodicity

    diagnostics = []
    prev_policy = None
    stable = 0
    change = math.inf
    for k in range(1, opts.max_iterations + 1):
        J = W @ V
        raw = np.minimum(J[0], J[1])
        greedy = (J[1] < J[0]).astype(int)
        if opts.record_diagnostics:
            diagnostics.append(_diagnose(k, J[0] - J[1], greedy))
        if mix:
            raw = (1.0 - mix) * raw + mix * raw[0] * V
        V_next = raw / raw[0]
        change = float(np.max(np.abs(V_next - V) / V_next))
        stable = stable + 1 if prev_policy is not None and np.array_equal(greedy, prev_policy) else 0
        prev_policy = greedy
        V = V_next
        if change < opts.tolerance and stable >= opts.policy_stability_window - 1:
            break
    else:
        report = _finish(model, W, V, k, diagnostics, converged=False)
        raise ConvergenceError(
            f"RVI did not converge in {opts.max_iterations} iterations (last change {change:.3e})",
            last_iterate=V,
            residual=change,
            report=report,
        )
    return _finish(model, W, V, k, diagnostics, converged=True)


def _finish(model, W, V, iterations, diagnostics, converged):
    raw, greedy = bellman_apply(model, V, W)
    alpha = float(raw[0])
    ratios = raw / V
    residual = float(np.max(np.abs(raw - alpha * V) / (alpha * V)))
    return SolveReport(
        alpha=alpha,
        rs_average_cost=math.log(alpha) / model.gamma,
        value=V,
        policy=greedy,
        threshold=_threshold_or_none(greedy),
        iterations=iterations,
        residual=residual,
        alpha_spread=float(ratios.max() - alpha),
        converged=converged,
        diagnostics=diagnostics,
    )


@dataclass
class SweepRow:
    C: float
    tau: Optional[int]
    alpha: float
    rs_average_cost: float
    iterations: int
    error: Optional[str] = None


@dataclass
class SweepResult:
    rows: List[SweepRow]
    monotone: bool
    violations: List[int]

    def check(self):
        """Raise :class:`PropertyViolation` if thresholds decrease somewhere along the grid."""
        if not self.monotone:
            pairs = [(self.rows[i].C, self.rows[i + 1].C) for i in self.violations]
            raise PropertyViolation(f"threshold decreases between costs {pairs}")
        return self


def sweep_cost(model_base, costs, opts=None):
    """Solve at each transmission cost in ``costs`` (strictly ascending, >= 0).

    A failed solve is recorded on its row and the sweep continues. The
    threshold column is checked to be non-decreasing; rows whose policy is
    not threshold-type also count as violations.
    """
    costs = [float(c) for c in costs]
    if any(c < 0 for c in costs) or any(b <= a for a, b in zip(costs, costs[1:])):
        raise DomainError("costs must be non-negative and strictly ascending")
    rows = []
    for C in costs:
        try:
            rep = rvi_solve(model_base.with_cost(C), opts)
        except RiskQError as exc:
            rows.append(SweepRow(C, None, math.nan, math.nan, 0, error=str(exc)))
            continue
        rows.append(SweepRow(C, rep.threshold, rep.alpha, rep.rs_average_cost, rep.iterations))

    violations = []
    for i, (a, b) in enumerate(zip(rows, rows[1:])):
        if a.error or b.error:
            continue
        if a.tau is None or b.tau is None or b.tau < a.tau:
            violations.append(i)
    return SweepResult(rows, not violations, violations)
