"""Closed-form evaluation of threshold policies and their optimality cost interval.

Under the threshold policy ``pi_tau`` the value function is ``alpha**i`` up
to state ``tau``. From ``tau - 1`` on it solves the second-order recursion

    alpha V(i) = exp(gamma C) (p exp(-gamma R) V(i-1) + (1-p) V(i+1)),

whose characteristic polynomial is
``(1-p) lam**2 - alpha exp(-gamma C) lam + p exp(-gamma R)``.
"""

import cmath
import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Union

import numpy as np

from .errors import DomainError, InconsistencyError, NumericError, PropertyViolation
from .linalg import power_iteration
from .model import differential

Number = Union[float, complex]

RESIDUAL_RTOL = 1e-8
IMAG_RTOL = 1e-9
BISECTION_MAX_STEPS = 200


@dataclass(frozen=True)
class CharRoots:
    lambda1: Number
    lambda2: Number
    discriminant: float

    @property
    def repeated(self):
        return self.lambda1 == self.lambda2


@dataclass
class AnalyticEval:
    """Value function and growth rate of ``pi_tau``.

    ``K1``/``K2`` multiply ``lambda1**j``/``lambda2**j``; for a repeated root
    they multiply ``lam**j`` and ``j * lam**j``. Both are ``None`` for
    ``tau = B + 1``. ``residual`` is the relative defect of the balance
    equation at state ``B``.
    """

    alpha: float
    tau: int
    value: np.ndarray
    K1: Optional[Number]
    K2: Optional[Number]
    roots: Optional[CharRoots]
    residual: float
    spectral_alpha: Optional[float] = None


def char_roots(alpha, model):
    """Roots of ``(1-p) lam**2 - alpha exp(-gamma C) lam + p exp(-gamma R) = 0``.

    ``lambda1`` takes the ``+`` branch. The smaller root comes from Vieta's
    product to avoid cancellation. A negative discriminant yields a
    conjugate pair of complex numbers.
    """
    if not alpha > 0:
        raise DomainError(f"alpha must be > 0, got {alpha}")
    a = 1.0 - model.p
    b = alpha * math.exp(-model.gamma * model.C)
    c = model.p * math.exp(-model.gamma * model.R)
    disc = b * b - 4.0 * a * c
    if disc == 0:
        lam = b / (2.0 * a)
        return CharRoots(lam, lam, disc)
    if disc > 0:
        lam1 = (b + math.sqrt(disc)) / (2.0 * a)
        return CharRoots(lam1, c / (a * lam1), disc)
    root = cmath.sqrt(disc)
    return CharRoots((b + root) / (2.0 * a), (b - root) / (2.0 * a), disc)


def _check_tau(model, tau, allow_never=False):
    hi = model.B + 1 if allow_never else model.B
    if isinstance(tau, bool) or int(tau) != tau or not 1 <= tau <= hi:
        raise DomainError(f"tau must be an integer in [1, {hi}], got {tau!r}")
    return int(tau)


def value_closed_form(alpha, model, tau):
    """Value function of ``pi_tau`` for a given growth rate ``alpha``, with ``V(0) = 1``.

    States ``0..tau`` get ``alpha**i``; states ``tau-1+j`` for
    ``j = 0..B-tau+1`` get ``K1 lambda1**j + K2 lambda2**j`` with
    ``K1 = alpha**(tau-1) (alpha - lambda2) / (lambda1 - lambda2)`` and
    ``K2 = alpha**(tau-1) (lambda1 - alpha) / (lambda1 - lambda2)``.
    The two pieces agree on the overlap ``{tau-1, tau}`` by construction.

    The returned ``residual`` is left at ``nan``; :func:`solve_alpha` fills it.
    """
    tau = _check_tau(model, tau)
    B = model.B
    roots = char_roots(alpha, model)
    lam1, lam2 = roots.lambda1, roots.lambda2
    base = alpha ** (tau - 1)
    j = np.arange(B - tau + 2)

    if roots.repeated:
        K1 = base
        K2 = alpha**tau / lam1 - base
        tail = (K1 + K2 * j) * lam1**j
    else:
        K1 = base * (alpha - lam2) / (lam1 - lam2)
        K2 = base * (lam1 - alpha) / (lam1 - lam2)
        tail = K1 * np.power(complex(lam1), j) + K2 * np.power(complex(lam2), j)
        if isinstance(lam1, float):
            tail = tail.real
        else:
            imag = np.abs(tail.imag)
            if np.any(imag > IMAG_RTOL * np.abs(tail)):
                raise NumericError(f"closed-form value keeps an imaginary part of {imag.max():.3e}")
            tail = tail.real

    V = np.empty(B + 1)
    V[: tau + 1] = alpha ** np.arange(tau + 1)
    V[tau + 1 :] = tail[2 : B - tau + 2]
    return AnalyticEval(alpha=alpha, tau=tau, value=V, K1=K1, K2=K2, roots=roots, residual=math.nan)


def _boundary_terms(alpha, model, V):
    g = model.gamma
    keep = (1.0 - model.p) * math.exp(g * (model.C + model.L))
    succ = model.p * math.exp(g * (model.C - model.R))
    B = model.B
    return (alpha - keep) * V[B], succ * V[B - 1], (alpha * V[B], keep * V[B], succ * V[B - 1])


def alpha_residual(alpha, model, tau):
    """Defect ``[alpha - (1-p) e^{gamma(C+L)}] V(B) - p e^{gamma(C-R)} V(B-1)`` of the last balance equation."""
    V = value_closed_form(alpha, model, tau).value
    lhs, rhs, _ = _boundary_terms(alpha, model, V)
    return float(lhs - rhs)


def relative_alpha_residual(alpha, model, tau, V=None):
    """:func:`alpha_residual` divided by the magnitude of its three terms."""
    if V is None:
        V = value_closed_form(alpha, model, tau).value
    lhs, rhs, terms = _boundary_terms(alpha, model, V)
    return float(abs(lhs - rhs) / sum(abs(t) for t in terms))


def threshold_matrix(model, tau):
    """Weight matrix of ``pi_tau`` written out from the balance equations directly.

    This assembly deliberately does not go through the transition kernel.
    """
    tau = _check_tau(model, tau, allow_never=True)
    B, p, g = model.B, model.p, model.gamma
    eC = math.exp(g * model.C)
    M = np.zeros((B + 1, B + 1))
    for i in range(B + 1):
        if i < tau:
            if i < B:
                M[i, i + 1] = 1.0
            else:
                M[B, B] = math.exp(g * model.L)
        else:
            M[i, i - 1] = eC * p * math.exp(-g * model.R)
            M[i, min(i + 1, B)] += eC * (1.0 - p) * (math.exp(g * model.L) if i == B else 1.0)
    return M


def solve_alpha(model, tau, max_iter=1_000_000):
    """Growth rate and value function of ``pi_tau``.

    ``alpha`` is the Perron root of :func:`threshold_matrix`, found by power
    iteration. It is then pushed through :func:`value_closed_form`, and the
    last balance equation must hold to ``1e-8`` relative. For ``tau = B + 1``
    the queue fills and pays ``L`` every step, so ``alpha = exp(gamma L)``.

    Raises
    ------
    NumericError
        Power iteration did not converge.
    InconsistencyError
        The closed form and the eigenvalue disagree.
    """
    tau = _check_tau(model, tau, allow_never=True)
    B = model.B
    if tau == B + 1:
        alpha = math.exp(model.gamma * model.L)
        V = alpha ** np.arange(B + 1)
        return AnalyticEval(alpha, tau, V, None, None, None, 0.0, spectral_alpha=alpha)

    alpha, _ = power_iteration(threshold_matrix(model, tau), max_iter=max_iter)
    ev = value_closed_form(alpha, model, tau)
    ev.residual = relative_alpha_residual(alpha, model, tau, ev.value)
    ev.spectral_alpha = alpha
    if not ev.residual < RESIDUAL_RTOL:
        raise InconsistencyError(
            f"closed form misses the boundary equation by {ev.residual:.3e} (relative) at tau={tau}"
        )
    return ev


def balance_residual(model, ev):
    """Largest relative defect of every balance equation ``alpha V(i) = (M V)(i)`` of ``pi_tau``.

    Each defect is scaled by the larger of ``alpha V(i)`` and the sum of the
    magnitudes of the right-hand terms.
    """
    V, a, tau, B = ev.value, ev.alpha, ev.tau, model.B
    g = model.gamma
    eC = math.exp(g * model.C)
    worst = 0.0
    for i in range(B + 1):
        up = V[i + 1] if i < B else math.exp(g * model.L) * V[B]
        if i < tau:
            rhs, scale = up, abs(up)
        else:
            t1 = eC * model.p * math.exp(-g * model.R) * V[i - 1]
            t2 = eC * (1.0 - model.p) * up
            rhs, scale = t1 + t2, abs(t1) + abs(t2)
        worst = max(worst, abs(a * V[i] - rhs) / max(scale, abs(a * V[i])))
    return float(worst)


def scan_alpha_roots(model, tau, lo, hi, n=2000):
    """Brackets ``(a, b)`` in ``[lo, hi]`` where :func:`alpha_residual` changes sign on a log grid."""
    grid = np.geomspace(lo, hi, n)
    vals = np.array([alpha_residual(a, model, tau) for a in grid])
    s = np.sign(vals)
    idx = np.flatnonzero(s[:-1] * s[1:] < 0)
    return [(float(grid[i]), float(grid[i + 1])) for i in idx]


def steady_differential(model, ev):
    """``J(n,0) - J(n,1)`` evaluated at the value function of ``ev``."""
    return differential(model, ev.value)


@dataclass
class CostInterval:
    """Transmission costs ``[c_lower, c_upper]`` for which ``pi_tau`` is optimal.

    ``lower_status`` is ``"bracketed"``, ``"zero-boundary"`` (the lower
    condition already holds at ``C = 0``) or ``"not-found"``;
    ``upper_status`` is ``"bracketed"``, ``"unbounded"`` (still optimal at
    ``search_max_C``) or ``"not-found"``. Unresolved ends are ``nan``/``inf``.
    """

    tau: int
    c_lower: float
    c_upper: float
    lower_status: str
    upper_status: str
    search_max_C: float
    lower_residual: float = math.nan
    upper_residual: float = math.nan
    magnitude_monotone: bool = True
    samples: List[tuple] = field(default_factory=list, repr=False)

    @property
    def finite(self):
        return math.isfinite(self.c_lower) and math.isfinite(self.c_upper)


def default_search_max_C(model):
    return max(10.0 * model.R, model.R + model.L + 1.0 / model.gamma)


def _boundary_profile(model_base, tau, C):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        m = model_base.with_cost(C)
    ev = solve_alpha(m, tau)
    return steady_differential(m, ev)


def cost_interval(model_base, tau, search_max_C=None, xtol=1e-12, n_samples=17):
    """Range of ``C`` over which ``pi_tau`` is optimal.

    ``C_l`` is the least ``C`` with ``dJ(tau-1; C) <= 0`` and ``C_u`` the
    greatest with ``dJ(tau; C) >= 0``, where ``dJ`` is the differential at
    the value function of ``pi_tau`` for cost ``C``. Both are found by
    bisection on ``[0, search_max_C]``.

    Bisection needs each sign condition to switch at most once. This is
    checked on ``n_samples`` evenly spaced costs plus every bisection probe,
    and a second switch raises :class:`PropertyViolation`. Whether the
    differentials also shrink in magnitude as ``C`` grows is recorded in
    ``magnitude_monotone`` but is not enforced.
    """
    tau = _check_tau(model_base, tau)
    if search_max_C is None:
        search_max_C = default_search_max_C(model_base)
    search_max_C = float(search_max_C)
    if not search_max_C > 0:
        raise DomainError("search_max_C must be > 0")
    _boundary_profile(model_base, tau, search_max_C)  # overflow guard

    cache = {}

    def profile(C):
        if C not in cache:
            cache[C] = _boundary_profile(model_base, tau, C)
        return cache[C]

    grid = list(np.linspace(0.0, search_max_C, n_samples))
    lower_ok = lambda C: profile(C)[tau - 1] <= 0  # noqa: E731
    upper_ok = lambda C: profile(C)[tau] >= 0  # noqa: E731

    def switch(pred):
        # bracket the first change of pred along the grid, then bisect it
        vals = [pred(C) for C in grid]
        k = next((i for i, v in enumerate(vals) if v != vals[0]), None)
        if k is None:
            return None
        lo, hi = grid[k - 1], grid[k]
        for _ in range(BISECTION_MAX_STEPS):
            if hi - lo <= xtol * max(1.0, hi):
                break
            mid = 0.5 * (lo + hi)
            if pred(mid) == vals[0]:
                lo = mid
            else:
                hi = mid
        return lo, hi

    if lower_ok(0.0):
        c_lower, lower_status = 0.0, "zero-boundary"
    else:
        br = switch(lower_ok)
        c_lower, lower_status = (br[1], "bracketed") if br else (math.inf, "not-found")

    if upper_ok(search_max_C):
        c_upper, upper_status = math.inf, "unbounded"
    elif not upper_ok(0.0):
        c_upper, upper_status = math.nan, "not-found"
    else:
        br = switch(upper_ok)
        c_upper, upper_status = (br[0], "bracketed") if br else (math.nan, "not-found")

    samples = sorted(cache.items())
    _check_single_switch([(C, prof[tau - 1] <= 0) for C, prof in samples], True, "dJ(tau-1) <= 0", tau)
    _check_single_switch([(C, prof[tau] >= 0) for C, prof in samples], False, "dJ(tau) >= 0", tau)
    mag_ok = all(
        np.all(b[1][[tau - 1, tau]] <= a[1][[tau - 1, tau]] + 1e-12 * np.max(np.abs(a[1])))
        for a, b in zip(samples, samples[1:])
    )

    out = CostInterval(
        tau=tau,
        c_lower=c_lower,
        c_upper=c_upper,
        lower_status=lower_status,
        upper_status=upper_status,
        search_max_C=search_max_C,
        magnitude_monotone=bool(mag_ok),
        samples=[(C, prof[tau - 1], prof[tau]) for C, prof in samples],
    )
    if lower_status == "bracketed":
        prof = profile(c_lower)
        out.lower_residual = float(abs(prof[tau - 1]) / np.max(np.abs(prof)))
    if upper_status == "bracketed":
        prof = profile(c_upper)
        out.upper_residual = float(abs(prof[tau]) / np.max(np.abs(prof)))
    return out


def _check_single_switch(flags, rising, label, tau):
    """``flags`` sorted by C; ``rising`` means the condition turns on once, else turns off once."""
    seq = [f for _, f in flags]
    if not rising:
        seq = [not f for f in seq]
    # must look like F...F T...T
    first_true = next((i for i, f in enumerate(seq) if f), len(seq))
    if not all(seq[first_true:]):
        bad = [flags[i][0] for i in range(first_true, len(seq)) if not seq[i]]
        raise PropertyViolation(f"condition {label} for tau={tau} switches more than once in C (at {bad[:5]})")
