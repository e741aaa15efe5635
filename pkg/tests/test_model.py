import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from riskq.errors import DomainError, ParameterRangeError
from riskq.model import (
    ModelParams,
    bellman_apply,
    corrupted_kernel,
    differential,
    embed_continuous,
    q_factors,
    transition_kernel,
    weight_matrices,
)

models = st.builds(
    ModelParams,
    B=st.integers(1, 8),
    p=st.floats(0.01, 0.99),
    C=st.floats(0.01, 3),
    R=st.floats(0.01, 3),
    L=st.floats(0.01, 3),
    gamma=st.sampled_from([0.1, 0.5, 1.0, 2.0]),
)


@pytest.mark.parametrize("lam,mu,p", [(1, 1, 0.5), (1, 3, 0.75), (3, 1, 0.25)])
def test_embed_continuous(lam, mu, p):
    assert embed_continuous(lam, mu) == p
    assert ModelParams.from_rates(lam, mu, B=2, C=1, R=1, L=1, gamma=1).p == p


@pytest.mark.parametrize(
    "kw",
    [dict(B=0), dict(p=0.0), dict(p=1.0), dict(gamma=0.0), dict(C=-1.0), dict(R=-0.1), dict(L=math.nan)],
)
def test_invalid_params(kw):
    base = dict(B=3, p=0.5, C=1.0, R=1.0, L=1.0, gamma=1.0)
    base.update(kw)
    with pytest.raises(DomainError):
        ModelParams(**base)


def test_overflow_guard():
    with pytest.raises(ParameterRangeError):
        ModelParams(B=2, p=0.5, C=400.0, R=1.0, L=400.0, gamma=1.0)


def test_zero_cost_warns():
    with pytest.warns(UserWarning):
        ModelParams(B=2, p=0.5, C=0.0, R=1.0, L=1.0, gamma=1.0)


def test_kernel_examples(desk):
    p, C, R, L = desk.p, desk.C, desk.R, desk.L
    assert sorted(transition_kernel(desk, 1, 1)) == sorted([(0, p, C - R), (2, 1 - p, C)])
    assert list(transition_kernel(desk, 3, 0)) == [(3, 1.0, L)]
    assert list(transition_kernel(desk, 0, 0)) == [(1, 1.0, 0.0)]
    assert list(transition_kernel(desk, 0, 1)) == [(1, 1.0, C)]
    assert sorted(transition_kernel(desk, 3, 1)) == sorted([(2, p, C - R), (3, 1 - p, C + L)])


@settings(max_examples=50, deadline=None)
@given(models)
def test_kernel_rows_sum_to_one(m):
    for i in m.states:
        for u in (0, 1):
            assert abs(sum(e.probability for e in transition_kernel(m, i, u)) - 1.0) <= 1e-15


def test_kernel_rejects_bad_state(desk):
    with pytest.raises(DomainError):
        transition_kernel(desk, 4, 0)
    with pytest.raises(DomainError):
        transition_kernel(desk, 0, 2)


def test_corrupted_kernel_is_scoped(desk):
    with corrupted_kernel(0.05):
        assert sum(e.probability for e in transition_kernel(desk, 1, 1)) == pytest.approx(1.05)
    assert sum(e.probability for e in transition_kernel(desk, 1, 1)) == pytest.approx(1.0)


def test_q_factors_at_unit_value(desk):
    g, p, C, R, L = desk.gamma, desk.p, desk.C, desk.R, desk.L
    V = np.ones(desk.n_states)
    J0, J1 = q_factors(desk, V, 1)
    assert J0 == pytest.approx(1.0)
    assert J1 == pytest.approx(p * math.exp(g * (C - R)) + (1 - p) * math.exp(g * C))
    assert q_factors(desk, V, 0) == pytest.approx((1.0, math.exp(g * C)))
    J0, J1 = q_factors(desk, V, 3)
    assert J0 == pytest.approx(math.exp(g * L))
    assert J1 == pytest.approx(p * math.exp(g * (C - R)) + (1 - p) * math.exp(g * (C + L)))


def test_bellman_apply_examples(desk):
    raw, greedy = bellman_apply(desk, np.ones(4))
    assert raw[0] == 1.0 and greedy[0] == 0
    # interior transmit pays off when the expected weight is below 1
    assert desk.p * math.exp(desk.gamma * (desk.C - desk.R)) + (1 - desk.p) * math.exp(desk.gamma * desk.C) < 1
    assert greedy[1] == 1 and greedy[2] == 1


def test_bellman_tie_goes_to_idle(quiet):
    m = ModelParams(B=2, p=0.5, C=0.0, R=0.0, L=0.0, gamma=1.0)
    raw, greedy = bellman_apply(m, np.ones(3))
    assert np.all(raw == 1.0)
    assert np.all(greedy == 0)


def test_differential_at_unit_value(desk):
    g, p, C, R, L = desk.gamma, desk.p, desk.C, desk.R, desk.L
    d = differential(desk, np.ones(4))
    interior = 1 - (1 - p) * math.exp(g * C) - p * math.exp(g * (C - R))
    assert d[0] == pytest.approx(1 - math.exp(g * C))
    assert d[1] == pytest.approx(interior) and d[2] == pytest.approx(interior)
    assert d[3] == pytest.approx((1 - (1 - p) * math.exp(g * C)) * math.exp(g * L) - p * math.exp(g * (C - R)))


def test_differential_hand_value():
    m = ModelParams(B=2, p=0.5, C=math.log(2), R=1.0, L=1.0, gamma=1.0)
    assert differential(m, np.ones(3))[0] == pytest.approx(-1.0, abs=1e-15)


def test_differential_zero_costs(quiet):
    m = ModelParams(B=3, p=0.3, C=0.0, R=0.0, L=0.0, gamma=1.5)
    assert np.max(np.abs(differential(m, np.ones(4)))) <= 1e-15


@settings(max_examples=50, deadline=None)
@given(models, st.integers(0, 2**32 - 1))
def test_differential_matches_q_factors(m, seed):
    V = np.random.default_rng(seed).uniform(0.1, 10.0, m.n_states)
    d = differential(m, V)
    q = np.array([np.subtract(*q_factors(m, V, i)) for i in m.states])
    assert np.allclose(d, q, rtol=1e-12, atol=1e-12 * np.max(np.abs(q)))


@settings(max_examples=30, deadline=None)
@given(models)
def test_weight_matrices_from_kernel(m):
    W = weight_matrices(m)
    for u in (0, 1):
        for i in m.states:
            row = np.zeros(m.n_states)
            for j, prob, cost in transition_kernel(m, i, u):
                row[j] += prob * math.exp(m.gamma * cost)
            assert np.allclose(W[u, i], row, rtol=1e-15)


def test_value_must_be_positive(desk):
    with pytest.raises(DomainError):
        differential(desk, np.array([1.0, 0.0, 1.0, 1.0]))
    with pytest.raises(DomainError):
        bellman_apply(desk, np.ones(3))


def test_with_cost_keeps_other_fields(desk):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        m = desk.with_cost(2.5)
    assert (m.B, m.p, m.R, m.L, m.gamma, m.C) == (3, 0.75, 1.0, 2.0, 1.0, 2.5)
