import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from landauer.bounds import (BoundParams, NChoice, binary_entropy, binary_relative_entropy,
                             compute_M, compute_N, compute_N_full, constraint_residual,
                             deltaQ_bound_check, finite_size_bound, golden_section_min,
                             lower_bound_chain, n_value, relent_floor_check,
                             theorem2_negative_branch)
from landauer.quantum import QState, random_state

from oracles import kl_scalar, n_grid

# max over r of the N objective on a 1e-6 grid (oracles.n_grid)
N_FROZEN = {2: 0.4392288398891684, 3: 0.761802237687667, 4: 1.0234905543857855,
            16: 2.7187251564704615, 1024: 12.982648484109617}

# brute-force r-grid minimization with bisection on the constraint (oracles.m_bruteforce)
M_FROZEN = [
    (math.log(2), 16, 0.09784083303081687),
    (0.3, 2, 0.13731308926250324),
    (-0.3, 2, 0.08530327602389762),
    (0.5, 4, 0.14968838521286124),
    (-1.0, 4, 0.4031855612057664),
    (1.0, 16, 0.21586805578908175),
    (-2.0, 16, 0.6588985642029187),
    (0.01, 3, 6.592308054321778e-05),
]


# --- binary quantities ---

def test_binary_entropy_values():
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(1.0) == 0.0
    assert binary_entropy(0.5) == pytest.approx(math.log(2), abs=1e-15)


@settings(max_examples=50)
@given(s=st.floats(0, 1))
def test_binary_entropy_symmetric_and_bounded(s):
    assert binary_entropy(s) == pytest.approx(binary_entropy(1 - s), abs=1e-12)
    assert 0 <= binary_entropy(s) <= math.log(2) + 1e-15


def test_binary_relative_entropy_oracle():
    assert binary_relative_entropy(0.3, 0.6) == pytest.approx(kl_scalar([0.3, 0.7], [0.6, 0.4]),
                                                              abs=1e-14)


def test_binary_relative_entropy_self_and_infinite():
    assert binary_relative_entropy(0.4, 0.4) == 0.0
    assert binary_relative_entropy(0.2, 0.0) == math.inf
    assert binary_relative_entropy(0.0, 0.0) == 0.0
    assert binary_relative_entropy(0.3, 1.0) == math.inf


def test_binary_functions_reject_out_of_range():
    with pytest.raises(ValueError):
        binary_entropy(1.5)
    with pytest.raises(ValueError):
        binary_relative_entropy(0.5, -0.1)


# --- golden section ---

def test_golden_section_finds_quadratic_minimum():
    x, f = golden_section_min(lambda t: (t - 0.3) ** 2 + 1, 0.0, 1.0, tol=1e-12)
    assert x == pytest.approx(0.3, abs=1e-6)
    assert f == pytest.approx(1.0, abs=1e-12)


def test_golden_section_boundary_minimum():
    x, _ = golden_section_min(lambda t: t, 2.0, 5.0, tol=1e-10)
    assert x == pytest.approx(2.0, abs=1e-8)


# --- N(d) ---

@pytest.mark.parametrize("d", sorted(N_FROZEN))
def test_N_matches_grid_oracle(d):
    assert compute_N(d) == pytest.approx(N_FROZEN[d], abs=1e-6)


def test_N2_grid_oracle_live():
    assert compute_N(2) == pytest.approx(n_grid(2), abs=1e-6)
    assert compute_N(2) < 1


def test_N_optimizer_is_stationary():
    opt = compute_N_full(16)
    assert 0 < opt.r_star < 0.5
    assert opt.residual < 1e-8


def test_N_below_closed_form_bounds():
    ds = np.arange(2, 1025)
    vals = np.array([compute_N(int(d)) for d in ds])
    assert np.all(vals < 0.25 * np.log(ds - 1) ** 2 + 1)
    assert np.all(vals < np.log(ds) ** 2)


def test_N_minus_quarter_log2_bounded():
    ds = 2 ** np.arange(1, 11)
    excess = [compute_N(int(d)) - 0.25 * math.log(d) ** 2 for d in ds]
    # empirical constant over d in {2, ..., 1024}
    assert max(abs(e) for e in excess) < 1.0


def test_N_rejects_small_d():
    with pytest.raises(ValueError):
        compute_N(1)


@pytest.mark.parametrize("d", [2, 5, 16, 300])
def test_all_N_choices_dominate_exact(d):
    exact = n_value(d, NChoice.EXACT)
    for choice in NChoice:
        assert n_value(d, choice) >= exact


def test_bound_params_resolves_N():
    assert BoundParams(16).N == compute_N(16)
    assert BoundParams(16, NChoice.LOG2_D).N == pytest.approx(math.log(16) ** 2)
    assert BoundParams(16, "quarter_log2_plus_1").N == pytest.approx(0.25 * math.log(15) ** 2 + 1)


# --- M(x, d) ---

@pytest.mark.parametrize("x,d,expected", M_FROZEN)
def test_M_matches_bruteforce_oracle(x, d, expected):
    assert compute_M(x, d).value == pytest.approx(expected, abs=1e-9)


@pytest.mark.parametrize("d", [2, 4, 16])
def test_M_anchor_values(d):
    assert compute_M(0.0, d).value == 0.0
    assert compute_M(-math.log(d), d).value == pytest.approx(math.log(d), abs=1e-8)
    assert compute_M(math.log(d), d).value == math.inf


def test_M_diverges_near_log_d():
    ld = math.log(16)
    vals = [compute_M(ld - 10.0**-j, 16).value for j in range(2, 9)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert vals[2] > 10
    assert compute_M(ld - 1e-10, 16).value == math.inf


def test_M_rejects_out_of_domain():
    with pytest.raises(ValueError):
        compute_M(math.log(4) + 0.1, 4)
    with pytest.raises(ValueError):
        compute_M(0.1, 1)


@pytest.mark.parametrize("d", [2, 3, 16])
def test_M_above_exp_bound(d):
    N = compute_N(d)
    ld = math.log(d)
    for x in np.linspace(-ld, 0.95 * ld, 41):
        exp_bound = lower_bound_chain(float(x), N)[0]
        assert compute_M(float(x), d).value >= exp_bound - 1e-10


def test_M_small_x_asymptotics():
    x = 1e-3
    assert compute_M(x, 2).value * 2 * compute_N(2) / x**2 == pytest.approx(1.0, rel=0.01)


@pytest.mark.parametrize("d", [2, 4, 16])
def test_M_monotone_and_convex(d):
    ld = math.log(d)
    xs = np.linspace(-ld, 0.9 * ld, 121)
    vals = np.array([compute_M(float(x), d).value for x in xs])
    diffs = np.diff(vals)
    mids = 0.5 * (xs[1:] + xs[:-1])
    assert np.all(diffs[mids < -1e-12] < 0)
    assert np.all(diffs[mids > 1e-12] > 0)
    assert np.min(np.diff(vals, 2)) >= -1e-9


@settings(max_examples=40, deadline=None)
@given(u=st.floats(-1, 0.99), d=st.sampled_from([2, 3, 5, 16]))
def test_M_optimizer_feasible(u, d):
    opt = compute_M(u * math.log(d), d)
    top = (d - 1) / d
    assert 0 <= opt.s_star <= top and 0 <= opt.r_star <= top
    assert constraint_residual(opt, d) <= 1e-9
    assert opt.value == pytest.approx(binary_relative_entropy(opt.s_star, opt.r_star), abs=1e-10)


# --- lower-bound chain ---

def test_chain_at_zero():
    assert lower_bound_chain(0.0, 1.0) == (0.0, 0.0, 0.0)


def test_chain_ordering_on_grid():
    for x in np.linspace(-3, 3, 61):
        exp_b, cubic, quad = lower_bound_chain(float(x), 1.0)
        assert exp_b >= cubic - 1e-14 >= -1e-14
        if x >= 0:
            assert cubic >= quad


def test_chain_exp_bound_convex():
    xs = np.linspace(-3, 3, 121)
    vals = np.array([lower_bound_chain(float(x), 1.3)[0] for x in xs])
    assert np.min(np.diff(vals, 2)) >= 0


def test_chain_requires_positive_N():
    with pytest.raises(ValueError):
        lower_bound_chain(0.1, 0.0)


# --- lower bound on heat ---

def test_finite_size_bound_zero():
    assert finite_size_bound(0.0, BoundParams(16)) == 0.0


def test_finite_size_bound_m_branch_beats_quadratic():
    p = BoundParams(16)
    x = math.log(2)
    val = finite_size_bound(x, p)
    assert val == pytest.approx(x + compute_M(x, 16).value, abs=1e-12)
    assert val > x + x**2 / (2 * p.N)


def test_finite_size_bound_negative_branch_closed_form():
    p = BoundParams(16)
    N, x = p.N, -math.log(16)
    val = finite_size_bound(x, p)
    assert val == pytest.approx(N - math.sqrt(N * N + 2 * N * math.log(16)), abs=1e-12)
    assert x < val < 0


@settings(max_examples=50)
@given(u=st.floats(-2, 1), d=st.sampled_from([2, 3, 8, 16]))
def test_finite_size_bound_above_landauer(u, d):
    x = u * math.log(d)
    assert finite_size_bound(x, BoundParams(d)) >= x - 1e-12


def test_negative_branch_decreases_with_N():
    vals = [theorem2_negative_branch(-1.0, N) for N in (0.5, 1, 2, 4, 8)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_negative_branch_stable_for_tiny_dS():
    assert theorem2_negative_branch(-1e-12, 3.0) == pytest.approx(-1e-12, rel=1e-9)


def test_finite_size_bound_d1_warns():
    with pytest.warns(RuntimeWarning):
        assert finite_size_bound(0.3, BoundParams(1)) == 0.0


def test_finite_size_bound_out_of_range():
    with pytest.raises(ValueError):
        finite_size_bound(2 * math.log(4) + 0.5 * math.log(4), BoundParams(4))


# --- upper bound on reservoir entropy change ---

def test_theorem3_trivial_point():
    chk = deltaQ_bound_check(0.0, 0.0, 4)
    assert chk.applicable and chk.holds and chk.margin == 0.0


def test_theorem3_rhs_arithmetic():
    chk = deltaQ_bound_check(-1.0, -0.5, 4)
    assert chk.margin == pytest.approx(-0.5 - 0.125 / compute_N(4) + 1.0, abs=1e-14)


def test_theorem3_not_applicable_for_positive_heat():
    chk = deltaQ_bound_check(0.1, 0.2, 4)
    assert not chk.applicable and math.isnan(chk.margin)


# --- relative-entropy floor ---

def test_relent_floor_equal_states():
    s = random_state(3, seed=2)
    assert relent_floor_check(s, s) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("d", [2, 3, 4, 8])
def test_relent_floor_random_pairs(d):
    margins = [relent_floor_check(random_state(d, seed=1000 * d + i),
                                  random_state(d, seed=1000 * d + i + 500)) for i in range(100)]
    assert min(margins) >= -1e-8


def test_relent_floor_tight_on_binary_pair():
    x = 0.5
    opt = compute_M(x, 4)
    spec = lambda t: [1 - t, t / 3, t / 3, t / 3]  # noqa: E731
    m = relent_floor_check(QState.from_spectrum(spec(opt.s_star)), QState.from_spectrum(spec(opt.r_star)))
    assert abs(m) <= 1e-6
