import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import brute_force_gronwall, ml_reference
from hadamard_fde import (
    CauchyProblem,
    ConvergenceError,
    DomainError,
    FractionalOrder,
    GronwallInput,
    LogGrid,
    PerturbationSpec,
    ShapeError,
    epsilon_ml_bound,
    gronwall_series_bound,
    hadamard_dependence_envelope,
    hilfer_dependence_envelope,
)
from hadamard_fde.bounds import dependence_envelope_samples, perturbation_forcing
from hadamard_fde.rhs import LinearRhs

E = math.e


def base_problem(alpha=0.9, beta=0.0, x_a=1.0, lipschitz=1.0, b=E):
    return CauchyProblem(FractionalOrder.of(alpha, beta), 1.0, b, (x_a,), LinearRhs(lipschitz), lipschitz)


# ---------------------------------------------------------------- Gronwall

def test_zero_forcing_gives_zero_bound():
    g = LogGrid(1.0, E, 65)
    out = gronwall_series_bound(GronwallInput(g, np.zeros(65), np.full(65, 2.0), 0.6))
    assert np.all(out.values == 0.0)


@pytest.mark.parametrize("alpha, c, psi0", [(0.3, 1.0, 0.5), (0.5, 2.5, 1.3), (0.8, 1.0, 0.5),
                                            (1.0, 2.5, 1.3), (1.6, 1.0, 0.5), (1.6, 2.5, 1.3)])
def test_constant_inputs_give_mittag_leffler(alpha, c, psi0):
    g = LogGrid(1.0, E, 257)
    out = gronwall_series_bound(GronwallInput(g, np.full(257, c), np.full(257, psi0), alpha)).values
    scale = psi0 * math.gamma(alpha)
    expected = np.array([c * ml_reference(alpha, 1.0, scale * v ** alpha) for v in g.u_values])
    np.testing.assert_allclose(out, expected, rtol=1e-6)


def test_classical_gronwall_at_unit_order():
    g = LogGrid(2.0, 9.0, 129)
    out = gronwall_series_bound(GronwallInput(g, np.full(129, 3.0), np.full(129, 0.7), 1.0)).values
    np.testing.assert_allclose(out, 3.0 * (g.t_values / 2.0) ** 0.7, rtol=1e-10)


def test_singular_forcing_in_weighted_form():
    # u = s^{-0.3}: sum_k c^k Gamma(0.7)/Gamma(0.7 + k a) s^{k a - 0.3}
    alpha, psi0 = 0.6, 0.8
    g = LogGrid(1.0, E, 513)
    u_w = np.ones(513)
    out = gronwall_series_bound(GronwallInput(g, u_w, np.full(513, psi0), alpha, mu=0.3))
    assert out.mu == 0.3
    scale = psi0 * math.gamma(alpha)
    expected = np.array([math.gamma(0.7) * ml_reference(alpha, 0.7, scale * v ** alpha) for v in g.u_values])
    # higher powers integrate a source ~ s^0.3, which the product rule resolves to O(h^1.3) near a
    np.testing.assert_allclose(out.values, expected, rtol=5e-4)


@pytest.mark.parametrize("alpha", [0.5, 1.0])
def test_constant_bound_dominates_brute_force(alpha):
    g = LogGrid(1.0, E, 257)
    u = np.full(257, 1.5)
    psi = np.full(257, 0.8)
    bound = gronwall_series_bound(GronwallInput(g, u, psi, alpha)).values
    v = brute_force_gronwall(u, psi, alpha, g.u_values)
    # equality case: the two agree up to the brute-force quadrature error,
    # which is largest (about 1e-3) next to a
    assert np.all(bound >= v * (1 - 1e-6))
    np.testing.assert_allclose(bound, v, rtol=2e-3)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.5, 1.0), st.floats(0.0, 2.0), st.floats(0.0, 1.5), st.floats(0.1, 4.0))
def test_bound_dominates_brute_force_for_varying_inputs(alpha, amp, slope, freq):
    g = LogGrid(1.0, E, 129)
    s = g.u_values
    u = 1.0 + amp * np.sin(freq * s) ** 2
    psi = 0.3 + slope * s
    bound = gronwall_series_bound(GronwallInput(g, u, psi, alpha)).values
    v = brute_force_gronwall(u, psi, alpha, s)
    assert np.all(bound >= v * (1 - 1e-6))


def test_gronwall_input_validation():
    g = LogGrid(1.0, E, 9)
    with pytest.raises(ShapeError):
        GronwallInput(g, np.ones(8), 1.0, 0.5)
    with pytest.raises(DomainError):
        GronwallInput(g, -np.ones(9), 1.0, 0.5)
    with pytest.raises(DomainError):
        GronwallInput(g, np.ones(9), np.linspace(1.0, 0.0, 9), 0.5)
    with pytest.raises(DomainError):
        GronwallInput(g, np.ones(9), 1.0, 0.0)


def test_series_cap_is_enforced():
    g = LogGrid(1.0, E ** 4, 33)
    with pytest.raises(ConvergenceError):
        gronwall_series_bound(GronwallInput(g, np.ones(33), np.full(33, 50.0), 0.5, series_cap=10))


# ---------------------------------------------------------------- dependence envelopes

def test_spec_validation():
    base = base_problem()
    with pytest.raises(DomainError):
        PerturbationSpec(-0.1, 0.0, base, 1.0)
    with pytest.raises(DomainError):
        PerturbationSpec(0.9, 0.0, base, 1.0)
    with pytest.raises(DomainError):
        PerturbationSpec(0.1, 0.0, base, -1.0)
    with pytest.raises(DomainError):
        PerturbationSpec(0.1, 0.0, base, 1.0, horizon=0.5)
    two = CauchyProblem(FractionalOrder.of(1.5, 0.5), 1.0, E, (1.0, 0.0), LinearRhs(1.0), 1.0)
    with pytest.raises(DomainError):
        PerturbationSpec(0.1, 0.0, two, 1.0)


@pytest.mark.parametrize("t", [1.2, 2.0, E])
def test_identical_problems_give_zero_envelope(t):
    s = PerturbationSpec(0.0, 0.0, base_problem(), phi_sup=3.0)
    assert hadamard_dependence_envelope(s, t) <= 1e-12
    assert hilfer_dependence_envelope(s, FractionalOrder.of(0.9, 0.6), t) <= 1e-12


def test_initial_gap_only_forcing():
    alpha, eps = 0.9, 0.2
    s = PerturbationSpec(0.0, eps, base_problem(alpha), phi_sup=3.0)
    u = LogGrid(1.0, E, 17).u_values
    forcing, mu = perturbation_forcing(s, 0.0, u)
    assert mu == pytest.approx(1.0 - alpha)
    # weighted form of |eps| u^{alpha-1}/Gamma(alpha) is constant
    np.testing.assert_allclose(forcing, eps / math.gamma(alpha), rtol=1e-12)


@pytest.mark.parametrize("L", [0.5, 1.0, 2.0])
def test_initial_gap_envelope_equals_epsilon_bound(L):
    alpha, eps = 0.9, -0.05
    s = PerturbationSpec(0.0, eps, base_problem(alpha, lipschitz=L), phi_sup=1.0)
    for t in (1.5, E):
        env = hadamard_dependence_envelope(s, t)
        ref = epsilon_ml_bound(FractionalOrder.of(alpha, 0.0), L, eps, 1.0, t)
        # the series for the envelope runs through the quadrature, the bound does not
        assert env == pytest.approx(ref, rel=1e-5)


def test_beta_zero_hilfer_envelope_is_hadamard_envelope():
    s = PerturbationSpec(0.1, 0.02, base_problem(0.9), phi_sup=2.0)
    for t in (1.3, 2.2, E):
        assert hilfer_dependence_envelope(s, FractionalOrder.of(0.9, 0.0), t) == \
            hadamard_dependence_envelope(s, t)


def test_envelope_rejects_t_outside_interval():
    s = PerturbationSpec(0.1, 0.0, base_problem(), phi_sup=1.0)
    with pytest.raises(DomainError):
        hadamard_dependence_envelope(s, 1.0)
    with pytest.raises(DomainError):
        hadamard_dependence_envelope(s, 3.0)
    with pytest.raises(DomainError):
        hilfer_dependence_envelope(s, FractionalOrder.of(0.8, 0.0), 2.0)


def test_envelope_grid_must_fit_horizon():
    s = PerturbationSpec(0.1, 0.0, base_problem(), phi_sup=1.0, horizon=2.0)
    with pytest.raises(DomainError):
        dependence_envelope_samples(s, LogGrid(1.0, E, 33))


def _envelope(beta, delta, eps, L, phi_sup, t):
    s = PerturbationSpec(delta, eps, base_problem(0.9, beta, lipschitz=L), phi_sup=phi_sup)
    return hilfer_dependence_envelope(s, FractionalOrder.of(0.9, beta), t, nodes=129)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(0.0, 0.3), st.floats(-0.3, 0.3), st.floats(0.1, 2.0), st.floats(0.0, 3.0),
       st.floats(1.05, E))
def test_envelope_monotone_in_lipschitz_and_sup(beta, delta, eps, L, phi_sup, t):
    ref = _envelope(beta, delta, eps, L, phi_sup, t)
    slack = 1e-12 * max(1.0, ref)
    assert _envelope(beta, delta, eps, L * 1.5, phi_sup, t) >= ref - slack
    assert _envelope(beta, delta, eps, L, phi_sup * 1.5 + 0.1, t) >= ref - slack


@settings(max_examples=20, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(0.0, 0.3), st.floats(0.1, 2.0), st.floats(0.0, 3.0), st.floats(1.05, E))
def test_envelope_monotone_in_delta_without_initial_shift(beta, delta, L, phi_sup, t):
    ref = _envelope(beta, delta, 0.0, L, phi_sup, t)
    grown = _envelope(beta, min(delta * 1.5 + 0.01, 0.85), 0.0, L, phi_sup, t)
    assert grown >= ref - 1e-12 * max(1.0, ref)


def test_envelope_can_shrink_with_delta_when_initial_value_moves():
    # |1.25 u^(g'-1)/Gamma(g') - u^(g-1)/Gamma(g)| dips below 0.25 u^(g-1)/Gamma(g)
    # at u = log 2 when the order drops from 0.9 to 0.89
    u = math.log(2.0)
    first_0 = 0.25 * u ** -0.1 / math.gamma(0.9)
    first_1 = abs(1.25 * u ** -0.11 / math.gamma(0.89) - u ** -0.1 / math.gamma(0.9))
    assert first_1 < first_0
    assert _envelope(0.0, 0.01, 0.25, 0.25, 0.0, 2.0) < _envelope(0.0, 0.0, 0.25, 0.25, 0.0, 2.0)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(0.0, 0.3), st.floats(0.1, 2.0), st.floats(0.0, 3.0), st.floats(1.05, E))
def test_envelope_monotone_in_epsilon_without_order_change(beta, eps, L, phi_sup, t):
    ref = _envelope(beta, 0.0, eps, L, phi_sup, t)
    assert _envelope(beta, 0.0, eps * 1.5 + 0.01, L, phi_sup, t) >= ref * (1 - 1e-12)
    assert _envelope(beta, 0.0, -eps, L, phi_sup, t) == pytest.approx(ref, rel=1e-12, abs=1e-15)


# ---------------------------------------------------------------- epsilon bound

def test_epsilon_bound_examples():
    ord_ = FractionalOrder.of(0.5, 1.0)
    assert epsilon_ml_bound(ord_, 1.0, 0.0, 1.0, E) == 0.0
    value = epsilon_ml_bound(ord_, 1.0, 0.01, 1.0, E)
    assert value == pytest.approx(0.01 * ml_reference(0.5, 1.0, 1.0), rel=1e-13)
    assert value == pytest.approx(0.0500898, abs=5e-8)


@pytest.mark.parametrize("beta", [0.0, 0.3, 0.8])
def test_epsilon_bound_weighted_limit_at_a(beta):
    ord_ = FractionalOrder.of(0.7, beta)
    t = math.exp(1e-12)
    weighted = epsilon_ml_bound(ord_, 2.0, -0.3, 1.0, t) * math.log(t) ** (1.0 - ord_.gamma_val)
    assert weighted == pytest.approx(0.3 / math.gamma(ord_.gamma_val), rel=1e-6)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 3.0), st.floats(-1.0, 1.0), st.floats(1.01, 20.0))
def test_epsilon_bound_classical_case(L, eps, t):
    got = epsilon_ml_bound(FractionalOrder.of(1.0, 1.0), L, eps, 1.0, t)
    assert FractionalOrder.of(1.0, 0.3).gamma_val == 1.0
    assert got == pytest.approx(abs(eps) * math.exp(L * math.log(t)), rel=1e-10, abs=1e-300)


def test_epsilon_bound_rejects_bad_arguments():
    with pytest.raises(DomainError):
        epsilon_ml_bound(FractionalOrder.of(0.5, 1.0), 1.0, 0.1, 2.0, 1.0)
    with pytest.raises(DomainError):
        epsilon_ml_bound(FractionalOrder.of(1.5, 1.0), 1.0, 0.1, 1.0, 2.0)
