import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from isowaves.core import DomainError
from isowaves.hamlab import (BlowUpError, FieldState, HamModel, ModelKind, PeriodicGrid,
                             StratificationError, ZeroModeError, expected_frequency,
                             functional_derivative_check, hamiltonian, integrate,
                             measure_frequency, plane_wave_state, random_smooth_state, rhs)

TWO_PI = 2 * math.pi
KINDS = list(ModelKind)


def grid_for(kind, n=16):
    shape = (n, n, n) if kind.internal else (n, n)
    return PeriodicGrid(shape, (TWO_PI,) * len(shape))


def test_zero_state_has_zero_energy():
    for kind in KINDS:
        g = grid_for(kind, 8)
        assert hamiltonian(FieldState.zeros(g), HamModel(kind)) == 0.0


def test_cosine_energy_is_area_over_four():
    g = PeriodicGrid((32, 32), (TWO_PI, TWO_PI))
    X, _ = g.mesh()
    st_ = FieldState(g, np.cos(X), np.zeros(g.shape))
    assert hamiltonian(st_, HamModel("LinearSW")) == pytest.approx(math.pi ** 2, rel=1e-14)


def test_kinetic_energy_of_potential_flow():
    g = PeriodicGrid((32, 32), (TWO_PI, TWO_PI))
    X, _ = g.mesh()
    # |grad phi|^2 = sin^2 x, so H = 1/2 * 4 pi^2 / 2
    st_ = FieldState(g, np.zeros(g.shape), np.cos(X))
    assert hamiltonian(st_, HamModel("LinearSW")) == pytest.approx(math.pi ** 2, rel=1e-14)


@pytest.mark.parametrize("kind", KINDS, ids=lambda k: k.value)
def test_tendencies_are_hamiltonian_gradient(kind):
    rng = np.random.default_rng(3)
    g = grid_for(kind, 12)
    m = HamModel(kind)
    for _ in range(3):
        s = random_smooth_state(g, 0.05, rng)
        d = random_smooth_state(g, 1.0, rng)
        assert functional_derivative_check(s, m, d) < 1e-6


def test_layered_stratification_gradient():
    rng = np.random.default_rng(5)
    g = grid_for(ModelKind.RotatingInternalWaves, 12)
    m = HamModel("RotatingInternalWaves", pi0_profile=lambda r: -1.0 - 0.3 * np.sin(r))
    s = random_smooth_state(g, 0.05, rng)
    d = random_smooth_state(g, 1.0, rng)
    assert functional_derivative_check(s, m, d) < 1e-6


@pytest.mark.parametrize("kind", KINDS, ids=lambda k: k.value)
def test_plane_wave_frequency(kind):
    if kind.internal:
        g, mode = PeriodicGrid((16, 16, 16), (TWO_PI,) * 3), (1, 2, 1)
    else:
        g, mode = PeriodicGrid((32, 32), (TWO_PI,) * 2), (1, 2)
    measured, expected = measure_frequency(HamModel(kind), g, mode)
    assert measured == pytest.approx(expected, rel=1e-2)


def test_expected_frequency_values():
    g = PeriodicGrid((16, 16), (TWO_PI, TWO_PI))
    assert expected_frequency(HamModel("LinearSW"), g, (3, 4)) == pytest.approx(5.0)
    assert expected_frequency(HamModel("RotatingLinearSW", f=2.0), g, (0, 0)) == pytest.approx(2.0)
    g3 = PeriodicGrid((8, 8, 8), (TWO_PI,) * 3)
    # c k / m with c = g / (N rho0) = 1
    assert expected_frequency(HamModel("InternalWaves"), g3, (3, 4, 1)) == pytest.approx(5.0)


@pytest.mark.parametrize("kind", [ModelKind.LinearSW, ModelKind.RotatingLinearSW],
                         ids=lambda k: k.value)
def test_midpoint_conserves_linear_energy(kind):
    rng = np.random.default_rng(0)
    g = grid_for(kind, 16)
    s = random_smooth_state(g, 0.01, rng)
    tr = integrate(s, HamModel(kind), 0.05, 2000, scheme="midpoint", energy_every=100)
    assert tr.max_relative_drift < 1e-10


@pytest.mark.parametrize("kind", KINDS, ids=lambda k: k.value)
def test_rk4_energy_drift_small(kind):
    rng = np.random.default_rng(1)
    g = grid_for(kind, 12 if kind.internal else 16)
    s = random_smooth_state(g, 0.01, rng)
    tr = integrate(s, HamModel(kind), 0.01, 200, energy_every=20)
    assert tr.max_relative_drift < 1e-6


def test_nonlinear_midpoint_energy():
    rng = np.random.default_rng(2)
    g = grid_for(ModelKind.NonlinearSW, 16)
    s = random_smooth_state(g, 0.01, rng)
    # the cubic part of H is only conserved to second order in dt
    drifts = [integrate(s, HamModel("NonlinearSW"), dt, n, scheme="midpoint").max_relative_drift
              for dt, n in ((0.05, 40), (0.025, 80))]
    assert drifts[0] < 1e-4
    assert 3.0 < drifts[0] / drifts[1] < 5.0


def test_rk4_fourth_order():
    rng = np.random.default_rng(4)
    g = grid_for(ModelKind.RotatingNonlinearSW, 16)
    m = HamModel("RotatingNonlinearSW")
    s = random_smooth_state(g, 0.05, rng)
    T = 1.0
    ref = integrate(s, m, T / 400, 400, energy_every=0).final
    errs = []
    for n in (25, 50):
        fin = integrate(s, m, T / n, n, energy_every=0).final
        errs.append(max(np.max(np.abs(fin.eta - ref.eta)), np.max(np.abs(fin.phi - ref.phi))))
    assert 12 < errs[0] / errs[1] < 20


def test_snapshots_and_records():
    g = PeriodicGrid((8, 8), (TWO_PI, TWO_PI))
    s = plane_wave_state(g, (1, 0), 1e-3)
    tr = integrate(s, HamModel("LinearSW"), 0.1, 10, snapshot_every=5, record=lambda x: 1.0)
    assert len(tr.snapshots) == 3
    assert tr.records.shape == (11,)
    assert tr.times[-1] == pytest.approx(1.0)


def test_blow_up_raises():
    g = PeriodicGrid((8, 8), (TWO_PI, TWO_PI))
    bad = np.zeros(g.shape)
    bad[0, 0] = np.nan
    with pytest.raises(BlowUpError):
        rhs(FieldState(g, bad, np.zeros(g.shape)), HamModel("LinearSW"))


def test_negative_thickness_raises():
    g = PeriodicGrid((8, 8), (TWO_PI, TWO_PI))
    X, _ = g.mesh()
    s = FieldState(g, 1.5 * np.cos(X), np.zeros(g.shape))
    with pytest.raises(StratificationError):
        hamiltonian(s, HamModel("NonlinearSW"))
    # the linear model has no such constraint
    hamiltonian(s, HamModel("LinearSW"))


def test_stratification_sign_change_raises():
    g = PeriodicGrid((8, 8, 8), (TWO_PI,) * 3)
    X = g.mesh()[0]
    s = FieldState(g, 2.0 * np.cos(X), np.zeros(g.shape))
    with pytest.raises(StratificationError):
        rhs(s, HamModel("InternalWaves"))
    with pytest.raises(StratificationError):
        HamModel("InternalWaves", pi0_profile=lambda r: np.sin(r)).h0(g)


def test_nonzero_mean_with_rotation_raises():
    g = PeriodicGrid((8, 8), (TWO_PI, TWO_PI))
    s = FieldState(g, np.full(g.shape, 0.1), np.zeros(g.shape))
    with pytest.raises(ZeroModeError):
        rhs(s, HamModel("RotatingLinearSW"))
    rhs(s, HamModel("LinearSW"))


@pytest.mark.parametrize("shape,lengths", [((8,), (1.0,)), ((7, 8), (1.0, 1.0)), ((2, 8), (1.0, 1.0)),
                                           ((8, 8), (1.0, 0.0)), ((8, 8), (1.0,))])
def test_grid_validation(shape, lengths):
    with pytest.raises(DomainError):
        PeriodicGrid(shape, lengths)


def test_model_validation():
    with pytest.raises(DomainError):
        HamModel("LinearSW", f=1.0)
    with pytest.raises(DomainError):
        HamModel("RotatingLinearSW", f=-1.0)
    with pytest.raises(DomainError):
        HamModel("InternalWaves", N=0.0)
    with pytest.raises(DomainError):
        HamModel("LinearSW", pi0_profile=lambda r: -r)
    assert HamModel("RotatingLinearSW").f == 1.0
    assert HamModel("RotatingInternalWaves").f == 0.5
    with pytest.raises(DomainError):
        hamiltonian(FieldState.zeros(PeriodicGrid((8, 8), (1, 1))), HamModel("InternalWaves"))


def test_field_state_shape_checked():
    g = PeriodicGrid((8, 8), (1, 1))
    with pytest.raises(DomainError):
        FieldState(g, np.zeros((8, 4)), np.zeros((8, 8)))


def test_integrate_argument_checks():
    g = PeriodicGrid((8, 8), (1, 1))
    s = FieldState.zeros(g)
    m = HamModel("LinearSW")
    for kw in ({"dt": 0.0, "steps": 1}, {"dt": 0.1, "steps": -1}, {"dt": 0.1, "steps": 1, "scheme": "euler"}):
        with pytest.raises(DomainError):
            integrate(s, m, **kw)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.1, 10.0), st.integers(0, 2**31 - 1))
def test_linear_energy_quadratic_in_amplitude(scale, seed):
    g = PeriodicGrid((8, 8), (TWO_PI, TWO_PI))
    s = random_smooth_state(g, 0.1, np.random.default_rng(seed))
    m = HamModel("RotatingLinearSW")
    assert hamiltonian(s.scaled(scale), m) == pytest.approx(scale ** 2 * hamiltonian(s, m), rel=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_random_state_is_mean_free(seed):
    g = PeriodicGrid((8, 8, 8), (TWO_PI,) * 3)
    s = random_smooth_state(g, 0.3, np.random.default_rng(seed))
    assert np.max(np.abs(s.eta)) == pytest.approx(0.3)
    assert np.max(np.abs(np.mean(s.eta, axis=(0, 1)))) < 1e-15
