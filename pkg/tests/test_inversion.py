import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from carsrecon.grid import FS, fs_to_au
from carsrecon.inversion import (BRANCH_FRACTION, SpectralSlice, discrete_kernel, invert_peak, peak_samples,
                                 recover_correlations, sinc_kernel, solve_kernel, sqrt_branch, strip_prefactor,
                                 trapezoid_weights, windowed_ft)
from carsrecon.synth import PulseConfig, SignalCube, prefactor, synth_closure, uniform_axis

TAU = uniform_axis(3.0, 1500.0, 1.0)
T_AX = np.array([0.0, 1.0])


def cube_of(rows, pulses=PulseConfig(), tau=TAU):
    rows = np.atleast_2d(rows)
    return SignalCube(np.arange(len(rows), dtype=float), tau, rows.astype(complex), pulses, "test")


def test_constant_row_transform():
    c = 2.0 - 1.0j
    step = 1.0 * FS
    lo, hi = fs_to_au(TAU[0]), fs_to_au(TAU[-1])
    half = 0.5 * (hi - lo)
    omega = np.linspace(-0.002, 0.002, 41)
    sl = windowed_ft(cube_of(np.full(len(TAU), c)), omega)
    want = c * 2 * half * np.exp(1j * omega * (lo + half)) * np.sinc(omega * half / np.pi)
    # trapezoid rule error for exp(i w tau): step^2 w^2 (b - a) / 12
    bound = abs(c) * step**2 * omega.max() ** 2 * 2 * half / 12 * 1.01 + 1e-9
    assert np.abs(sl.values[0] - want).max() < bound
    assert sl.half_width == pytest.approx(half)


@settings(max_examples=25, deadline=None)
@given(arrays(complex, (2, 50), elements=st.complex_numbers(max_magnitude=1, allow_nan=False)),
       st.complex_numbers(max_magnitude=3, allow_nan=False))
def test_transform_linear(rows, a):
    tau = uniform_axis(3.0, 52.0, 1.0)
    om = np.linspace(0.0, 0.01, 7)
    s1 = windowed_ft(cube_of(rows[0], tau=tau), om).values
    s2 = windowed_ft(cube_of(rows[1], tau=tau), om).values
    s12 = windowed_ft(cube_of(a * rows[0] + rows[1], tau=tau), om).values
    np.testing.assert_allclose(s12, a * s1 + s2, atol=1e-8)


def test_single_level_peak_location(li2):
    g = 7
    row = np.exp(-1j * li2.basis.shifted[g] * fs_to_au(TAU))
    om = np.linspace(0.0, li2.basis.shifted[12], 4001)
    sl = windowed_ft(cube_of(row), om)
    assert abs(om[np.argmax(np.abs(sl.values[0]))] - li2.basis.shifted[g]) <= om[1] - om[0]


def test_transform_rejects():
    with pytest.raises(ValueError):
        windowed_ft(cube_of(np.ones(len(TAU))), [np.nan])
    c = SignalCube(T_AX, TAU[:3], np.zeros((2, 2, 3), complex), PulseConfig(), "x", t43_axis=T_AX)
    with pytest.raises(ValueError):
        windowed_ft(c, [0.0])


def test_sinc_kernel_peak_and_zero(x_basis):
    p = PulseConfig(omega0=x_basis.omega0)
    T, lo = 30000.0, 100.0
    at = sinc_kernel(x_basis.shifted[4], 4, x_basis, T, lo, p, 2.0)
    assert abs(at) == pytest.approx(2 * T * 16e-12, rel=1e-12)
    zero = sinc_kernel(x_basis.shifted[4] + np.pi / T, 4, x_basis, T, lo, p, 2.0)
    assert abs(zero) < 1e-12 * abs(at)


def test_discrete_transform_follows_sinc_profile(x_basis):
    p = PulseConfig(omega0=x_basis.omega0)
    g = 5
    t_fs = 3.0
    row = prefactor(p, t_fs) * np.exp(-1j * x_basis.shifted[g] * fs_to_au(TAU))
    om = peak_samples(x_basis.shifted, g, 25)
    sl = windowed_ft(cube_of(row, p), om)
    want = sinc_kernel(om, g, x_basis, sl.half_width, sl.tau_min, p, t_fs)
    step = FS
    dmax = np.abs(om - x_basis.shifted[g]).max()
    bound = 16e-12 * step**2 * dmax**2 * 2 * sl.half_width / 12 * 1.01
    assert np.abs(sl.values[0] - want).max() < bound


def test_peak_samples_layout(x_basis):
    om = peak_samples(x_basis.shifted, 0, 25)
    assert len(om) == 25 and np.all(np.diff(om) > 0)
    assert om[12] == pytest.approx(0.0, abs=1e-15)
    assert om[-1] == pytest.approx(0.5 * x_basis.shifted[1])
    mid = peak_samples(x_basis.shifted, 10, 25)
    gap = min(x_basis.shifted[10] - x_basis.shifted[9], x_basis.shifted[11] - x_basis.shifted[10])
    assert mid[-1] - mid[0] == pytest.approx(gap)


def test_inversion_identity(li2):
    b = li2.basis
    rng = np.random.default_rng(3)
    known = rng.normal(size=(4, b.count)) + 1j * rng.normal(size=(4, b.count))
    for g in (0, 6, 24):
        om = peak_samples(b.shifted, g, b.count)
        tau = fs_to_au(TAU)
        w = trapezoid_weights(len(tau), FS)
        k = discrete_kernel(om, b.shifted, tau, w)
        sl = SpectralSlice(np.arange(4.0), om, (k @ known.T).T, tau, w)
        sol = invert_peak(sl, b, g)
        assert np.abs(sol.values - known[:, g]).max() < 1e-10 * np.abs(known).max()


def test_single_peak_cube_isolated(li2):
    b = li2.basis
    corr = np.zeros((2, b.count), complex)
    corr[:, 9] = [0.3, 0.5j]
    cube = synth_closure(b, corr, li2.pulses, T_AX, TAU)
    rec = recover_correlations(cube, b)
    others = np.delete(rec.squared, 9, axis=1)
    assert np.abs(others).max() < 1e-8
    np.testing.assert_allclose(rec.squared[:, 9], corr[:, 9] ** 2, atol=1e-8)


def test_recovered_squares_match_oracle(li2):
    sq = li2.corr.squared
    ref = li2.exact**2
    assert np.all(np.abs(sq - ref).max(axis=0) < 1e-3 * np.abs(ref).max(axis=0))


def test_condition_is_recorded(li2, caplog):
    assert li2.corr.conditions.shape == (25,)
    assert np.all(li2.corr.conditions > 1e8)
    with caplog.at_level(logging.DEBUG, logger="carsrecon.inversion"):
        sl = windowed_ft(li2.cube, peak_samples(li2.basis.shifted, 3, 25))
        sol = invert_peak(sl, li2.basis, 3)
    assert sol.regularized and sol.rank < 25
    assert any("truncated SVD" in r.message for r in caplog.records)


def test_well_conditioned_solve_is_plain():
    a = np.array([[2.0, 0.0], [0.0, 1.0]])
    x, cond, rank, reg = solve_kernel(a, np.array([[2.0], [3.0]]))
    assert not reg and rank == 2 and cond == pytest.approx(2.0)
    np.testing.assert_allclose(x[:, 0], [1.0, 3.0])


def test_invert_peak_shape_checks(li2):
    sl = windowed_ft(li2.cube, peak_samples(li2.basis.shifted, 3, 10))
    with pytest.raises(ValueError, match="square"):
        invert_peak(sl, li2.basis, 3)
    sl = windowed_ft(li2.cube, peak_samples(li2.basis.shifted, 3, 25))
    with pytest.raises(ValueError):
        invert_peak(sl, li2.basis, 25)


def test_strip_prefactor_ground_start(li2):
    assert li2.corr.squared[0, 0] == pytest.approx(1.0, abs=1e-9)
    p = PulseConfig()
    assert abs(strip_prefactor(1.0, p, 0.0)) == pytest.approx(1e12 / 16, rel=1e-12)


def test_stripped_phase_has_no_drift(li2):
    g = 2
    ref = li2.exact[:, g] ** 2
    ok = np.abs(ref) > 0.1 * np.abs(ref).max()
    phase = np.angle(li2.corr.squared[ok, g] / ref[ok])
    assert np.abs(phase).max() < 1e-6


def test_branch_of_pure_phase():
    t = np.linspace(0.0, 30.0, 600)
    r, conf = sqrt_branch(np.exp(-2j * 0.7 * t))
    sign = r[0] / np.exp(0.0)
    np.testing.assert_allclose(r, sign * np.exp(-0.7j * t), atol=1e-12)
    assert conf.all()


def test_branch_of_constant():
    r, _ = sqrt_branch(np.full(10, 4.0 + 0j))
    np.testing.assert_allclose(r, 2.0)


def test_branch_recovers_oracle(li2):
    c = li2.exact[:, 5]
    r, _ = sqrt_branch(c**2)
    dev = min(np.abs(r - c).max(), np.abs(r + c).max())
    assert dev < 1e-3


def test_branch_confidence_threshold():
    q = np.array([1.0, 0.5e-6, 2e-6, 1.0], complex)
    _, conf = sqrt_branch(q)
    assert BRANCH_FRACTION**2 == pytest.approx(1e-6)
    assert conf.tolist() == [True, False, True, True]
    assert sqrt_branch(np.zeros(0))[0].size == 0


@given(arrays(complex, st.integers(1, 60), elements=st.complex_numbers(max_magnitude=1e3, allow_nan=False,
                                                                       allow_infinity=False)))
def test_branch_squares_back(q):
    r, _ = sqrt_branch(q)
    np.testing.assert_allclose(r**2, q, rtol=1e-12, atol=1e-12)
    assert r[0].real >= 0


def test_recovered_magnitudes_bounded(li2, dli2):
    for s in (li2, dli2):
        assert np.abs(s.corr.values).max() <= 1 + 1e-6
        np.testing.assert_allclose(np.abs(s.corr.values[0]), np.eye(s.basis.count)[0], atol=1e-4)


def test_round_trip_within_tolerance(li2):
    a = li2.oracle
    dev = np.abs(li2.corr.values - a * li2.exact).max(axis=0)
    assert np.all(dev < 1e-3 * np.abs(li2.exact).max(axis=0))


def test_truncated_set(li2):
    t = li2.corr.truncated(20)
    assert t.count == 20 and t.conditions.shape == (20,) and t.squared.shape[1] == 20
