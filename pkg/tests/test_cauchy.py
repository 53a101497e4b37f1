import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperwave.cauchy import (
    BlowUp,
    analytic_norms,
    compare_generic_vs_tuned,
    energy,
    evolve,
    initial_from_seed,
    lifetime_run,
    step,
)
from hyperwave.genericity import LinearSeed

PELL = LinearSeed([(1,)], [1.0], 2)


def test_linear_flow_is_exact_travelling_wave():
    st0 = initial_from_seed(PELL, 0.0)
    T = 3.7
    out = evolve(st0, T, 0.1)
    x = 2 * np.pi * np.arange(st0.M) / st0.M
    np.testing.assert_allclose(out.v(), np.cos(x - math.sqrt(2) * T), atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.1, 5.0))
def test_linear_flow_is_modewise_isometry(rng_seed, T):
    st0 = initial_from_seed(LinearSeed([(2,)], [0.5], 2), 0.0, perturbation=1.0,
                            rng_seed=rng_seed)
    out = evolve(st0, T, 0.05)
    before = np.abs(st0.v_hat) ** 2 + np.abs(st0.w_hat) ** 2
    after = np.abs(out.v_hat) ** 2 + np.abs(out.w_hat) ** 2
    np.testing.assert_allclose(after, before, atol=1e-15)


def test_second_order_convergence():
    st0 = initial_from_seed(PELL, 0.5, M=32)
    ref = evolve(st0, 1.0, 1 / 1600)
    errs = [np.abs(evolve(st0, 1.0, dt).v_hat - ref.v_hat).max() for dt in (0.05, 0.025, 0.0125)]
    ratios = [errs[i] / errs[i + 1] for i in range(2)]
    assert all(3.6 < r < 4.4 for r in ratios)


def test_time_reversal():
    st0 = initial_from_seed(LinearSeed([(1,), (3,)], [1.0, 0.5], 2), 0.3, perturbation=0.5)
    back = evolve(evolve(st0, 5.0, 0.01), -5.0, 0.01)
    assert np.abs(back.v_hat - st0.v_hat).max() < 1e-11
    assert np.abs(back.w_hat - st0.w_hat).max() < 1e-11


def test_energy_and_symmetry():
    st0 = initial_from_seed(PELL, 0.2, perturbation=0.3)
    out = evolve(st0, 10.0, 0.005)
    assert abs(energy(out) - energy(st0)) / energy(st0) < 1e-5
    assert out.symmetry_defect() < 1e-13


def test_blowup_detected():
    st0 = initial_from_seed(PELL, 0.1)
    bad = replace(st0, w_hat=st0.w_hat * np.nan)
    with pytest.raises(BlowUp):
        step(bad, 0.01)
    with pytest.raises(ValueError):
        step(st0, 0.0)


def test_initial_data_checks():
    st0 = initial_from_seed(PELL, 0.01, perturbation=1.0)
    clean = initial_from_seed(PELL, 0.01)
    size = np.abs(st0.v_hat - clean.v_hat).sum() + np.abs(st0.w_hat - clean.w_hat).sum()
    assert size == pytest.approx(0.01)
    nv, nw = analytic_norms(clean, 0.5)
    assert nv == pytest.approx(math.exp(0.5)) and nw == pytest.approx(math.exp(0.5))
    with pytest.raises(ValueError):
        initial_from_seed(LinearSeed([(30,)], [1.0], 2), 0.1)


def test_two_dimensional_lifetime_and_comparison():
    seed2 = LinearSeed([(1, 2)], [1.0], 2)
    rep = lifetime_run(initial_from_seed(seed2, 0.05, M=16), A=1.0, checkpoints=20)
    assert rep.passed and rep.T == pytest.approx(20.0)
    assert rep.to_csv().splitlines()[0] == "t,norm_v,norm_vt,excess,energy_drift"
    tuned = LinearSeed([(2, 2)], [1.0], 2)
    table = compare_generic_vs_tuned([(seed2, {"generic": True}), (tuned, {"generic": False})],
                                     0.05, 1.0, M=16, checkpoints=10)
    assert [r["certificate_generic"] for r in table] == [True, False]
    assert all(r["blowup_time"] is None for r in table)
