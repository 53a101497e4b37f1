import numpy as np
import pytest
import scipy.linalg as la
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperwave.characteristics import Box, connected_components, enumerate_characteristics
from hyperwave.genericity import LinearSeed, build_gamma
from hyperwave.operator import (
    SchurWindowError,
    analyticity_window,
    assemble_A0,
    assemble_FprimeN,
    block_gap,
    block_gap_fraction,
    jacobian_kernel,
    restrict_PA0P,
    schur_eigenvalues,
    schur_reduce,
    smallest_singular_value,
    truncated_gap,
)

PELL = LinearSeed([(1,)], [1.0], 2)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.01, 2.0))
def test_pell_A0_closed_form(a):
    A0 = assemble_A0(PELL.with_amplitudes([a]))
    assert set(A0.support()) == {(-2, 2), (0, 0), (2, -2)}
    assert A0[(0, 0)] == pytest.approx(2 * a * a)
    assert A0[(-2, 2)] == pytest.approx(a * a) and A0[(2, -2)] == pytest.approx(a * a)


@pytest.mark.parametrize("p", [2, 3, 4])
def test_jacobian_kernel_is_scaled_A0(p):
    seed = LinearSeed([(1,), (2,)], [0.3, 0.2], p)
    u = seed.series()
    K = jacobian_kernel(u, u.conj_reflect(), p)
    assert K.max_abs_diff(assemble_A0(seed).scale((p + 1) / 2 ** (p + 1))) < 1e-15


def test_pell_blocks():
    a = 0.4
    seed = PELL.with_amplitudes([a])
    cs = enumerate_characteristics(seed, Box(30, 45))
    blocks = restrict_PA0P(assemble_A0(seed), cs)
    pair = [b for b in blocks if b.rows == [((-1, 1), 0), ((1, -1), 1)]]
    assert len(pair) == 1
    np.testing.assert_allclose(pair[0].matrix, a * a * np.array([[2, 1], [1, 2]]))
    for b in blocks:
        if b.matrix.shape == (1, 1):
            assert b.matrix[0, 0] == pytest.approx(2 * a * a)
    rep = block_gap(blocks, 0.1, a, 2)
    assert rep.inverse_norm == pytest.approx(1 / (a * a))  # smallest singular value a^2
    assert rep.passed


@pytest.mark.parametrize("sites", [[(1,)], [(1,), (2,)], [(1, 0), (0, 2)]])
def test_blocks_coincide_with_gamma_components(sites):
    seed = LinearSeed(sites, [0.5] * len(sites), 2)
    cs = enumerate_characteristics(seed, Box(10, 30))
    blocks = restrict_PA0P(assemble_A0(seed), cs)
    comps = connected_components(cs, build_gamma(seed)).components
    assert sorted(sorted({x for x, _ in b.rows}) for b in blocks) == sorted(comps)


def test_singular_block_reported():
    rep = block_gap([np.array([[1.0, 1.0], [1.0, 1.0]]), np.eye(1)], 0.1, 1.0, 2)
    assert rep.inverse_norm == np.inf and not rep.passed
    assert rep.to_dict()["inverse_norm"] == "inf"


def test_operator_hermitian_and_divisors():
    op = assemble_FprimeN(PELL.with_amplitudes([0.01]), N=3, j_radius=10)
    S = op.symmetrized().toarray()
    assert np.abs(S - S.conj().T).max() == 0
    Pc = ~op.P
    assert np.abs(op.diag[Pc]).min() == pytest.approx(0.11953506150162507, rel=1e-12)
    assert np.all(op.diag[op.exact_zero] == 0) and op.exact_zero.sum() == op.P.sum()


def test_schur_window_error():
    M = np.diag([0.0, 1.0])
    P = np.array([True, False])
    with pytest.raises(SchurWindowError):
        schur_reduce(M, 1.0, P)
    np.testing.assert_allclose(schur_reduce(M, 0.2, P), [[-0.2]])


def test_schur_toy():
    M = np.array([[0.1, 0.05], [0.05, 0.1]])
    # 0.1 - 0.05^2 / 0.1 = 0.075
    np.testing.assert_allclose(schur_reduce(M, 0.0, [True, False]), [[0.075]])


def test_schur_nonsymmetric_branch():
    rng = np.random.default_rng(3)
    ev = np.array([-0.3, 0.05, 0.2, 4.0, -5.0, 6.0])
    S = np.eye(6) + 0.05 * rng.standard_normal((6, 6))
    M = S @ np.diag(ev) @ la.inv(S)
    P = np.array([True, True, True, False, False, False])
    w = analyticity_window(M, P)
    roots = schur_eigenvalues(M, P)
    inside = np.sort(ev[np.abs(ev) < w])
    np.testing.assert_allclose(np.sort(roots), inside, atol=1e-8)


def test_smallest_singular_value_iterative_path():
    rng = np.random.default_rng(0)
    A = sp.random(300, 300, density=0.02, random_state=1) + sp.diags(rng.uniform(1, 3, 300))
    exact = la.svdvals(A.toarray())[-1]
    assert smallest_singular_value(A, dense_limit=10) == pytest.approx(exact, rel=1e-6)


def test_gap_passes_and_smallness_guard():
    op = assemble_FprimeN(PELL.with_amplitudes([0.01]), N=3, j_radius=10)
    rep = truncated_gap(op, 0.01, 0.1)
    assert rep.passed and rep.inverse_norm < rep.bound
    assert rep.pa0p.passed and len(rep.exact_zero_rows) == op.P.sum()
    with pytest.raises(ValueError, match="smallness"):
        truncated_gap(op, 0.05, 0.1)


def test_block_gap_fraction_monotone_two_sites():
    seed = LinearSeed([(1,), (2,)], [0.01, 0.01], 2)
    eps = (1.0, 0.3, 0.01)
    frac = block_gap_fraction(seed, eps, 400, rng_seed=1, box=Box(12, 30))
    vals = [frac[e] for e in eps]
    assert 0 < vals[0] < 1  # a large epsilon excludes a visible fraction
    assert vals[0] <= vals[1] <= vals[2] == 1.0
    with pytest.raises(ValueError):
        block_gap_fraction(LinearSeed([(1,)], [1.0], 3), [0.1], 10)
