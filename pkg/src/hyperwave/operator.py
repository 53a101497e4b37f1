"""Doubled linearized operator F' = D' + A on truncated lattice boxes.

Rows are indexed by (point, component) with component 0 the ``u`` row and 1
the ``conj u`` row.  The projection ``P`` keeps u-rows on ``C_+`` and conj-rows
on ``C_-``; there the diagonal of ``D'`` vanishes exactly at ``omega0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.optimize import brentq
from scipy.sparse.csgraph import connected_components as _cc

from .characteristics import (
    Box,
    CharacteristicSet,
    DiophantineProfile,
    diophantine_profile,
    enumerate_characteristics,
    spatial_shells,
    time_indices,
)
from .genericity import LinearSeed
from .lattice import SpectralCoeffs, convolution_power, convolve

__all__ = [
    "Block",
    "GapReport",
    "OperatorBox",
    "TruncatedGapReport",
    "SchurWindowError",
    "assemble_A0",
    "jacobian_kernel",
    "restrict_PA0P",
    "block_gap",
    "block_gap_fraction",
    "assemble_FprimeN",
    "assemble_on_points",
    "schur_reduce",
    "coupling_norm",
    "analyticity_window",
    "schur_eigenvalues",
    "smallest_singular_value",
    "truncated_gap",
]


class SchurWindowError(ValueError):
    """lambda is too close to the spectrum of the complement block."""

    def __init__(self, msg, condition):
        super().__init__(msg)
        self.condition = condition


def assemble_A0(seed: LinearSeed, amplitudes=None) -> SpectralCoeffs:
    """Convolution kernel ``(u0 + conj u0)^{*p}`` shared by all four blocks of A0."""
    return convolution_power(seed.real_series(amplitudes), seed.p)


def jacobian_kernel(u: SpectralCoeffs, ubar: SpectralCoeffs, p: int,
                    H_terms=()) -> SpectralCoeffs:
    """Kernel of d/du (and d/d conj u) of the nonlinear term at ``(u, ubar)``.

    The nonlinearity is ``v^{*(p+1)} + sum_m alpha_m * v^{*(p+m)}`` with
    ``v = (u + ubar)/2``, so the kernel is
    ``(p+1)/2 v^{*p} + sum_m (p+m)/2 alpha_m * v^{*(p+m-1)}``.
    """
    v = (u + ubar).scale(0.5)
    if len(v) == 0:
        return SpectralCoeffs(u.dims, {})
    out = convolution_power(v, p).scale((p + 1) / 2)
    for m, alpha in H_terms:
        deg = p + m - 1
        term = convolve(alpha, convolution_power(v, deg)) if deg >= 1 else alpha
        out = out + term.scale((p + m) / 2)
    return out


@dataclass
class Block:
    rows: list  # (point, component) labels
    matrix: np.ndarray


def _p_rows(cs: CharacteristicSet) -> list:
    return sorted([(x, 0) for x in cs.plus] + [(x, 1) for x in cs.minus])


def restrict_PA0P(A0: SpectralCoeffs, cs: CharacteristicSet) -> list[Block]:
    """Connected diagonal blocks of the principal submatrix of A0 on the P rows."""
    rows = _p_rows(cs)
    if not rows:
        return []
    pts = {}
    for i, (x, c) in enumerate(rows):
        pts.setdefault(x, []).append(i)
    edges_r, edges_c = [], []
    for i, (x, _) in enumerate(rows):
        for delta in A0:
            y = tuple(a - g for a, g in zip(x, delta))
            for k in pts.get(y, ()):
                edges_r.append(i)
                edges_c.append(k)
    n = len(rows)
    graph = sp.coo_matrix((np.ones(len(edges_r)), (edges_r, edges_c)), shape=(n, n))
    _, labels = _cc(graph, directed=False)
    groups: dict[int, list] = {}
    for i, lab in enumerate(labels):
        groups.setdefault(int(lab), []).append(i)
    blocks = []
    for members in sorted(groups.values(), key=lambda g: rows[g[0]]):
        labs = [rows[i] for i in members]
        mat = np.zeros((len(labs), len(labs)), dtype=complex)
        for a, (x, _) in enumerate(labs):
            for c, (y, _) in enumerate(labs):
                mat[a, c] = A0[tuple(s - t for s, t in zip(x, y))]
        if np.all(mat.imag == 0):
            mat = mat.real
        blocks.append(Block(labs, mat))
    return blocks


@dataclass
class GapReport:
    inverse_norm: float
    bound: float
    epsilon: float
    a_inf: float
    passed: bool
    table: list = field(default_factory=list)
    singular: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"inverse_norm": _jsonable(self.inverse_norm), "bound": _jsonable(self.bound),
                "epsilon": self.epsilon, "a_inf": self.a_inf, "pass": self.passed,
                "table": self.table,
                "singular": [[[list(x), c] for x, c in rows] for rows in self.singular]}


def _jsonable(x):
    return x if np.isfinite(x) else "inf"


def _inv_norm_dense(mat: np.ndarray) -> float:
    s = la.svdvals(mat)
    smin = s[-1]
    if smin <= s[0] * 1e-15 or smin == 0:
        return np.inf
    return 1.0 / smin


def block_gap(blocks, epsilon: float, a_inf: float, p: int) -> GapReport:
    """Max inverse 2-norm over blocks against ``(epsilon a_inf^p)^-1``."""
    bound = 1.0 / (epsilon * a_inf ** p)
    worst = 0.0
    table, singular = [], []
    for blk in blocks:
        mat = blk.matrix if isinstance(blk, Block) else np.asarray(blk)
        inv = _inv_norm_dense(mat)
        s = la.svdvals(mat)
        cond = np.inf if not np.isfinite(inv) else float(s[0] * inv)
        table.append({"size": int(mat.shape[0]), "inverse_norm": _jsonable(float(inv)),
                      "condition": _jsonable(cond)})
        if not np.isfinite(inv) and isinstance(blk, Block):
            singular.append(blk.rows)
        worst = max(worst, inv)
    return GapReport(float(worst), bound, epsilon, a_inf, bool(worst <= bound), table, singular)


def block_gap_fraction(seed: LinearSeed, epsilons, samples: int, rng_seed: int = 0,
                       box: Box = Box(30, 45), a_inf: float | None = None) -> dict:
    """Pass fraction of the PA0P gap over uniformly sampled amplitudes, per epsilon.

    The same amplitude samples are used for every epsilon, so the fractions are
    monotone in epsilon by construction of the test.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if seed.p % 2:
        raise ValueError("the PA0P gap estimate assumes even p")
    a_inf = seed.delta if a_inf is None else a_inf
    cs = enumerate_characteristics(seed, box)
    structure = restrict_PA0P(assemble_A0(seed), cs)
    pattern = []
    for blk in structure:
        labs = blk.rows
        diffs = [[tuple(s - t for s, t in zip(x, y)) for (y, _) in labs] for (x, _) in labs]
        pattern.append(diffs)
    rng = np.random.default_rng(rng_seed)
    epsilons = list(epsilons)
    passes = np.zeros(len(epsilons), dtype=int)
    for _ in range(samples):
        # (0, a_inf]: flip the half-open end of uniform's [0, a_inf)
        a = a_inf - rng.uniform(0.0, a_inf, size=seed.b)
        K = convolution_power(seed.real_series(a), seed.p)
        worst = 0.0
        for diffs in pattern:
            mat = np.array([[K[dlt] for dlt in row] for row in diffs])
            worst = max(worst, _inv_norm_dense(mat))
        amax = float(np.max(a))
        for i, eps in enumerate(epsilons):
            if worst <= 1.0 / (eps * amax ** seed.p):
                passes[i] += 1
    return {eps: float(passes[i] / samples) for i, eps in enumerate(epsilons)}


@dataclass
class OperatorBox:
    """Truncated doubled operator ``F'_N = D' + diag(w) conv``."""

    seed: LinearSeed
    points: list
    diag: np.ndarray
    weights: np.ndarray
    conv: sp.csr_matrix
    P: np.ndarray
    exact_zero: np.ndarray
    omega: np.ndarray
    N: int
    box: Box

    @property
    def size(self) -> int:
        return 2 * len(self.points)

    def row_label(self, r: int):
        npts = len(self.points)
        return self.points[r % npts], int(r // npts)

    def matrix(self) -> sp.csr_matrix:
        return (sp.diags(self.diag) + sp.diags(self.weights) @ self.conv).tocsr()

    def dense(self) -> np.ndarray:
        return self.matrix().toarray()

    def symmetrized(self) -> sp.csr_matrix:
        """``D F'``: Hermitian when the linearization point is real-representing."""
        return (sp.diags(self.diag / self.weights) + self.conv).tocsr()


def assemble_on_points(pts, b: int, omega_vec, K: SpectralCoeffs):
    """Diagonal, row weights and doubled convolution matrix of F' on a point list."""
    npts = len(pts)
    index = {x: i for i, x in enumerate(pts)}
    nom = np.array([np.dot(x[:b], omega_vec) for x in pts])
    root = np.array([np.sqrt(sum(c * c for c in x[b:]) + 1.0) for x in pts])
    diag = np.concatenate([nom + root, -nom + root])
    weights = np.concatenate([1.0 / root, 1.0 / root])
    rows, cols, vals = [], [], []
    kitems = list(K.items())
    for i, x in enumerate(pts):
        for dlt, val in kitems:
            k = index.get(tuple(a - g for a, g in zip(x, dlt)))
            if k is not None:
                rows.append(i)
                cols.append(k)
                vals.append(complex(val))
    rows = np.array(rows, dtype=int)
    cols = np.array(cols, dtype=int)
    vals = np.array(vals, dtype=complex)
    if np.all(vals.imag == 0):
        vals = vals.real
    R = np.concatenate([rows, rows, rows + npts, rows + npts])
    C = np.concatenate([cols, cols + npts, cols, cols + npts])
    V = np.concatenate([vals] * 4)
    conv = sp.csr_matrix((V, (R, C)), shape=(2 * npts, 2 * npts))
    return diag, weights, conv


def assemble_FprimeN(seed: LinearSeed, omega=None, N: int = 3, j_radius: int = 10,
                     H_terms=(), u: SpectralCoeffs | None = None,
                     ubar: SpectralCoeffs | None = None) -> OperatorBox:
    """Assemble ``F'`` at ``(u, ubar)`` (the seed by default) on ``|n|_1 <= N, |j|_inf <= j_radius``."""
    b, d = seed.dims
    omega_vec = seed.omega0_float if omega is None else np.asarray(omega, dtype=float)
    if omega_vec.shape != (b,):
        raise ValueError(f"omega must have {b} entries, got shape {omega_vec.shape}")
    if u is None:
        u = seed.series()
    if ubar is None:
        ubar = u.conj_reflect()
    if u.dims != seed.dims or ubar.dims != seed.dims:
        raise ValueError("linearization point dims do not match the seed")
    for m, alpha in H_terms:
        if alpha.dims != seed.dims:
            raise ValueError(f"H term m={m} has dims {alpha.dims}, expected {seed.dims}")
    box = Box(N, j_radius)
    js = [j for shell in spatial_shells(d, j_radius).values() for j in shell]
    pts = sorted(n + j for n in time_indices(b, N) for j in js)
    npts = len(pts)
    index = {x: i for i, x in enumerate(pts)}
    K = jacobian_kernel(u, ubar, seed.p, H_terms)
    diag, weights, conv = assemble_on_points(pts, b, omega_vec, K)
    cs = enumerate_characteristics(seed, box)
    P = np.zeros(2 * npts, dtype=bool)
    for x in cs.plus:
        P[index[x]] = True
    for x in cs.minus:
        P[npts + index[x]] = True
    at_omega0 = omega is None or np.array_equal(omega_vec, seed.omega0_float)
    exact_zero = P.copy() if at_omega0 else np.zeros_like(P)
    if at_omega0:
        diag[exact_zero] = 0.0
    return OperatorBox(seed, pts, diag, weights, conv, P, exact_zero, omega_vec, N, box)


def _split(M, P):
    P = np.asarray(P, dtype=bool)
    Pc = ~P
    return M[np.ix_(P, P)], M[np.ix_(P, Pc)], M[np.ix_(Pc, P)], M[np.ix_(Pc, Pc)]


def _as_dense(op, P):
    if isinstance(op, OperatorBox):
        return op.dense(), op.P if P is None else np.asarray(P, dtype=bool)
    M = op.toarray() if sp.issparse(op) else np.asarray(op)
    if P is None:
        raise ValueError("a projection mask is required for a bare matrix")
    return M, np.asarray(P, dtype=bool)


def schur_reduce(op, lam: float, P=None) -> np.ndarray:
    """Effective matrix on the P rows: ``PMP - lam - PMPc (PcMPc - lam)^-1 PcMP``.

    ``lam`` is an eigenvalue of ``M`` iff ``H(lam)`` is singular, provided the
    complement block minus ``lam`` is invertible.
    """
    M, P = _as_dense(op, P)
    A, Bm, Cm, Dm = _split(M, P)
    nP = A.shape[0]
    if Dm.shape[0] == 0:
        return A - lam * np.eye(nP)
    shifted = Dm - lam * np.eye(Dm.shape[0])
    s = la.svdvals(shifted)
    scale = max(1.0, s[0])
    if s[-1] <= 1e-12 * scale:
        raise SchurWindowError(
            f"complement block is singular at lambda={lam} (sigma_min={s[-1]:.3e})",
            condition=float(s[0] / s[-1]) if s[-1] > 0 else np.inf)
    return A - lam * np.eye(nP) - Bm @ la.solve(shifted, Cm)


def coupling_norm(op, lam: float = 0.0, P=None) -> float:
    """``|| PMPc (PcMPc - lam)^-1 PcMP ||_2``."""
    M, P = _as_dense(op, P)
    A, Bm, Cm, Dm = _split(M, P)
    if Dm.shape[0] == 0 or A.shape[0] == 0:
        return 0.0
    T = Bm @ la.solve(Dm - lam * np.eye(Dm.shape[0]), Cm)
    return float(la.norm(T, 2))


def analyticity_window(op, P=None) -> float:
    """Half-width ``sigma_min(PcMPc) / 2`` of the interval where H is analytic."""
    M, P = _as_dense(op, P)
    Dm = _split(M, P)[3]
    if Dm.shape[0] == 0:
        return np.inf
    return float(la.svdvals(Dm)[-1] / 2)


def schur_eigenvalues(op, P=None, window: float | None = None, grid: int = 801) -> np.ndarray:
    """Roots of ``det H(lam)`` inside ``(-window, window)``.

    For symmetric M each sorted eigenvalue of ``H(lam)`` is strictly
    decreasing (``H' = -I - B (D - lam)^-2 B^T``), so every root is bracketed
    on a single branch.  Otherwise sign changes of the real determinant on a
    ``grid`` point scan are refined by Brent's method.
    """
    M, P = _as_dense(op, P)
    w = analyticity_window(M, P) if window is None else window
    if not np.isfinite(w):
        raise ValueError("empty complement: use a direct eigensolver")
    lo, hi = -w * (1 - 1e-12), w * (1 - 1e-12)
    xtol = 1e-14 * max(1.0, w)
    if np.allclose(M, M.conj().T, atol=0.0, rtol=1e-14):
        def branch(i):
            return lambda lam: float(la.eigvalsh(schur_reduce(M, lam, P))[i])

        roots = []
        for i in range(int(P.sum())):
            f = branch(i)
            fa, fb = f(lo), f(hi)
            if fa > 0 > fb:
                roots.append(brentq(f, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps))
            elif fb == 0.0:
                roots.append(hi)
        return np.array(sorted(roots))

    def f(lam):
        return float(np.real(la.det(schur_reduce(M, lam, P))))

    lams = np.linspace(lo, hi, grid)
    vals = np.array([f(x) for x in lams])
    roots = []
    for k in range(len(lams) - 1):
        if vals[k] == 0.0:
            roots.append(lams[k])
        elif vals[k] * vals[k + 1] < 0:
            roots.append(brentq(f, lams[k], lams[k + 1], xtol=xtol,
                                rtol=4 * np.finfo(float).eps))
    return np.array(sorted(roots))


def smallest_singular_value(A, tol: float = 1e-10, maxiter: int = 1000,
                            dense_limit: int = 2500) -> float:
    """sigma_min by dense SVD for small matrices, else inverse power iteration on A^H A."""
    n = A.shape[0]
    if n <= dense_limit:
        M = A.toarray() if sp.issparse(A) else np.asarray(A)
        return float(la.svdvals(M)[-1])
    A = sp.csc_matrix(A)
    try:
        lu = spla.splu(A)
    except RuntimeError:
        return 0.0
    x = np.random.default_rng(0).standard_normal(n).astype(A.dtype)
    x /= la.norm(x)
    est = 0.0
    for _ in range(maxiter):
        y = lu.solve(lu.solve(x, trans="H"))
        ny = la.norm(y)
        if not np.isfinite(ny):
            return 0.0
        new = np.sqrt(ny)
        x = y / ny
        if abs(new - est) <= tol * new:
            est = new
            break
        est = new
    return float(1.0 / est)


@dataclass
class TruncatedGapReport:
    inverse_norm: float
    bound: float
    q: float
    cprime: float
    passed: bool
    pc_inverse_norm: float
    pc_bound: float
    coupling_norm: float
    pa0p: GapReport
    exact_zero_rows: list
    N: int
    delta: float
    epsilon: float

    def to_dict(self) -> dict:
        return {"inverse_norm": _jsonable(self.inverse_norm), "bound": self.bound, "q": self.q,
                "cprime": self.cprime, "pass": self.passed,
                "pc_inverse_norm": _jsonable(self.pc_inverse_norm),
                "pc_bound": _jsonable(self.pc_bound), "coupling_norm": self.coupling_norm,
                "pa0p": self.pa0p.to_dict(),
                "exact_zero_rows": [[list(x), c] for x, c in self.exact_zero_rows],
                "N": self.N, "delta": self.delta, "epsilon": self.epsilon}


def truncated_gap(op: OperatorBox, delta: float, epsilon: float, N: int | None = None,
                  profile: DiophantineProfile | None = None,
                  smallness: float = 0.1) -> TruncatedGapReport:
    """Spectral gap of the truncated operator with its three constituent diagnostics.

    The complement bound uses the Diophantine envelope ``cprime N^-q`` minus the
    size of the off-diagonal perturbation on the complement (Neumann bound).
    """
    N = op.N if N is None else N
    if delta * N > smallness:
        raise ValueError(f"delta*N = {delta * N:g} exceeds the smallness threshold {smallness}")
    seed = op.seed
    if profile is None:
        profile = diophantine_profile(seed, Box(max(N, 2), op.box.j_radius))
    q, cprime = profile.q, profile.cprime
    M = op.matrix()
    smin = smallest_singular_value(M)
    inv = np.inf if smin <= 0 else 1.0 / smin
    bound = N ** q / (epsilon * delta ** seed.p) if delta > 0 else np.inf
    dense = M.toarray()
    A, Bm, Cm, Dm = _split(dense, op.P)
    pc_inv = _inv_norm_dense(Dm) if Dm.size else 0.0
    offdiag = Dm - np.diag(np.diag(Dm))
    envelope = cprime * max(N, 1) ** (-q) - la.norm(offdiag, 2)
    pc_bound = 1.0 / envelope if envelope > 0 else np.inf
    coup = coupling_norm(dense, 0.0, op.P) if np.isfinite(pc_inv) else np.inf
    # PA0P blocks at the same linearization amplitudes as the operator
    cs = enumerate_characteristics(seed, op.box)
    blocks = restrict_PA0P(assemble_A0(seed), cs)
    a_inf = seed.delta
    pa0p = block_gap(blocks, epsilon, a_inf, seed.p)
    zero_rows = [op.row_label(r) for r in np.flatnonzero(op.exact_zero)]
    return TruncatedGapReport(float(inv), float(bound), q, cprime, bool(inv <= bound),
                              float(pc_inv), float(pc_bound), float(coup), pa0p, zero_rows, N,
                              delta, epsilon)
