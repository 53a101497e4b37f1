"""Lyapunov-Schmidt / Newton solver for the doubled lattice equations.

The unknowns are the pair ``(u, conj u)`` on a finite box ``Lambda`` together
with the frequency vector ``omega``.  ``u`` is pinned to the amplitudes ``a_k``
on the resonant set (the Q rows); the remaining P rows are solved by Newton
iteration and the Q rows update ``omega``.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field, replace

import mpmath
import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .genericity import LinearSeed
from .lattice import AnalyticNorm, SpectralCoeffs, convolution_power, convolve, weighted_norm
from .operator import jacobian_kernel

__all__ = [
    "NewtonState",
    "SolutionArtifact",
    "SingularLinearization",
    "LambdaBox",
    "default_radius",
    "reachable_points",
    "nonlinearity",
    "residual_F",
    "lyapunov_schmidt_split",
    "initial_state",
    "newton_step",
    "q_equation_update",
    "solve",
    "order_fit",
    "synthesize_check",
    "transversality",
    "first_step_scan",
    "scaling_study",
]


class SingularLinearization(RuntimeError):
    """The P-block Jacobian could not be factorized."""

    def __init__(self, msg, report=None):
        super().__init__(msg)
        self.report = report


@dataclass(frozen=True)
class LambdaBox:
    """Cube ``[-radius, radius]^(b+d)`` with the point list actually solved on."""

    radius: int
    points: tuple
    pruned: bool

    def to_dict(self) -> dict:
        return {"radius": self.radius, "n_points": len(self.points), "pruned": self.pruned}


def default_radius(delta: float, s: float = 1.5) -> int:
    """``ceil(|log delta|^s)``, the default box half-width."""
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    return int(math.ceil(abs(math.log(delta)) ** s))


def reachable_points(seed: LinearSeed, radius: int, H_terms=(), prune: bool = True) -> LambdaBox:
    """Points of the cube that the iteration can ever populate.

    Starting from the resonant set, the support only moves by steps in the
    supports of the seed (and of the H coefficients), so the iteration lives
    on a coset of a sublattice.  For even ``p`` without H terms the parity of
    ``sum m_k`` is also preserved and the step set is the pairwise sums.
    """
    b, d = seed.dims
    width = b + d
    if any(max(abs(c) for c in x) > radius for x in seed.resonant_set()):
        raise ValueError(f"box radius {radius} does not contain the resonant set")
    if prune:
        start = sorted(seed.resonant_set())
        if seed.p % 2 == 0 and not H_terms:
            steps = {tuple(a + c for a, c in zip(x, y)) for x in start for y in start}
        else:
            steps = set(start)
            for _, alpha in H_terms:
                steps |= set(alpha.support())
                steps |= {tuple(-c for c in x) for x in alpha.support()}
        steps.discard((0,) * width)
        seen = set(start)
        frontier = list(start)
        while frontier:
            nxt = []
            for x in frontier:
                for g in steps:
                    y = tuple(a + c for a, c in zip(x, g))
                    if y not in seen and max(abs(c) for c in y) <= radius:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        pts = tuple(sorted(seen))
    else:
        pts = tuple(itertools.product(range(-radius, radius + 1), repeat=width))
    return LambdaBox(radius, pts, prune)


# -- numeric backends ------------------------------------------------------------

def _sqrt(x, mp: bool):
    return mpmath.sqrt(x) if mp else math.sqrt(x)


def _num(x, mp: bool):
    return mpmath.mpf(x) if mp else float(x)


@dataclass
class NewtonState:
    """Iterate of the Newton/Q scheme on a fixed box.

    ``z`` holds the u values then the conj-u values on ``box.points``.
    """

    z: np.ndarray
    omega: np.ndarray
    m: int
    residual_norm: float
    box: LambdaBox
    history: list = field(default_factory=list)
    omega_history: list = field(default_factory=list)
    precision: int | None = None
    rejected: bool = False
    note: str = ""

    @property
    def mp(self) -> bool:
        return self.precision is not None

    def series(self, dims) -> tuple[SpectralCoeffs, SpectralCoeffs]:
        n = len(self.box.points)
        u = SpectralCoeffs(dims, dict(zip(self.box.points, self.z[:n])))
        ub = SpectralCoeffs(dims, dict(zip(self.box.points, self.z[n:])))
        return u, ub

    def conj_symmetry_defect(self) -> float:
        n = len(self.box.points)
        idx = {x: i for i, x in enumerate(self.box.points)}
        worst = 0.0
        for i, x in enumerate(self.box.points):
            k = idx.get(tuple(-c for c in x))
            other = self.z[n + k] if k is not None else 0.0
            worst = max(worst, float(abs(self.z[i] - other)))
        return worst


def nonlinearity(v: SpectralCoeffs, p: int, H_terms=()) -> SpectralCoeffs:
    """``v^{*(p+1)} + sum_m alpha_m * v^{*(p+m)}``."""
    out = convolution_power(v, p + 1)
    for m, alpha in H_terms:
        out = out + convolve(alpha, convolution_power(v, p + m))
    return out


def residual_F(u: SpectralCoeffs, omega, seed: LinearSeed, H_terms=(),
               ubar: SpectralCoeffs | None = None, points=None):
    """Both rows of the doubled lattice system at ``(u, ubar)``.

    Returns ``(F_u, F_ubar)``; with ``points`` given the result is restricted
    to those points, otherwise it covers every point where it can be nonzero.
    """
    if ubar is None:
        ubar = u.conj_reflect()
    b = seed.b
    mp = any(isinstance(w, mpmath.mpf) for w in omega)
    v = (u + ubar).scale(_num(0.5, mp))
    N = nonlinearity(v, seed.p, H_terms) if len(v) else SpectralCoeffs(seed.dims, {})
    if points is None:
        points = sorted(set(u.support()) | set(ubar.support()) | set(N.support()))
    fu, fb = {}, {}
    for x in points:
        nw = sum(c * w for c, w in zip(x[:b], omega))
        root = _sqrt(sum(c * c for c in x[b:]) + 1, mp)
        nx = N[x] / root
        fu[x] = (nw + root) * u[x] + nx
        fb[x] = (-nw + root) * ubar[x] + nx
    return SpectralCoeffs(seed.dims, fu), SpectralCoeffs(seed.dims, fb)


def _residual_vector(state: NewtonState, seed, H_terms, omega=None):
    omega = state.omega if omega is None else omega
    u, ub = state.series(seed.dims)
    fu, fb = residual_F(u, list(omega), seed, H_terms, ubar=ub, points=state.box.points)
    pts = state.box.points
    return np.array([fu[x] for x in pts] + [fb[x] for x in pts],
                    dtype=object if state.mp else float)


def _weighted(vec, pts, nrm: AnalyticNorm) -> float:
    n = len(pts)
    w = [nrm.weight(x) for x in pts]
    return float(sum(abs(vec[i]) * w[i] + abs(vec[n + i]) * w[i] for i in range(n)))


def lyapunov_schmidt_split(points, seed: LinearSeed):
    """(P row indices, Q row indices) of the doubled point list.

    Q is the u row at ``(-e_k, j_k)`` and the conj-u row at ``(e_k, -j_k)``.
    """
    points = list(points)
    n = len(points)
    idx = {x: i for i, x in enumerate(points)}
    q = []
    for k in range(seed.b):
        x, y = seed.support_point(k), seed.conj_support_point(k)
        if x not in idx or y not in idx:
            raise ValueError(f"box does not contain the resonant point {x} or {y}")
        q += [idx[x], n + idx[y]]
    qset = set(q)
    p_rows = [r for r in range(2 * n) if r not in qset]
    return np.array(p_rows, dtype=int), np.array(q, dtype=int)


def initial_state(seed: LinearSeed, box: LambdaBox, H_terms=(), precision: int | None = None,
                  nrm: AnalyticNorm = AnalyticNorm()) -> NewtonState:
    """``(u0, conj u0)`` with ``omega = omega0``."""
    mp = precision is not None
    pts = box.points
    n = len(pts)
    idx = {x: i for i, x in enumerate(pts)}
    with mpmath.workdps(precision or 15):
        z = np.array([_num(0, mp)] * (2 * n), dtype=object if mp else float)
        for k in range(seed.b):
            a = mpmath.mpf(repr(seed.amplitudes[k])) if mp else seed.amplitudes[k]
            z[idx[seed.support_point(k)]] = a
            z[n + idx[seed.conj_support_point(k)]] = a
        omega = np.array([_sqrt(sum(c * c for c in s) + 1, mp) for s in seed.sites],
                         dtype=object if mp else float)
        st = NewtonState(z, omega, 0, 0.0, box, precision=precision)
        r = _weighted(_residual_vector(st, seed, H_terms), pts, nrm)
    st.residual_norm = r
    st.history = [r]
    st.omega_history = [[float(w) for w in omega]]
    return st


def q_equation_update(state: NewtonState, seed: LinearSeed, H_terms=()) -> np.ndarray:
    """New frequencies from the Q rows: ``omega_k + F_u(-e_k, j_k)/a_k``.

    The diagonal part of F is evaluated with the current ``omega``, so at
    ``omega = omega0`` this is ``sqrt(j_k^2+1) + F(u)(-e_k, j_k)/a_k``.
    """
    pts = state.box.points
    idx = {x: i for i, x in enumerate(pts)}
    with mpmath.workdps(state.precision or 15):
        F = _residual_vector(state, seed, H_terms)
        new = state.omega.copy()
        for k in range(seed.b):
            i = idx[seed.support_point(k)]
            a = state.z[i]
            if a == 0:
                raise ValueError(f"amplitude a_{k + 1} is zero; the Q equation cannot be solved")
            new[k] = state.omega[k] + F[i] / a
    return new


def _jacobian_entries(state: NewtonState, seed, H_terms):
    """Sparse (row, col, value) entries of the doubled F' on the box."""
    pts = state.box.points
    n = len(pts)
    b = seed.b
    mp = state.mp
    idx = {x: i for i, x in enumerate(pts)}
    u, ub = state.series(seed.dims)
    K = jacobian_kernel(u, ub, seed.p, H_terms)
    rows, cols, vals = [], [], []
    kitems = list(K.items())
    for i, x in enumerate(pts):
        nw = sum(c * w for c, w in zip(x[:b], state.omega))
        root = _sqrt(sum(c * c for c in x[b:]) + 1, mp)
        rows += [i, n + i]
        cols += [i, n + i]
        vals += [nw + root, -nw + root]
        for dlt, val in kitems:
            k = idx.get(tuple(a - g for a, g in zip(x, dlt)))
            if k is None:
                continue
            w = val / root
            for r in (i, n + i):
                for c in (k, n + k):
                    rows.append(r)
                    cols.append(c)
                    vals.append(w)
    return rows, cols, vals


def _solve_linear(rows, cols, vals, shape, rhs, mp: bool):
    if mp:
        A = mpmath.zeros(*shape)
        for r, c, v in zip(rows, cols, vals):
            A[r, c] += v
        try:
            x = mpmath.lu_solve(A, mpmath.matrix(list(rhs)))
        except ZeroDivisionError as exc:
            raise SingularLinearization(f"singular P-block: {exc}") from exc
        return np.array([x[i] for i in range(shape[0])], dtype=object)
    A = sp.csc_matrix((np.array(vals, dtype=float), (rows, cols)), shape=shape)
    try:
        lu = spla.splu(A)
    except RuntimeError as exc:
        raise SingularLinearization(f"singular P-block: {exc}") from exc
    x = lu.solve(np.asarray(rhs, dtype=float))
    if not np.all(np.isfinite(x)):
        raise SingularLinearization("non-finite Newton update")
    return x


def newton_step(state: NewtonState, seed: LinearSeed, H_terms=(), coupling: str = "chain",
                nrm: AnalyticNorm = AnalyticNorm()) -> NewtonState:
    """One Newton update of the P equations with u pinned on the resonant set.

    ``coupling="chain"`` also linearizes the Q rows in ``omega`` (omega as a
    function of u through the Q equations), which keeps the joint iteration
    quadratically convergent; ``"frozen"`` keeps omega fixed.  A step that
    does not lower the residual is rejected and returned with ``rejected``
    set and the iterate unchanged.
    """
    if coupling not in ("chain", "frozen"):
        raise ValueError(f"unknown coupling {coupling!r}")
    pts = state.box.points
    n = len(pts)
    b = seed.b
    mp = state.mp
    prec = state.precision or 15
    P, Q = lyapunov_schmidt_split(pts, seed)
    with mpmath.workdps(prec):
        F = _residual_vector(state, seed, H_terms)
        rows, cols, vals = _jacobian_entries(state, seed, H_terms)
        qu = Q[0::2]  # u-type Q rows; the conj rows carry the same equation
        eq_rows = np.concatenate([P, qu]) if coupling == "chain" else P
        rmap = {r: i for i, r in enumerate(eq_rows)}
        cmap = {c: i for i, c in enumerate(P)}
        R, C, V = [], [], []
        for r, c, v in zip(rows, cols, vals):
            if r in rmap and c in cmap:
                R.append(rmap[r])
                C.append(cmap[c])
                V.append(v)
        size = len(eq_rows)
        if coupling == "chain":
            # dF_row/d omega_k = n_k u(x) (u rows) and -n_k conj u(x) (conj rows)
            for r in eq_rows:
                x = pts[r % n]
                val = state.z[r]
                if val == 0:
                    continue
                sgn = 1 if r < n else -1
                for k in range(b):
                    if x[k]:
                        R.append(rmap[r])
                        C.append(len(P) + k)
                        V.append(sgn * x[k] * val)
        rhs = -F[eq_rows]
        try:
            delta = _solve_linear(R, C, V, (size, size), rhs, mp)
        except SingularLinearization as exc:
            raise SingularLinearization(str(exc), report={"iterate": state.m, "rows": size})
        z = state.z.copy()
        z[P] = z[P] + delta[:len(P)]
        omega = state.omega.copy()
        if coupling == "chain":
            omega = omega + delta[len(P):]
        trial = replace(state, z=z, omega=omega)
        r_new = _weighted(_residual_vector(trial, seed, H_terms), pts, nrm)
    if not r_new < state.residual_norm:
        return replace(state, rejected=True,
                       note=f"step rejected: residual {r_new:.3e} >= {state.residual_norm:.3e}")
    return replace(trial, m=state.m + 1, residual_norm=r_new, history=state.history + [r_new],
                   omega_history=state.omega_history + [[float(w) for w in omega]],
                   rejected=False, note="")


def order_fit(history) -> float:
    """Least-squares slope of ``log r_{m+1}`` against ``log r_m`` (order of convergence)."""
    h = [r for r in history if r > 0]
    if len(h) < 3:
        raise ValueError("need at least three positive residuals for an order fit")
    x = np.log(np.array(h[:-1], dtype=float))
    y = np.log(np.array(h[1:], dtype=float))
    return float(np.polyfit(x, y, 1)[0])


@dataclass
class SolutionArtifact:
    u: SpectralCoeffs
    ubar: SpectralCoeffs
    omega: list
    residual: float
    remainder_norm: float
    converged: bool
    history: list
    omega_history: list
    metadata: dict
    reason: str = ""
    q_history: list = field(default_factory=list)

    def conj_symmetry_defect(self) -> float:
        return self.ubar.max_abs_diff(self.u.conj_reflect())

    def to_dict(self) -> dict:
        return {"u": self.u.to_records(), "ubar": self.ubar.to_records(),
                "omega": [float(w) for w in self.omega], "residual": self.residual,
                "remainder_norm": self.remainder_norm, "converged": self.converged,
                "history": [float(h) for h in self.history],
                "omega_history": self.omega_history, "q_history": self.q_history,
                "metadata": self.metadata, "reason": self.reason}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

    @classmethod
    def from_dict(cls, data: dict) -> SolutionArtifact:
        seed = data["metadata"]["seed"]
        dims = (len(seed["sites"]), len(seed["sites"][0]))
        return cls(SpectralCoeffs.from_records(data["u"], dims),
                   SpectralCoeffs.from_records(data["ubar"], dims),
                   list(data["omega"]), data["residual"], data["remainder_norm"],
                   data["converged"], list(data["history"]), list(data["omega_history"]),
                   dict(data["metadata"]), data.get("reason", ""),
                   list(data.get("q_history", [])))

    @classmethod
    def from_json(cls, text: str) -> SolutionArtifact:
        return cls.from_dict(json.loads(text))

    def seed(self) -> LinearSeed:
        s = self.metadata["seed"]
        return LinearSeed(s["sites"], s["amplitudes"], s["p"])


def _real_values(series: SpectralCoeffs) -> SpectralCoeffs:
    return SpectralCoeffs(series.dims, {x: float(complex(v).real) if complex(v).imag == 0
                                        else complex(v) for x, v in series.items()})


def solve(seed: LinearSeed, H_terms=(), tol: float = 1e-11, max_iter: int = 30,
          radius: int | None = None, prune: bool = True, precision: int | None = None,
          coupling: str = "chain", nrm: AnalyticNorm = AnalyticNorm(),
          certificate: dict | None = None) -> SolutionArtifact:
    """Alternate Q updates and Newton steps until the weighted residual is below ``tol``.

    Non-convergence is not an exception: the partial artifact carries the
    history and the failure reason.
    """
    if radius is None:
        radius = default_radius(seed.delta)
    box = reachable_points(seed, radius, H_terms, prune)
    state = initial_state(seed, box, H_terms, precision, nrm)
    reason = ""
    q_history = []
    while state.residual_norm > tol:
        if state.m >= max_iter:
            reason = f"max_iter={max_iter} reached"
            break
        omega = q_equation_update(state, seed, H_terms)
        q_history.append([float(w) for w in omega])
        with mpmath.workdps(precision or 15):
            r = _weighted(_residual_vector(replace(state, omega=omega), seed, H_terms),
                          box.points, nrm)
        # the Q update only zeroes the Q rows; keep it when it helps
        if r < state.residual_norm:
            state = replace(state, omega=omega, residual_norm=r)
        try:
            nxt = newton_step(state, seed, H_terms, coupling, nrm)
        except SingularLinearization as exc:
            reason = f"singular linearization: {exc}"
            break
        if nxt.rejected:
            reason = nxt.note
            break
        state = nxt
    converged = state.residual_norm <= tol
    u, ub = state.series(seed.dims)
    u0 = seed.series()
    remainder = weighted_norm(_real_values(u) - u0, nrm)
    meta = {"seed": seed.to_dict(), "box": box.to_dict(), "tol": tol, "max_iter": max_iter,
            "precision": precision, "coupling": coupling, "rho": nrm.rho,
            "iterations": state.m,
            "H_terms": [[m, alpha.to_records()] for m, alpha in H_terms]}
    if certificate is not None:
        meta["certificate"] = certificate
    return SolutionArtifact(_real_values(u), _real_values(ub), [float(w) for w in state.omega],
                            float(state.residual_norm), float(remainder), bool(converged),
                            [float(h) for h in state.history], state.omega_history, meta,
                            reason, q_history)


def synthesize_check(art: SolutionArtifact, H_terms=(), grid: int = 64) -> float:
    """Sup-norm residual of the wave equation for the synthesized ``v(t, x)``.

    ``v`` is evaluated on a ``grid`` point time axis over one period of the
    first frequency and a ``grid^d`` spatial grid; ``-Delta + 1`` is applied
    by FFT in x and the second time derivative exactly from the series.
    """
    seed = art.seed()
    b, d = seed.dims
    v = (art.u + art.ubar).scale(0.5)
    omega = np.asarray(art.omega, dtype=float)
    t = np.arange(grid) * (2 * np.pi / omega[0]) / grid
    xs = np.arange(grid) * 2 * np.pi / grid
    shape = (grid,) * d
    mesh = np.meshgrid(*([xs] * d), indexing="ij")
    vals = np.zeros((grid,) + shape, dtype=complex)
    vtt = np.zeros_like(vals)
    for x, c in v.items():
        nw = float(np.dot(x[:b], omega))
        phase_t = np.exp(1j * nw * t)
        phase_x = np.exp(1j * sum(jj * m for jj, m in zip(x[b:], mesh)))
        term = c * np.multiply.outer(phase_t, phase_x)
        vals += term
        vtt += -(nw ** 2) * term
    if np.abs(vals.imag).max() > 1e-12 * max(1.0, np.abs(vals).max()):
        raise ValueError("synthesized v is not real; conjugate symmetry is broken")
    vr = vals.real
    k = np.fft.fftfreq(grid, 1.0 / grid)
    ksq = sum(kk ** 2 for kk in np.meshgrid(*([k] * d), indexing="ij"))
    axes = tuple(range(1, d + 1))
    lin = np.fft.ifftn(np.fft.fftn(vr, axes=axes) * (ksq + 1.0), axes=axes).real
    res = vtt.real + lin + vr ** (seed.p + 1)
    for m, alpha in H_terms:
        if any(any(x[:b]) for x in alpha.support()):
            raise ValueError("time-domain check needs x-only H coefficients (n = 0)")
        ax = np.zeros(shape, dtype=complex)
        for x, c in alpha.items():
            ax += c * np.exp(1j * sum(jj * m_ for jj, m_ in zip(x[b:], mesh)))
        res = res + ax.real[None] * vr ** (seed.p + m)
    return float(np.abs(res).max())


def _first_shift(seed: LinearSeed, amplitudes, H_terms=()) -> np.ndarray:
    """``omega^(1) - omega^(0)`` from the Q rows at ``u0(amplitudes)``."""
    s = seed.with_amplitudes(amplitudes)
    u0 = s.series()
    fu, _ = residual_F(u0, list(s.omega0_float), s, H_terms,
                       points=[s.support_point(k) for k in range(s.b)])
    out = np.empty(s.b)
    for k in range(s.b):
        # the diagonal vanishes at omega0, keep only the nonlinear part
        x = s.support_point(k)
        root = math.sqrt(sum(c * c for c in x[s.b:]) + 1)
        nw = float(np.dot(x[:s.b], s.omega0_float))
        out[k] = (complex(fu[x]).real - (nw + root) * amplitudes[k]) / amplitudes[k]
    return out


def transversality(seed: LinearSeed, deltas, H_terms=(), rel_step: float = 1e-5) -> dict:
    """Jacobian of ``omega^(1)`` in the amplitudes over a delta grid.

    Amplitudes are ``a = delta * a_tilde`` with ``a_tilde`` the seed's amplitudes
    divided by their max.  Derivatives are central differences with step
    ``rel_step * a_k`` on the frequency shift.  Both the unrescaled Jacobian
    ``d omega/d a`` and the rescaled ``d omega/d a_tilde = delta * d omega/d a``
    are reported, with log-log slopes of ``|det|``.
    """
    at = np.asarray(seed.amplitudes) / max(seed.amplitudes)
    rows = []
    for delta in deltas:
        a = delta * at
        J = np.empty((seed.b, seed.b))
        status = "ok"
        try:
            for k in range(seed.b):
                h = rel_step * a[k]
                ap, am = a.copy(), a.copy()
                ap[k] += h
                am[k] -= h
                J[:, k] = (_first_shift(seed, ap, H_terms) - _first_shift(seed, am, H_terms)) / (2 * h)
        except Exception as exc:  # reported per grid point
            status = f"failed: {exc}"
            J[:] = np.nan
        diag = np.abs(np.diag(J))
        off = np.abs(J - np.diag(np.diag(J))).max() if seed.b > 1 else 0.0
        rows.append({"delta": float(delta), "status": status, "jacobian": J.tolist(),
                     "det": float(la.det(J)) if status == "ok" else float("nan"),
                     "det_rescaled": float(la.det(delta * J)) if status == "ok" else float("nan"),
                     "offdiag_over_diag": float(off / diag.min()) if diag.min() > 0 else float("inf")})
    good = [r for r in rows if r["status"] == "ok" and r["det"] != 0]
    out = {"rows": rows, "p": seed.p, "b": seed.b}
    if len(good) >= 2:
        ld = np.log([r["delta"] for r in good])
        out["slope_rescaled"] = float(np.polyfit(ld, np.log(np.abs([r["det_rescaled"] for r in good])), 1)[0])
        out["slope_unrescaled"] = float(np.polyfit(ld, np.log(np.abs([r["det"] for r in good])), 1)[0])
        out["expected_rescaled"] = seed.p * seed.b
        out["expected_unrescaled"] = (seed.p - 1) * seed.b
    return out


def first_step_scan(seed: LinearSeed, deltas, H_terms=(), radius: int | None = None,
                    nrm: AnalyticNorm = AnalyticNorm()) -> dict:
    """Size of the first Newton correction against ``delta^{3/2}`` over a delta grid.

    ``delta0`` is the largest grid value below which every grid point satisfies
    the bound (None when the smallest already fails).
    """
    at = np.asarray(seed.amplitudes) / max(seed.amplitudes)
    rows = []
    for delta in sorted(deltas):
        s = seed.with_amplitudes(delta * at)
        box = reachable_points(s, radius or default_radius(delta), H_terms)
        st = initial_state(s, box, H_terms, nrm=nrm)
        st = replace(st, omega=q_equation_update(st, s, H_terms))
        nxt = newton_step(replace(st, residual_norm=np.inf), s, H_terms, nrm=nrm)
        dz = nxt.z - st.z
        size = _weighted(dz, box.points, nrm)
        rows.append({"delta": float(delta), "step_norm": size, "bound": delta ** 1.5,
                     "ok": bool(size <= delta ** 1.5)})
    delta0 = None
    for r in rows:
        if not r["ok"]:
            break
        delta0 = r["delta"]
    return {"rows": rows, "delta0": delta0}


def scaling_study(seed: LinearSeed, deltas, H_terms=(), tol: float = 1e-11,
                  radius: int | None = None) -> dict:
    """Frequency shift and remainder across a delta grid, with log-log slopes."""
    at = np.asarray(seed.amplitudes) / max(seed.amplitudes)
    rows = []
    for delta in deltas:
        s = seed.with_amplitudes(delta * at)
        art = solve(s, H_terms, tol=tol, radius=radius)
        shift = np.abs(np.asarray(art.omega) - s.omega0_float)
        rows.append({"delta": float(delta), "converged": art.converged,
                     "shift": shift.tolist(), "remainder": art.remainder_norm,
                     "remainder_bound": delta ** 1.5,
                     "remainder_ok": bool(art.remainder_norm <= delta ** 1.5)})
    ld = np.log([r["delta"] for r in rows])
    slopes = [float(np.polyfit(ld, np.log([r["shift"][k] for r in rows]), 1)[0])
              for k in range(seed.b)]
    rem_slope = float(np.polyfit(ld, np.log([r["remainder"] for r in rows]), 1)[0])
    return {"rows": rows, "shift_slopes": slopes, "remainder_slope": rem_slope, "p": seed.p}
