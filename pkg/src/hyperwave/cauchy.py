"""Pseudospectral integration of ``v_tt - Delta v + v + delta v^{p+1} = 0`` on the torus.

The state is the pair ``(v_hat, w_hat)`` with ``w = -D^{-1} v_t``.  The linear
flow rotates each Fourier mode by its frequency ``sqrt(k^2+1)``; the
nonlinear kick only changes ``w``.  Strang splitting of the two is
symmetric, so the scheme is second order and time reversible.
"""
from __future__ import annotations

import io
import itertools
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .genericity import LinearSeed

__all__ = [
    "CauchyState",
    "LifetimeReport",
    "BlowUp",
    "default_grid",
    "default_dt",
    "initial_from_seed",
    "step",
    "energy",
    "analytic_norms",
    "evolve",
    "lifetime_run",
    "compare_generic_vs_tuned",
]

_BLOWUP = 1e100


class BlowUp(RuntimeError):
    def __init__(self, t):
        super().__init__(f"blow-up detected at t={t}")
        self.t = t


def default_grid(d: int) -> int:
    return 64 if d == 1 else 32


def default_dt(delta: float) -> float:
    return min(0.01, 0.1 / math.sqrt(delta)) if delta > 0 else 0.01


def _wavenumbers(M: int, d: int):
    k = np.fft.fftfreq(M, 1.0 / M)
    return np.meshgrid(*([k] * d), indexing="ij")


@dataclass
class CauchyState:
    """Fourier coefficients (``fftn / M^d`` normalization) and run parameters."""

    v_hat: np.ndarray
    w_hat: np.ndarray
    t: float
    M: int
    delta: float
    p: int
    A: float = 1.5
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def d(self) -> int:
        return self.v_hat.ndim

    def _grid(self):
        key = (self.M, self.d)
        if key not in self._cache:
            ks = _wavenumbers(self.M, self.d)
            ksq = sum(k ** 2 for k in ks)
            lam = np.sqrt(ksq + 1.0)
            l1 = sum(np.abs(k) for k in ks)
            keep = np.ones_like(lam, dtype=bool)
            for k in ks:
                keep &= np.abs(k) <= self.M / 3
            self._cache[key] = (lam, l1, keep, ks)
        return self._cache[key]

    @property
    def lam(self) -> np.ndarray:
        return self._grid()[0]

    def v(self) -> np.ndarray:
        return np.fft.ifftn(self.v_hat * self.M ** self.d).real

    def vt_hat(self) -> np.ndarray:
        return -self.lam * self.w_hat

    def symmetry_defect(self) -> float:
        """max over modes of ``|c(-k) - conj c(k)|`` for both components."""
        worst = 0.0
        for c in (self.v_hat, self.w_hat):
            flipped = np.roll(np.flip(c), 1, axis=tuple(range(c.ndim)))
            worst = max(worst, float(np.abs(flipped - np.conj(c)).max()))
        return worst


def initial_from_seed(seed: LinearSeed, delta: float, p: int | None = None,
                      M: int | None = None, perturbation: float = 0.0, rng_seed: int = 0,
                      A: float = 1.5) -> CauchyState:
    """Data of the linear solution ``sum a_k cos(j_k x - omega_k t)`` at ``t = 0``.

    ``perturbation > 0`` adds ``perturbation * delta`` times a random
    conjugate-symmetric profile on modes ``|k|_inf <= 3`` (unit l1 size).
    """
    d = seed.d
    M = default_grid(d) if M is None else M
    p = seed.p if p is None else p
    shape = (M,) * d
    v = np.zeros(shape, dtype=complex)
    w = np.zeros(shape, dtype=complex)
    for a, j in zip(seed.amplitudes, seed.sites):
        if max(abs(c) for c in j) > M / 3:
            raise ValueError(f"site {j} lies outside the dealiased band of an M={M} grid")
        idx = tuple(c % M for c in j)
        neg = tuple(-c % M for c in j)
        # v = a cos(j.x), v_t = a omega sin(j.x), w = -v_t/omega = -a sin(j.x)
        v[idx] += a / 2
        v[neg] += a / 2
        w[idx] += -a / (2j)
        w[neg] += a / (2j)
    if perturbation:
        rng = np.random.default_rng(rng_seed)
        pv = np.zeros(shape, dtype=complex)
        pw = np.zeros(shape, dtype=complex)
        for kk in itertools.product(range(-3, 4), repeat=d):
            mine, other = tuple(c % M for c in kk), tuple(-c % M for c in kk)
            if mine > other:
                continue
            for arr in (pv, pw):
                z = complex(rng.standard_normal(), rng.standard_normal())
                if mine == other:
                    z = z.real
                arr[mine] += z
                if mine != other:
                    arr[other] += np.conj(z)
        scale = perturbation * delta / (np.abs(pv).sum() + np.abs(pw).sum())
        v += scale * pv
        w += scale * pw
    return CauchyState(v, w, 0.0, M, float(delta), int(p), A)


def _rotate(v_hat, w_hat, lam, tau):
    c, s = np.cos(lam * tau), np.sin(lam * tau)
    return v_hat * c - w_hat * s, v_hat * s + w_hat * c


def _kick(state: CauchyState, v_hat, w_hat, tau):
    if state.delta == 0.0:
        return w_hat
    lam, _, keep, _ = state._grid()
    M, d = state.M, state.d
    v = np.fft.ifftn(v_hat * M ** d).real
    f_hat = np.fft.fftn(v ** (state.p + 1)) / M ** d
    f_hat = np.where(keep, f_hat, 0.0)
    # v_t -= tau delta f, and w = -v_t / lam
    return w_hat + tau * state.delta * f_hat / lam


def step(state: CauchyState, dt: float) -> CauchyState:
    """One Strang step: half rotation, nonlinear kick, half rotation.

    A negative ``dt`` integrates backwards.
    """
    if dt == 0:
        raise ValueError("dt must be nonzero")
    lam = state.lam
    v, w = _rotate(state.v_hat, state.w_hat, lam, dt / 2)
    w = _kick(state, v, w, dt)
    v, w = _rotate(v, w, lam, dt / 2)
    t = state.t + dt
    if not (np.all(np.isfinite(v)) and np.all(np.isfinite(w))) or \
            max(np.abs(v).max(), np.abs(w).max()) > _BLOWUP:
        raise BlowUp(t)
    return replace(state, v_hat=v, w_hat=w, t=t)


def energy(state: CauchyState) -> float:
    """``1/2 |v_t|^2 + 1/2 |D v|^2 + delta/(p+2) mean(v^{p+2})`` (grid mean)."""
    lam = state.lam
    kin = 0.5 * float(np.sum(np.abs(state.w_hat * lam) ** 2))
    pot = 0.5 * float(np.sum(np.abs(state.v_hat * lam) ** 2))
    nl = state.delta / (state.p + 2) * float(np.mean(state.v() ** (state.p + 2)))
    return kin + pot + nl


def analytic_norms(state: CauchyState, rho: float = 0.5) -> tuple[float, float]:
    """Weighted l1 norms of ``v`` and of ``D^{-1} v_t`` (= ``|w|``)."""
    wgt = np.exp(rho * state._grid()[1])
    return float(np.sum(np.abs(state.v_hat) * wgt)), float(np.sum(np.abs(state.w_hat) * wgt))


def evolve(state: CauchyState, T: float, dt: float) -> CauchyState:
    """Integrate to ``state.t + T`` with steps of size ``dt`` (the last one shortened)."""
    n = int(math.floor(abs(T) / dt + 1e-9))
    sgn = 1.0 if T >= 0 else -1.0
    for _ in range(n):
        state = step(state, sgn * dt)
    rest = abs(T) - n * dt
    if rest > 1e-12:
        state = step(state, sgn * rest)
    return state


@dataclass
class LifetimeReport:
    delta: float
    A: float
    T: float
    dt: float
    K: float
    rows: list  # (t, norm_v, norm_vt, excess, energy_drift)
    max_excess: float
    max_energy_drift: float
    max_symmetry_defect: float
    passed: bool
    blowup_time: float | None = None

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t,norm_v,norm_vt,excess,energy_drift\n")
        for row in self.rows:
            buf.write(",".join(repr(float(x)) for x in row) + "\n")
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"delta": self.delta, "A": self.A, "T": self.T, "dt": self.dt, "K": self.K,
                "max_excess": self.max_excess, "max_energy_drift": self.max_energy_drift,
                "max_symmetry_defect": self.max_symmetry_defect, "pass": self.passed,
                "blowup_time": self.blowup_time, "n_checkpoints": len(self.rows)}


def lifetime_run(initial: CauchyState, A: float | None = None, K: float = 10.0,
                 dt: float | None = None, checkpoints: int = 400, rho: float = 0.5,
                 T: float | None = None) -> LifetimeReport:
    """Integrate to ``T = delta^-A`` and monitor ``s(t) = |v| + |D^-1 v_t|``.

    ``pass`` means no blow-up and ``max_t s(t) - s(0) <= K delta``.  For
    ``delta = 0`` the default horizon is 100.
    """
    delta = initial.delta
    A = initial.A if A is None else A
    if T is None:
        T = delta ** (-A) if delta > 0 else 100.0
    dt = default_dt(delta) if dt is None else dt
    nsteps = int(math.ceil(T / dt - 1e-9))
    dt = T / nsteps
    every = max(1, nsteps // checkpoints)
    state = initial
    nv, nw = analytic_norms(state, rho)
    s0 = nv + nw
    e0 = energy(state)
    rows = [(0.0, nv, nw, 0.0, 0.0)]
    worst_sym = state.symmetry_defect()
    blow = None
    for i in range(1, nsteps + 1):
        try:
            state = step(state, dt)
        except BlowUp as exc:
            blow = exc.t
            break
        if i % every == 0 or i == nsteps:
            nv, nw = analytic_norms(state, rho)
            drift = abs(energy(state) - e0) / abs(e0) if e0 else abs(energy(state))
            rows.append((state.t, nv, nw, nv + nw - s0, drift))
            worst_sym = max(worst_sym, state.symmetry_defect())
    max_excess = max(r[3] for r in rows)
    max_drift = max(r[4] for r in rows)
    passed = blow is None and max_excess <= K * delta
    return LifetimeReport(delta, A, T, dt, K, rows, float(max_excess), float(max_drift),
                          float(worst_sym), bool(passed), blow)


def compare_generic_vs_tuned(entries, delta: float, A: float, K: float = 10.0,
                             dt: float | None = None, checkpoints: int = 100,
                             M: int | None = None) -> list[dict]:
    """One lifetime run per ``(seed, certificate_dict)``; observational table, no verdict."""
    table = []
    for seed, cert in entries:
        init = initial_from_seed(seed, delta, M=M, A=A)
        rep = lifetime_run(init, A=A, K=K, dt=dt, checkpoints=checkpoints)
        verdict = None
        if cert is not None:
            verdict = cert.get("generic")
        table.append({"sites": [list(s) for s in seed.sites],
                      "amplitudes": list(seed.amplitudes), "p": seed.p,
                      "certificate_generic": verdict, "max_excess": rep.max_excess,
                      "max_energy_drift": rep.max_energy_drift,
                      "blowup_time": rep.blowup_time,
                      "trajectory": [[r[0], r[3]] for r in rep.rows]})
    return table
