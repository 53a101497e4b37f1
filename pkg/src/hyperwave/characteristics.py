"""Bi-characteristics of the linear flow on truncated lattice boxes.

``C_+ = {n.omega0 + sqrt(j^2+1) = 0}`` and ``C_- = {-n.omega0 + sqrt(j^2+1) = 0}``.
Floating point is only used to shortlist candidates; every membership
decision is an exact zero test in the radical field.
"""
from __future__ import annotations

import io
import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components as _cc

from .genericity import DifferenceSet, LinearSeed, bound_B, build_algebra
from .radicals import RadicalNumber, radical_sqrt_int

__all__ = [
    "Box",
    "CharacteristicSet",
    "ComponentReport",
    "ComponentBoundCheck",
    "DiophantineProfile",
    "enumerate_characteristics",
    "connected_components",
    "verify_component_bound",
    "diophantine_profile",
    "time_indices",
    "spatial_shells",
]

# shortlist tolerance for the float prefilter; exact test decides
_PREFILTER = 1e-6


@dataclass(frozen=True)
class Box:
    """Truncation ``|n|_1 <= n_radius`` and ``|j|_inf <= j_radius``."""

    n_radius: int
    j_radius: int

    def __post_init__(self):
        if self.n_radius < 0 or self.j_radius < 0:
            raise ValueError(f"box radii must be nonnegative, got {self}")

    def contains(self, x, b: int) -> bool:
        return (sum(abs(c) for c in x[:b]) <= self.n_radius
                and max((abs(c) for c in x[b:]), default=0) <= self.j_radius)


def time_indices(b: int, radius: int) -> list[tuple]:
    """All n in Z^b with |n|_1 <= radius, sorted."""
    rng = range(-radius, radius + 1)
    return [n for n in itertools.product(rng, repeat=b) if sum(abs(c) for c in n) <= radius]


def spatial_shells(d: int, radius: int) -> dict[int, list[tuple]]:
    """Map |j|^2 -> sorted list of j in [-radius, radius]^d."""
    shells: dict[int, list[tuple]] = {}
    for j in itertools.product(range(-radius, radius + 1), repeat=d):
        shells.setdefault(sum(c * c for c in j), []).append(j)
    return shells


def _n_dot_omega_exact(n, omega) -> RadicalNumber:
    acc = RadicalNumber()
    for c, w in zip(n, omega):
        if c:
            acc = acc + w * c
    return acc


@dataclass
class CharacteristicSet:
    plus: frozenset
    minus: frozenset
    box: Box
    seed: LinearSeed

    @property
    def points(self) -> list:
        return sorted(self.plus | self.minus)

    def __len__(self) -> int:
        return len(self.plus) + len(self.minus)

    def branch(self, x):
        x = tuple(x)
        if x in self.plus:
            return "+"
        if x in self.minus:
            return "-"
        return None

    def to_dict(self) -> dict:
        return {"box": {"n_radius": self.box.n_radius, "j_radius": self.box.j_radius},
                "plus": [list(x) for x in sorted(self.plus)],
                "minus": [list(x) for x in sorted(self.minus)]}


def enumerate_characteristics(seed: LinearSeed, box: Box) -> CharacteristicSet:
    """Exact enumeration of ``C_+`` and ``C_-`` inside ``box``."""
    if box.n_radius < 1 or box.j_radius < 1:
        raise ValueError("box radii must be >= 1")
    b, d = seed.dims
    omega = seed.omega0_float
    shells = spatial_shells(d, box.j_radius)
    plus, minus = set(), set()
    for n in time_indices(b, box.n_radius):
        s = float(np.dot(n, omega))
        if s == 0.0:
            continue
        target = s * s - 1.0
        k = int(round(target))
        if k < 0 or k not in shells or abs(target - k) > _PREFILTER * max(1.0, s * s):
            continue
        nw = _n_dot_omega_exact(n, seed.omega0)
        root = radical_sqrt_int(k + 1)
        if s < 0 and (nw + root).is_zero():
            plus.update(tuple(n) + j for j in shells[k])
        elif s > 0 and (root - nw).is_zero():
            minus.update(tuple(n) + j for j in shells[k])
    return CharacteristicSet(frozenset(plus), frozenset(minus), box, seed)


@dataclass
class ComponentReport:
    components: list
    max_size: int
    bound_B: int
    adjacency_mode: str

    def sizes(self) -> list[int]:
        return [len(c) for c in self.components]

    def to_dict(self) -> dict:
        return {"adjacency_mode": self.adjacency_mode, "max_size": self.max_size,
                "bound_B": self.bound_B,
                "components": [[list(x) for x in c] for c in self.components]}


def connected_components(cs: CharacteristicSet, gamma: DifferenceSet, mode: str = "gamma-step",
                         algebra: DifferenceSet | None = None) -> ComponentReport:
    """Components of ``C`` in the box under single Gamma steps or algebra steps."""
    seed = cs.seed
    B = bound_B(seed.b, seed.d)
    if mode == "gamma-step":
        steps = gamma.nonzero()
    elif mode == "algebra-step":
        if algebra is None:
            algebra = build_algebra(gamma, B)
        steps = algebra.nonzero()
    else:
        raise ValueError(f"unknown adjacency mode {mode!r}")
    pts = cs.points
    if not pts:
        return ComponentReport([], 0, B, mode)
    index = {x: i for i, x in enumerate(pts)}
    rows, cols = [], []
    for i, x in enumerate(pts):
        for g in steps:
            k = index.get(tuple(a + c for a, c in zip(x, g)))
            if k is not None:
                rows.append(i)
                cols.append(k)
    n = len(pts)
    graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    _, labels = _cc(graph, directed=False)
    groups: dict[int, list] = {}
    for i, lab in enumerate(labels):
        groups.setdefault(int(lab), []).append(pts[i])
    comps = sorted((sorted(g) for g in groups.values()), key=lambda c: c[0])
    return ComponentReport(comps, max(len(c) for c in comps), B, mode)


@dataclass
class ComponentBoundCheck:
    ok: bool
    max_size: int
    bound_B: int
    counterexample: list | None = None

    def __bool__(self):
        return self.ok


def verify_component_bound(report: ComponentReport) -> ComponentBoundCheck:
    """Every component has at most B points; otherwise return the largest one."""
    if report.max_size <= report.bound_B:
        return ComponentBoundCheck(True, report.max_size, report.bound_B)
    worst = max(report.components, key=len)
    return ComponentBoundCheck(False, report.max_size, report.bound_B, counterexample=worst)


@dataclass
class DiophantineProfile:
    """Minimal small divisor ``m(N)`` off the characteristics, with a power-law fit."""

    table: list  # rows (N, m(N), argmin point)
    q: float
    cprime: float
    intercept_lsq: float
    box: Box = field(default=None)

    def bound(self, N) -> float:
        return self.cprime * float(N) ** (-self.q)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("N,min_divisor,argmin_point\n")
        for N, m, x in self.table:
            buf.write(f"{N},{m!r},{' '.join(str(c) for c in x)}\n")
        return buf.getvalue()


def _min_divisor_for_n(n, s, roots, keys, seed):
    """min_k | |s| - sqrt(k+1) | over shells k, skipping exact zeros."""
    a = abs(s)
    i = int(np.searchsorted(roots, a))
    best, arg = np.inf, None
    for t in range(max(0, i - 2), min(len(roots), i + 3)):
        val = abs(a - roots[t])
        if val < best:
            if val < _PREFILTER:
                nw = _n_dot_omega_exact(n, seed.omega0)
                root = radical_sqrt_int(keys[t] + 1)
                if (nw + root).is_zero() or (root - nw).is_zero():
                    continue
            best, arg = val, t
    return best, arg


def diophantine_profile(seed: LinearSeed, box: Box) -> DiophantineProfile:
    """m(N) = min |+-n.omega0 + sqrt(j^2+1)| over 1 <= |n|_1 <= N, j in box, off C.

    The exponent ``q`` is the least-squares slope of ``-log m`` against
    ``log N``; ``cprime`` is the largest constant with ``m(N) >= cprime N^-q`` on
    the whole table, so the fitted bound is a certified lower envelope.
    """
    if box.n_radius < 2 or box.j_radius < 1:
        raise ValueError("diophantine_profile needs n_radius >= 2 and j_radius >= 1")
    b, d = seed.dims
    omega = seed.omega0_float
    shells = spatial_shells(d, box.j_radius)
    keys = np.array(sorted(shells))
    roots = np.sqrt(keys + 1.0)
    best_by_shell: dict[int, tuple[float, tuple]] = {}
    for n in time_indices(b, box.n_radius):
        L1 = sum(abs(c) for c in n)
        if L1 == 0:
            continue
        s = float(np.dot(n, omega))
        val, t = _min_divisor_for_n(n, s, roots, keys, seed)
        if t is None:
            continue
        cur = best_by_shell.get(L1)
        if cur is None or val < cur[0]:
            best_by_shell[L1] = (val, tuple(n) + shells[int(keys[t])][0])
    table = []
    run, arg = np.inf, None
    for N in range(1, box.n_radius + 1):
        if N in best_by_shell and best_by_shell[N][0] < run:
            run, arg = best_by_shell[N]
        table.append((N, float(run), arg))
    Ns = np.array([r[0] for r in table], dtype=float)
    ms = np.array([r[1] for r in table])
    if len(np.unique(Ns)) < 3:
        raise ValueError("degenerate fit: fewer than 3 distinct N")
    slope, intercept = np.polyfit(np.log(Ns), np.log(ms), 1)
    q = -float(slope)
    cprime = float(np.min(ms * Ns ** q))
    return DiophantineProfile(table, q, cprime, float(intercept), box)
