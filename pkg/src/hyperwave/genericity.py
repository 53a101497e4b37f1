"""Genericity of linear seed solutions, decided in exact arithmetic.

The seed ``u0 = sum_k a_k exp(-i sqrt(j_k^2+1) t) exp(i j_k x)`` has Fourier
support ``{(-e_k, j_k)}`` on Z^{b+d}.  From it we build the stencil ``Gamma``
(support of ``(u0 + conj u0)^{*p}``), the set of short sums ``algebra``
and the exceptional one-parameter families, and test the three algebraic
conditions that make the seed generic.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .lattice import SpectralCoeffs, convolution_power
from .radicals import RadicalNumber, radical_det, radical_sqrt_int

__all__ = [
    "SeedError",
    "LinearSeed",
    "DifferenceSet",
    "Verdict",
    "GenericityCertificate",
    "bound_B",
    "bound_Bprime",
    "build_gamma",
    "build_algebra",
    "build_exceptional_G",
    "in_exceptional_G",
    "lw_functions",
    "check_condition_i",
    "check_condition_ii",
    "check_condition_iii",
    "characteristic_branch",
    "certify",
    "verify_witness",
    "nongeneric_measure_estimate",
]

HOLDS = "holds"
FAILS = "fails"
PARTIAL = "partially-verified"


class SeedError(ValueError):
    """Seed data violating the linear-solution invariants."""


def bound_B(b: int, d: int) -> int:
    """Maximal size of a connected set on the characteristics."""
    return (d + 1) * (d + 2) // 2 + b * (b + 1)


def bound_Bprime(d: int) -> int:
    return (d + 1) * (d + 2) // 2


@dataclass(frozen=True)
class LinearSeed:
    """Finite-support solution of the linear equation.

    Parameters
    ----------
    sites : sequence of int vectors
        Spatial Fourier sites ``j_k``, pairwise distinct and nonzero.
    amplitudes : sequence of float
        Positive amplitudes ``a_k``.
    p : int
        Degree of the leading nonlinearity ``v^(p+1)``.
    """

    sites: tuple
    amplitudes: tuple
    p: int
    omega0: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        sites = tuple(tuple(int(c) for c in np.atleast_1d(s)) for s in self.sites)
        if not sites:
            raise SeedError("a seed needs at least one site (b >= 1)")
        d = len(sites[0])
        if d < 1 or any(len(s) != d for s in sites):
            raise SeedError(f"all sites must have the same length d >= 1, got {sites}")
        for k, s in enumerate(sites):
            if not any(s):
                raise SeedError(f"site j_{k + 1} = {s} violates j_k != 0")
        if len(set(sites)) != len(sites):
            raise SeedError(f"sites {sites} violate j_k != j_k' for k != k'")
        amps = tuple(float(a) for a in self.amplitudes)
        if len(amps) != len(sites):
            raise SeedError(f"got {len(amps)} amplitudes for {len(sites)} sites")
        if any(not a > 0 for a in amps):
            raise SeedError(f"amplitudes must be positive, got {amps}")
        if int(self.p) != self.p or self.p < 1:
            raise SeedError(f"nonlinearity degree p must be an integer >= 1, got {self.p}")
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "p", int(self.p))
        object.__setattr__(self, "omega0",
                           tuple(radical_sqrt_int(sum(c * c for c in s) + 1) for s in sites))

    @property
    def b(self) -> int:
        return len(self.sites)

    @property
    def d(self) -> int:
        return len(self.sites[0])

    @property
    def dims(self) -> tuple[int, int]:
        return (self.b, self.d)

    @property
    def delta(self) -> float:
        return max(self.amplitudes)

    @property
    def omega0_float(self) -> np.ndarray:
        return np.array([float(w) for w in self.omega0])

    def with_amplitudes(self, amplitudes) -> LinearSeed:
        return LinearSeed(self.sites, tuple(amplitudes), self.p)

    def support_point(self, k: int) -> tuple:
        """``(-e_k, j_k)`` as a flat lattice tuple."""
        n = [0] * self.b
        n[k] = -1
        return tuple(n) + self.sites[k]

    def conj_support_point(self, k: int) -> tuple:
        return tuple(-c for c in self.support_point(k))

    def resonant_set(self) -> frozenset:
        """Support of ``u0`` together with that of its conjugate."""
        pts = [self.support_point(k) for k in range(self.b)]
        pts += [self.conj_support_point(k) for k in range(self.b)]
        return frozenset(pts)

    def series(self, amplitudes=None) -> SpectralCoeffs:
        amps = self.amplitudes if amplitudes is None else amplitudes
        return SpectralCoeffs(self.dims, {self.support_point(k): amps[k] for k in range(self.b)})

    def conj_series(self, amplitudes=None) -> SpectralCoeffs:
        return self.series(amplitudes).conj_reflect()

    def real_series(self, amplitudes=None) -> SpectralCoeffs:
        """Coefficients of ``u0 + conj(u0)``."""
        s = self.series(amplitudes)
        return SpectralCoeffs(self.dims, (s + s.conj_reflect()).as_dict(), real=True)

    def to_dict(self) -> dict:
        return {"sites": [list(s) for s in self.sites], "amplitudes": list(self.amplitudes),
                "p": self.p}


@dataclass
class DifferenceSet:
    """Set of lattice differences with the minimal number of Gamma steps for each."""

    elements: dict
    kind: str
    dims: tuple
    partial: bool = False

    def __contains__(self, x) -> bool:
        return tuple(x) in self.elements

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(sorted(self.elements))

    def length(self, x) -> int:
        return self.elements[tuple(x)]

    def nonzero(self) -> list:
        zero = (0,) * sum(self.dims)
        return [x for x in sorted(self.elements) if x != zero]


def build_gamma(seed: LinearSeed) -> DifferenceSet:
    """Support of ``(u0 + conj u0)^{*p}`` by enumerating exponent splits."""
    b, d = seed.dims
    out = {}
    # 2b slots: p_k on (-e_k, j_k) and p'_k on (e_k, -j_k)
    for combo in itertools.combinations_with_replacement(range(2 * b), seed.p):
        m = [0] * b
        for slot in combo:
            if slot < b:
                m[slot] += 1
            else:
                m[slot - b] -= 1
        dn = tuple(-c for c in m)
        dj = tuple(sum(m[k] * seed.sites[k][c] for k in range(b)) for c in range(d))
        out[dn + dj] = 1
    zero = (0,) * (b + d)
    if zero in out:
        out[zero] = 0
    return DifferenceSet(out, "Gamma", seed.dims)


def build_algebra(gamma: DifferenceSet, B: int, cap: int = 2_000_000) -> DifferenceSet:
    """All sums of at most ``B`` elements of ``gamma`` (the neutral element pads)."""
    if B < 0:
        raise ValueError(f"B must be nonnegative, got {B}")
    zero = (0,) * sum(gamma.dims)
    steps = [g for g in gamma.nonzero()]
    lengths = {zero: 0}
    frontier = [zero]
    partial = False
    for level in range(1, B + 1):
        nxt = []
        for x in frontier:
            for g in steps:
                y = tuple(a + c for a, c in zip(x, g))
                if y not in lengths:
                    lengths[y] = level
                    nxt.append(y)
        frontier = nxt
        if len(lengths) > cap:
            partial = True
            break
        if not frontier:
            break
    return DifferenceSet(lengths, "AlgebraA", gamma.dims, partial=partial)


def build_exceptional_G(seed: LinearSeed, bound: int) -> DifferenceSet:
    """Explicit listing of the exceptional families with ``0 < |alpha| <= bound``."""
    if bound < 1:
        raise ValueError(f"bound must be >= 1, got {bound}")
    b, d = seed.dims
    out = {}
    for alpha in range(-bound, bound + 1):
        if alpha == 0:
            continue
        for k in range(b):
            dn = [0] * b
            dn[k] = -alpha
            out[tuple(dn) + tuple(alpha * c for c in seed.sites[k])] = 1
            for k2 in range(b):
                if k2 == k:
                    continue
                dn = [0] * b
                dn[k2] += alpha
                dn[k] -= alpha
                dj = tuple(alpha * (x - y) for x, y in zip(seed.sites[k], seed.sites[k2]))
                out[tuple(dn) + dj] = 1
    return DifferenceSet(out, "ExceptionalG", seed.dims)


def in_exceptional_G(elem, seed: LinearSeed) -> bool:
    """Exact membership in the (infinite) exceptional set."""
    b = seed.b
    dn, dj = tuple(elem[:b]), tuple(elem[b:])
    nz = [k for k in range(b) if dn[k] != 0]
    if len(nz) == 1:
        k = nz[0]
        alpha = -dn[k]
        return dj == tuple(alpha * c for c in seed.sites[k])
    if len(nz) == 2:
        k1, k2 = nz
        if dn[k1] != -dn[k2]:
            return False
        # alpha (e_k' - e_k, j_k - j_k') with k the negative slot
        k, kp = (k1, k2) if dn[k1] < 0 else (k2, k1)
        alpha = dn[kp]
        return dj == tuple(alpha * (x - y) for x, y in zip(seed.sites[k], seed.sites[kp]))
    return False


def _dn_dot_omega(dn, omega) -> RadicalNumber:
    acc = RadicalNumber()
    for c, w in zip(dn, omega):
        if c:
            acc = acc + w * c
    return acc


def _sq(x):
    return x * x


def lw_functions(elem, seed: LinearSeed, omega=None):
    """Coefficients ``L = (a_m, b_mm', c_m)`` and ``W`` of the quadratic resonance equations.

    Returns ``(L, W)`` with ``L`` a list of ``d(d+3)/2`` exact numbers.
    """
    omega = seed.omega0 if omega is None else omega
    b, d = seed.dims
    dn, dj = elem[:b], elem[b:]
    s = _dn_dot_omega(dn, omega)
    s2 = s * s
    dj2 = sum(c * c for c in dj)
    a = [4 * dj[m] ** 2 - 4 * s2 for m in range(d)]
    bb = [RadicalNumber.rational(8 * dj[m] * dj[m2])
          for m, m2 in itertools.combinations(range(d), 2)]
    base = 4 * dj2 - 4 * s2
    c = [base * dj[m] for m in range(d)]
    W = _sq(dj2 - s2) - 4 * s2
    return a + bb + c, W


def _cond_i_quantities(elem, seed, omega=None):
    omega = seed.omega0 if omega is None else omega
    b = seed.b
    s = _dn_dot_omega(elem[:b], omega)
    s2 = s * s
    dj2 = sum(c * c for c in elem[b:])
    return {
        "Sigma+": s2 + dj2,
        "Sigma-": -s2 + dj2,
        "W": _sq(-s2 + dj2) - 4 * s2,
    }


@dataclass
class Verdict:
    status: str
    tested: int = 0
    total: int | None = None
    witness: dict | None = None
    note: str = ""

    @property
    def coverage(self) -> float:
        if self.total in (None, 0):
            return 1.0
        return self.tested / self.total

    def to_dict(self) -> dict:
        out = {"status": self.status, "tested": self.tested, "total": self.total,
               "coverage": self.coverage}
        if self.witness is not None:
            out["witness"] = self.witness
        if self.note:
            out["note"] = self.note
        return out


def check_condition_i(seed: LinearSeed, algebra: DifferenceSet, omega=None) -> Verdict:
    """Sigma_+, Sigma_- and W nonzero on every nonzero algebra element.

    ``omega`` overrides the frequencies (exact numbers); only used to exercise
    the checker on synthetic non-generic data.
    """
    tested = 0
    for elem in algebra.nonzero():
        tested += 1
        for name, val in _cond_i_quantities(elem, seed, omega).items():
            if val.is_zero():
                return Verdict(FAILS, tested, len(algebra) - 1, witness={
                    "condition": "i", "element": list(elem), "quantity": name,
                    "value": str(val)})
    status = PARTIAL if algebra.partial else HOLDS
    return Verdict(status, tested, len(algebra) - 1,
                   note="algebra truncated by capacity guard" if algebra.partial else "")


class _MinorTable:
    """Memoized minors of a B' x (B'-1) matrix by Laplace expansion."""

    def __init__(self, rows):
        self.rows = rows
        self.memo = {}

    def minor(self, r: tuple, c: tuple):
        key = (r, c)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        if len(r) == 1:
            val = self.rows[r[0]][c[0]]
        else:
            val = RadicalNumber()
            top = self.rows[r[0]]
            for t, col in enumerate(c):
                e = top[col]
                if e.is_zero():
                    continue
                sub = self.minor(r[1:], c[:t] + c[t + 1:])
                if sub.is_zero():
                    continue
                term = e * sub
                val = val + term if t % 2 == 0 else val - term
        self.memo[key] = val
        return val


def _check_sigma(sigma, seed, omega=None):
    """Return None if the determinant condition holds for ``sigma``, else a witness."""
    Bp = len(sigma)
    rows, W = [], []
    for elem in sigma:
        L, w = lw_functions(elem, seed, omega)
        rows.append(L)
        W.append(w)
    table = _MinorTable(rows)
    ncols = Bp - 1
    for rho in range(1, Bp):
        for R in itertools.combinations(range(Bp), rho + 1):
            for C in itertools.combinations(range(ncols), rho):
                minors = []
                for i in range(rho + 1):
                    m = table.minor(R[:i] + R[i + 1:], C)
                    if m.is_zero():
                        break
                    minors.append(m)
                else:
                    D = RadicalNumber()
                    for i, m in enumerate(minors):
                        term = W[R[i]] * m
                        D = D + term if (i + rho) % 2 == 0 else D - term
                    if D.is_zero():
                        return {"condition": "ii", "sigma": [list(e) for e in sigma],
                                "rho": rho, "rows": list(R), "cols": list(C), "value": str(D)}
    return None


def _eligible_for_ii(seed, algebra):
    b = seed.b
    return [e for e in algebra.nonzero()
            if any(e[b:]) and not in_exceptional_G(e, seed)]


def _has_antipodal(sigma) -> bool:
    s = set(sigma)
    return any(tuple(-c for c in x) in s for x in sigma)


def _count_antipodal_free(n_pairs: int, n_single: int, k: int) -> int:
    # choose k elements from n_pairs antipodal pairs (at most one per pair) and n_single others
    return sum(math.comb(n_pairs, i) * 2 ** i * math.comb(n_single, k - i)
               for i in range(0, k + 1))


def check_condition_ii(seed: LinearSeed, algebra: DifferenceSet, mode: str = "exhaustive",
                       samples: int = 200, rng_seed: int = 0, cap: int = 1_000_000,
                       omega=None, exclude_antipodal: bool = True) -> Verdict:
    """Determinant condition on B'-subsets of the non-exceptional algebra elements.

    ``mode="exhaustive"`` enumerates every subset when there are at most ``cap``
    of them and otherwise falls back to ``samples`` seeded random subsets.

    With ``exclude_antipodal`` (default) subsets holding both ``x`` and ``-x``
    are skipped: ``a_m``, ``b_mm'`` and ``W`` are even in the element, so such a
    pair makes a 2x2 determinant vanish identically for every choice of sites.
    """
    Bp = bound_Bprime(seed.d)
    eligible = _eligible_for_ii(seed, algebra)
    if exclude_antipodal:
        elig = set(eligible)
        n_pairs = sum(1 for x in eligible if tuple(-c for c in x) in elig) // 2
        total = _count_antipodal_free(n_pairs, len(eligible) - 2 * n_pairs, Bp)
    else:
        total = math.comb(len(eligible), Bp)
    if total == 0:
        return Verdict(HOLDS, 0, 0, note="vacuous: no eligible subsets")
    note = ""
    if mode == "exhaustive" and total <= cap:
        subsets = (sg for sg in itertools.combinations(eligible, Bp)
                   if not (exclude_antipodal and _has_antipodal(sg)))
    else:
        if mode == "exhaustive":
            note = f"{total} subsets exceed cap {cap}; sampled {samples} instead"
        rng = np.random.default_rng(rng_seed)
        chosen = []
        seen = set()
        draws = 0
        while draws < samples:
            idx = tuple(sorted(rng.choice(len(eligible), size=Bp, replace=False).tolist()))
            if exclude_antipodal and _has_antipodal([eligible[i] for i in idx]):
                continue
            draws += 1
            if idx not in seen:
                seen.add(idx)
                chosen.append(idx)
        subsets = (tuple(eligible[i] for i in idx) for idx in chosen)
    tested = 0
    for sigma in subsets:
        tested += 1
        wit = _check_sigma(sigma, seed, omega)
        if wit is not None:
            return Verdict(FAILS, tested, total, witness=wit, note=note)
    status = HOLDS if (tested == total and not algebra.partial) else PARTIAL
    return Verdict(status, tested, total, note=note)


def characteristic_branch(x, seed: LinearSeed):
    """Return '+', '-' or None: exact membership of ``x`` in C_+ / C_-."""
    b = seed.b
    s = _dn_dot_omega(x[:b], seed.omega0)
    r = radical_sqrt_int(sum(c * c for c in x[b:]) + 1)
    if (s + r).is_zero():
        return "+"
    if (r - s).is_zero():
        return "-"
    return None


def check_condition_iii(seed: LinearSeed, box=None) -> Verdict:
    """supp (u0 + conj u0)^{*(p+1)} avoids the characteristics outside the resonant set."""
    ones = seed.real_series(amplitudes=[1.0] * seed.b)
    support = sorted(convolution_power(ones, seed.p + 1).support())
    if box is not None:
        n_rad, j_rad = box
        b = seed.b
        for x in support:
            if sum(abs(c) for c in x[:b]) > n_rad or max(abs(c) for c in x[b:]) > j_rad:
                raise ValueError(f"box {box} does not contain support point {x}")
    S = seed.resonant_set()
    for x in support:
        if x in S:
            continue
        branch = characteristic_branch(x, seed)
        if branch is not None:
            return Verdict(FAILS, len(support), len(support), witness={
                "condition": "iii", "point": list(x), "branch": branch, "value": "0"})
    return Verdict(HOLDS, len(support), len(support))


def verify_witness(seed: LinearSeed, witness: dict) -> bool:
    """Re-derive a failing quantity from its witness; True iff it is exactly zero."""
    cond = witness["condition"]
    if cond == "i":
        vals = _cond_i_quantities(tuple(witness["element"]), seed)
        return vals[witness["quantity"]].is_zero()
    if cond == "ii":
        sigma = [tuple(e) for e in witness["sigma"]]
        rows, W = [], []
        for elem in sigma:
            L, w = lw_functions(elem, seed)
            rows.append(L)
            W.append(w)
        R, C = witness["rows"], witness["cols"]
        mat = [[rows[r][c] for c in C] + [W[r]] for r in R]
        return radical_det(mat).is_zero()
    if cond == "iii":
        x = tuple(witness["point"])
        return characteristic_branch(x, seed) == witness["branch"]
    raise ValueError(f"unknown condition {cond!r}")


@dataclass
class GenericityCertificate:
    seed: LinearSeed
    verdicts: dict
    counts: dict

    @property
    def generic(self) -> bool:
        return all(v.status != FAILS for v in self.verdicts.values())

    @property
    def fully_verified(self) -> bool:
        return all(v.status == HOLDS for v in self.verdicts.values())

    def to_dict(self) -> dict:
        return {
            "seed": self.seed.to_dict(),
            "generic": self.generic,
            "verdicts": {k: v.to_dict() for k, v in sorted(self.verdicts.items())},
            "counts": dict(sorted(self.counts.items())),
        }


def certify(seed: LinearSeed, mode: str = "exhaustive", samples: int = 200,
            rng_seed: int = 0, cap: int = 1_000_000,
            exclude_antipodal: bool = True) -> GenericityCertificate:
    """Run all three genericity conditions for ``seed``."""
    gamma = build_gamma(seed)
    algebra = build_algebra(gamma, bound_B(seed.b, seed.d))
    v1 = check_condition_i(seed, algebra)
    v2 = check_condition_ii(seed, algebra, mode=mode, samples=samples, rng_seed=rng_seed,
                            cap=cap, exclude_antipodal=exclude_antipodal)
    v3 = check_condition_iii(seed)
    counts = {"gamma": len(gamma), "algebra": len(algebra), "B": bound_B(seed.b, seed.d),
              "Bprime": bound_Bprime(seed.d),
              "eligible_ii": len(_eligible_for_ii(seed, algebra))}
    return GenericityCertificate(seed, {"i": v1, "ii": v2, "iii": v3}, counts)


# Monte Carlo estimate of the non-generic set ------------------------------

def _algebra_m_vectors(b: int, p: int, B: int) -> np.ndarray:
    """Nonzero m in Z^b with (Delta n, Delta j) = (-m, sum m_k j_k) in the algebra."""
    steps = set()
    for combo in itertools.combinations_with_replacement(range(2 * b), p):
        m = [0] * b
        for slot in combo:
            m[slot % b] += 1 if slot < b else -1
        steps.add(tuple(m))
    steps.discard((0,) * b)
    seen = {(0,) * b}
    frontier = [(0,) * b]
    for _ in range(B):
        nxt = []
        for x in frontier:
            for g in steps:
                y = tuple(a + c for a, c in zip(x, g))
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    seen.discard((0,) * b)
    return np.array(sorted(seen), dtype=float).reshape(-1, b)


@dataclass
class MeasureEstimate:
    fraction: float
    violating: int
    samples: int
    extra: dict = field(default_factory=dict)


def _violates(M, sites, threshold):
    sites = np.atleast_2d(np.asarray(sites, dtype=float))
    omega = np.sqrt((sites ** 2).sum(axis=1) + 1.0)
    dj = M @ sites
    s = -(M @ omega)
    s2 = s * s
    dj2 = (dj ** 2).sum(axis=1)
    minus = dj2 - s2
    W = minus ** 2 - 4 * s2
    return bool(np.any(np.abs(dj2 + s2) < threshold) or np.any(np.abs(minus) < threshold)
                or np.any(np.abs(W) < threshold))


def nongeneric_measure_estimate(d: int, b: int, p: int, samples: int, rng_seed: int = 0,
                                radius: float = 5.0, threshold: float = 1e-9,
                                extra_sites=()) -> MeasureEstimate:
    """Fraction of uniformly sampled real site tuples violating condition (i) numerically.

    Sites are drawn from ``[-radius, radius]^(b d)``.  ``extra_sites`` (integer
    seeds) are evaluated with the same threshold and reported separately.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    M = _algebra_m_vectors(b, p, bound_B(b, d))
    rng = np.random.default_rng(rng_seed)
    bad = 0
    for _ in range(samples):
        sites = rng.uniform(-radius, radius, size=(b, d))
        if _violates(M, sites, threshold):
            bad += 1
    extra = {tuple(map(tuple, np.atleast_2d(s).astype(int).tolist())):
             _violates(M, s, threshold) for s in extra_sites}
    return MeasureEstimate(bad / samples, bad, samples, extra)
