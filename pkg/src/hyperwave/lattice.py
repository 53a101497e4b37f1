"""Sparse space-time Fourier series on the lattice Z^b x Z^d.

A lattice point ``(n, j)`` is stored as one flat integer tuple of length
``b + d``: the first ``b`` entries are the time-harmonic index ``n`` and the
last ``d`` the spatial mode ``j``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Mapping

__all__ = [
    "LatticePoint",
    "SpectralCoeffs",
    "AnalyticNorm",
    "DimensionError",
    "point",
    "split_point",
    "convolve",
    "convolution_power",
    "weighted_norm",
]

LatticePoint = tuple  # flat (n_1..n_b, j_1..j_d)

DROP_BELOW = 1e-300


class DimensionError(ValueError):
    """Series or points with mismatched (b, d)."""


def point(n: Iterable[int], j: Iterable[int]) -> tuple:
    return tuple(int(x) for x in n) + tuple(int(x) for x in j)


def split_point(x: tuple, b: int) -> tuple[tuple, tuple]:
    return x[:b], x[b:]


def _add(x: tuple, y: tuple) -> tuple:
    return tuple(a + c for a, c in zip(x, y))


def _neg(x: tuple) -> tuple:
    return tuple(-a for a in x)


class SpectralCoeffs:
    """Immutable sparse map ``LatticePoint -> complex amplitude``.

    Values may be Python/numpy complex numbers or ``mpmath.mpc``; arithmetic
    only uses ``+``, ``*`` and ``abs``.  ``real`` tags a series with
    ``c(-x) == conj(c(x))``, i.e. one representing a real function.
    """

    __slots__ = ("dims", "_entries", "real")

    def __init__(self, dims: tuple[int, int], entries: Mapping | None = None,
                 real: bool = False):
        b, d = dims
        if b < 1 or d < 1:
            raise DimensionError(f"need b >= 1 and d >= 1, got {dims}")
        self.dims = (int(b), int(d))
        width = b + d
        clean = {}
        for key, val in (entries or {}).items():
            key = tuple(int(k) for k in key)
            if len(key) != width:
                raise DimensionError(f"point {key} does not have length b+d={width}")
            if abs(val) >= DROP_BELOW:
                clean[key] = val
        self._entries = clean
        self.real = bool(real)

    @classmethod
    def delta(cls, dims, x, value=1.0, real=False) -> SpectralCoeffs:
        return cls(dims, {tuple(x): value}, real=real)

    @classmethod
    def identity(cls, dims) -> SpectralCoeffs:
        b, d = dims
        return cls(dims, {(0,) * (b + d): 1.0}, real=True)

    # mapping protocol ----------------------------------------------------
    def __getitem__(self, x) -> complex:
        return self._entries.get(tuple(x), 0.0)

    def get(self, x, default=0.0):
        return self._entries.get(tuple(x), default)

    def __contains__(self, x) -> bool:
        return tuple(x) in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self):
        return iter(self._entries)

    def items(self):
        return self._entries.items()

    def support(self) -> frozenset:
        return frozenset(self._entries)

    def as_dict(self) -> dict:
        return dict(self._entries)

    # algebra ------------------------------------------------------------
    def _check(self, other: SpectralCoeffs):
        if self.dims != other.dims:
            raise DimensionError(f"dims {self.dims} != {other.dims}")

    def __add__(self, other: SpectralCoeffs) -> SpectralCoeffs:
        self._check(other)
        out = dict(self._entries)
        for x, v in other._entries.items():
            out[x] = out.get(x, 0) + v
        return SpectralCoeffs(self.dims, out, real=self.real and other.real)

    def __neg__(self) -> SpectralCoeffs:
        return SpectralCoeffs(self.dims, {x: -v for x, v in self._entries.items()}, self.real)

    def __sub__(self, other: SpectralCoeffs) -> SpectralCoeffs:
        return self + (-other)

    def scale(self, c) -> SpectralCoeffs:
        real = self.real and getattr(c, "imag", 0) == 0
        return SpectralCoeffs(self.dims, {x: c * v for x, v in self._entries.items()}, real)

    def conj_reflect(self) -> SpectralCoeffs:
        """Coefficients of the complex conjugate function: ``x -> conj(c(-x))``."""
        return SpectralCoeffs(self.dims, {_neg(x): _conj(v) for x, v in self._entries.items()},
                              self.real)

    def restrict(self, keep) -> SpectralCoeffs:
        """Entries whose point satisfies ``keep`` (a predicate or a container)."""
        pred = keep if callable(keep) else keep.__contains__
        return SpectralCoeffs(self.dims, {x: v for x, v in self._entries.items() if pred(x)},
                              self.real)

    def symmetry_defect(self) -> float:
        """max |c(-x) - conj(c(x))|; zero for a real-representing series."""
        worst = 0.0
        for x, v in self._entries.items():
            worst = max(worst, float(abs(self.get(_neg(x), 0.0) - _conj(v))))
        return worst

    def max_abs_diff(self, other: SpectralCoeffs) -> float:
        self._check(other)
        keys = set(self._entries) | set(other._entries)
        return max((float(abs(self[k] - other[k])) for k in keys), default=0.0)

    # serialization -------------------------------------------------------
    def to_records(self) -> list[dict]:
        b = self.dims[0]
        recs = []
        for x in sorted(self._entries):
            v = complex(self._entries[x])
            recs.append({"n": list(x[:b]), "j": list(x[b:]), "re": v.real, "im": v.imag})
        return recs

    def to_json(self) -> str:
        return json.dumps(self.to_records(), separators=(",", ":"))

    @classmethod
    def from_records(cls, records, dims=None, real=False) -> SpectralCoeffs:
        records = list(records)
        if dims is None:
            if not records:
                raise DimensionError("cannot infer dims from an empty record list")
            dims = (len(records[0]["n"]), len(records[0]["j"]))
        entries = {}
        for rec in records:
            if len(rec["n"]) != dims[0] or len(rec["j"]) != dims[1]:
                raise DimensionError(f"record {rec} does not match dims {dims}")
            entries[tuple(rec["n"]) + tuple(rec["j"])] = complex(rec["re"], rec["im"])
        return cls(dims, entries, real=real)

    @classmethod
    def from_json(cls, text: str, dims=None, real=False) -> SpectralCoeffs:
        return cls.from_records(json.loads(text), dims=dims, real=real)

    def __repr__(self):
        return f"SpectralCoeffs(dims={self.dims}, nnz={len(self)}, real={self.real})"


def _conj(v):
    c = getattr(v, "conjugate", None)
    return c() if c is not None else v


@dataclass(frozen=True)
class AnalyticNorm:
    """Exponentially weighted l1 norm ``sum |c(n,j)| exp(rho (|n|_1 + |j|_1))``."""

    rho: float = 0.5

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")

    def weight(self, x: tuple) -> float:
        return math.exp(self.rho * sum(abs(k) for k in x))


def convolve(f: SpectralCoeffs, g: SpectralCoeffs) -> SpectralCoeffs:
    """Fourier-space product of two sparse series (direct double loop)."""
    if f.dims != g.dims:
        raise DimensionError(f"cannot convolve dims {f.dims} with {g.dims}")
    out: dict = {}
    gi = list(g.items())
    for x, u in f.items():
        for y, w in gi:
            z = _add(x, y)
            out[z] = out.get(z, 0) + u * w
    return SpectralCoeffs(f.dims, out, real=f.real and g.real)


def convolution_power(f: SpectralCoeffs, m: int) -> SpectralCoeffs:
    """m-fold convolution ``f * f * ... * f`` for ``m >= 1``."""
    if int(m) != m or m < 1:
        raise ValueError(f"convolution_power needs m >= 1, got {m}")
    result = None
    base = f
    m = int(m)
    while m:
        if m & 1:
            result = base if result is None else convolve(result, base)
        m >>= 1
        if m:
            base = convolve(base, base)
    return result


def weighted_norm(f: SpectralCoeffs, nrm: AnalyticNorm = AnalyticNorm()) -> float:
    return float(sum(abs(v) * nrm.weight(x) for x, v in f.items()))


def support_sumset(a: Iterable[tuple], b: Iterable[tuple]) -> set:
    b = list(b)
    return {_add(x, y) for x in a for y in b}


def support_power(a: Iterable[tuple], m: int) -> set:
    """Support of the m-fold convolution of series supported on ``a`` (no cancellation)."""
    a = set(a)
    out = set(a)
    for _ in range(m - 1):
        out = support_sumset(out, a)
    return out
