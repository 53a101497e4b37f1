"""INI run configuration shared by all subcommands.

Example::

    [seed]
    sites = 1            ; one site per ';', components separated by ','
    amplitudes = 0.01    ; or: delta = 0.01 (all amplitudes equal)
    p = 2

    [h_terms]
    m2 = alpha2.json     ; SpectralCoeffs records, path relative to the config

    [boxes]
    n_radius = 30
    j_radius = 45
    N = 3
    lambda_radius =      ; empty: ceil(|log delta|^1.5)

    [tolerances]
    newton_tol = 1e-11
    max_iter = 30
    epsilon = 0.1
    smallness = 0.1

    [run]
    rng_seed = 0
    genericity_mode = exhaustive
    samples = 200

    [evolve]
    A = 1.5
    K = 10
    perturbation = 0

Every section and key is optional except ``[seed] sites``.
"""
from __future__ import annotations

import configparser
import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .genericity import LinearSeed, SeedError
from .lattice import SpectralCoeffs

__all__ = ["ConfigError", "RunConfig", "load_config", "parse_config"]


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


_SCHEMA = {
    "seed": {"sites", "amplitudes", "delta", "p"},
    "h_terms": None,
    "boxes": {"n_radius", "j_radius", "n", "lambda_radius"},
    "tolerances": {"newton_tol", "max_iter", "epsilon", "smallness"},
    "run": {"rng_seed", "genericity_mode", "samples"},
    "evolve": {"a", "k", "perturbation", "m", "dt"},
}


@dataclass
class RunConfig:
    sites: list
    amplitudes: list
    p: int = 2
    h_terms: list = field(default_factory=list)  # (m, path)
    n_radius: int = 30
    j_radius: int = 45
    N: int = 3
    lambda_radius: int | None = None
    newton_tol: float = 1e-11
    max_iter: int = 30
    epsilon: float = 0.1
    smallness: float = 0.1
    rng_seed: int = 0
    genericity_mode: str = "exhaustive"
    samples: int = 200
    A: float = 1.5
    K: float = 10.0
    perturbation: float = 0.0
    M: int | None = None
    dt: float | None = None
    base_dir: str = field(default=".", compare=False)

    def seed(self, delta: float | None = None) -> LinearSeed:
        """The seed, optionally rescaled so that ``max a_k = delta``."""
        amps = list(self.amplitudes)
        if delta is not None:
            top = max(amps)
            amps = [a * delta / top for a in amps]
        return LinearSeed(self.sites, amps, self.p)

    def load_h_terms(self) -> list:
        dims = (len(self.sites), len(self.sites[0]))
        out = []
        for m, path in self.h_terms:
            full = Path(self.base_dir) / path
            try:
                text = full.read_text()
            except OSError as exc:
                raise ConfigError(f"h_terms.m{m}: cannot read {full}: {exc}") from exc
            out.append((m, SpectralCoeffs.from_json(text, dims=dims)))
        return out

    def canonical(self) -> dict:
        d = asdict(self)
        d.pop("base_dir")
        return d

    def hash(self) -> str:
        text = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def _vectors(text: str, key: str) -> list:
    try:
        return [[int(c) for c in chunk.split(",")] for chunk in text.split(";") if chunk.strip()]
    except ValueError as exc:
        raise ConfigError(f"{key}: expected integer vectors like '1,2; 0,3', got {text!r}") from exc


def _get(section, key, conv, default, name):
    if section is None or key not in section or section[key].strip() == "":
        return default
    raw = section[key].strip()
    try:
        return conv(raw)
    except ValueError as exc:
        raise ConfigError(f"{name}: cannot parse {raw!r} ({exc})") from exc


def parse_config(text: str, base_dir: str = ".") -> RunConfig:
    """Parse and validate configuration text."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    for sec in cp.sections():
        if sec not in _SCHEMA:
            raise ConfigError(f"unknown section [{sec}]")
        allowed = _SCHEMA[sec]
        if allowed is not None:
            for key in cp[sec]:
                if key not in allowed:
                    raise ConfigError(f"{sec}.{key}: unknown key")
    if "seed" not in cp or "sites" not in cp["seed"]:
        raise ConfigError("seed.sites: required")
    s = cp["seed"]
    sites = _vectors(s["sites"], "seed.sites")
    if not sites:
        raise ConfigError("seed.sites: at least one site is required")
    p = _get(s, "p", int, 2, "seed.p")
    amps = _get(s, "amplitudes", lambda t: [float(x) for x in t.replace(";", ",").split(",")],
                None, "seed.amplitudes")
    delta = _get(s, "delta", float, None, "seed.delta")
    if amps is None:
        if delta is None:
            raise ConfigError("seed.amplitudes: give amplitudes or delta")
        amps = [delta] * len(sites)
    elif delta is not None:
        raise ConfigError("seed.delta: give either amplitudes or delta, not both")
    h_terms = []
    if "h_terms" in cp:
        for key, val in cp["h_terms"].items():
            if not key.startswith("m") or not key[1:].isdigit() or int(key[1:]) < 2:
                raise ConfigError(f"h_terms.{key}: keys must be m<k> with k >= 2")
            h_terms.append((int(key[1:]), val.strip()))
        h_terms.sort()
    bx = cp["boxes"] if "boxes" in cp else None
    tl = cp["tolerances"] if "tolerances" in cp else None
    rn = cp["run"] if "run" in cp else None
    ev = cp["evolve"] if "evolve" in cp else None
    cfg = RunConfig(
        sites=sites, amplitudes=amps, p=p, h_terms=h_terms,
        n_radius=_get(bx, "n_radius", int, 30, "boxes.n_radius"),
        j_radius=_get(bx, "j_radius", int, 45, "boxes.j_radius"),
        N=_get(bx, "n", int, 3, "boxes.N"),
        lambda_radius=_get(bx, "lambda_radius", int, None, "boxes.lambda_radius"),
        newton_tol=_get(tl, "newton_tol", float, 1e-11, "tolerances.newton_tol"),
        max_iter=_get(tl, "max_iter", int, 30, "tolerances.max_iter"),
        epsilon=_get(tl, "epsilon", float, 0.1, "tolerances.epsilon"),
        smallness=_get(tl, "smallness", float, 0.1, "tolerances.smallness"),
        rng_seed=_get(rn, "rng_seed", int, 0, "run.rng_seed"),
        genericity_mode=_get(rn, "genericity_mode", str, "exhaustive", "run.genericity_mode"),
        samples=_get(rn, "samples", int, 200, "run.samples"),
        A=_get(ev, "a", float, 1.5, "evolve.A"),
        K=_get(ev, "k", float, 10.0, "evolve.K"),
        perturbation=_get(ev, "perturbation", float, 0.0, "evolve.perturbation"),
        M=_get(ev, "m", int, None, "evolve.M"),
        dt=_get(ev, "dt", float, None, "evolve.dt"),
        base_dir=base_dir,
    )
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig):
    try:
        cfg.seed()
    except SeedError as exc:
        raise ConfigError(f"seed: {exc}") from exc
    checks = [
        (cfg.n_radius >= 1, "boxes.n_radius must be >= 1"),
        (cfg.j_radius >= 1, "boxes.j_radius must be >= 1"),
        (cfg.N >= 1, "boxes.N must be >= 1"),
        (cfg.lambda_radius is None or cfg.lambda_radius >= 1, "boxes.lambda_radius must be >= 1"),
        (cfg.newton_tol > 0, "tolerances.newton_tol must be positive"),
        (cfg.max_iter >= 1, "tolerances.max_iter must be >= 1"),
        (cfg.epsilon > 0, "tolerances.epsilon must be positive"),
        (cfg.smallness > 0, "tolerances.smallness must be positive"),
        (cfg.genericity_mode in ("exhaustive", "sampled"),
         "run.genericity_mode must be 'exhaustive' or 'sampled'"),
        (cfg.samples >= 1, "run.samples must be >= 1"),
        (cfg.A > 0, "evolve.A must be positive"),
        (cfg.K > 0, "evolve.K must be positive"),
        (cfg.perturbation >= 0, "evolve.perturbation must be >= 0"),
        (cfg.M is None or cfg.M >= 8, "evolve.M must be >= 8"),
        (cfg.dt is None or cfg.dt > 0, "evolve.dt must be positive"),
    ]
    for ok, msg in checks:
        if not ok:
            raise ConfigError(msg)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, base_dir=str(path.parent))
