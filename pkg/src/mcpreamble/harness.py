"""Monte Carlo harness: presets, experiment runner, CSV output.

An experiment is a set of curves (scheme + preamble + estimator) swept
over an Eb/N0 grid against a common set of channel realizations.  All
randomness derives from one master seed through named SeedSequence
branches, and the channel and noise draws are shared between the curves
of an experiment, so compared curves differ only through their preambles
and estimators.

Results aggregate per channel first (mean over noise draws of
||H_hat - H||^2 / ||H||^2), then over channels; the reported standard
error is across channels.  Channels are processed by index through a
plain map, serially or in a process pool, and reduced in index order, so
the output bytes do not depend on the worker count.

Power between compared preambles is always equalized through the
training power ratio (declared training energy per observation window)
against the first curve of the experiment, except where a preset
deliberately matches per-pilot gain instead.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .analysis import closed_form_mse, expected_error_floor, tpr
from .channel import ebn0_to_sigma2, gen_veh_a, propagate
from .config import SystemConfig
from .cpofdm import demodulate, modulate
from .estimation import estimate_from_pilots, project_full
from .oqam import afb, ambiguity, design_prototype, sfb, truncate_prototype
from .preambles import (
    make_full_equal,
    make_sparse_data,
    make_sparse_equal,
)

# seed branch tags
_TAG_CHANNEL = 101
_TAG_NOISE = 301
_TAG_DATA = 201


@dataclass(frozen=True)
class CurveSpec:
    """One curve of an experiment."""

    label: str
    system: str                  # "cpofdm" | "oqam"
    family: str                  # "sparse" | "full" | "sparse_data"
    estimator: str               # "raw" | "projected"
    n_pilots: int | None = None  # sparse families
    scenario: str | None = None  # sparse_data only
    energy_mode: str = "antenna"
    divisor: str = "pseudo"      # oqam full only
    e_scale: float = 1.0         # budget multiplier before equalization
    equalize: bool = False       # match training power to the first curve
    truncate_to: int | None = None  # prototype truncation (oqam)


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    scale: str
    M: int
    L_h: int
    K: int
    E: float
    curves: tuple
    ebn0_db: tuple
    n_channels: int
    n_noise: int
    seed: int
    workers: int = 1

    @property
    def system(self) -> SystemConfig:
        return SystemConfig(M=self.M, L_h=self.L_h, K=self.K, E=self.E)

    def with_(self, **kw) -> "ExperimentConfig":
        return replace(self, **kw)


@dataclass
class MseCurve:
    """Aggregated Monte Carlo result for one curve."""

    label: str
    system: str
    ebn0_db: np.ndarray
    nmse: np.ndarray
    predicted: np.ndarray
    floor: float
    stderr_db: np.ndarray
    n_samples: int

    @property
    def nmse_db(self) -> np.ndarray:
        return 10.0 * np.log10(self.nmse)

    @property
    def predicted_db(self) -> np.ndarray:
        return 10.0 * np.log10(self.predicted)


class _CurveRuntime:
    """Per-process expansion of a CurveSpec: preamble, pulses, scaling."""

    def __init__(self, spec: CurveSpec, cfg: ExperimentConfig):
        self.spec = spec
        sc = cfg.system
        self.sc = sc
        self.proto = None
        self.table = None
        if spec.system == "oqam":
            base = design_prototype(sc.M, sc.K)
            self.proto = (base if spec.truncate_to is None
                          else truncate_prototype(base, spec.truncate_to))
            self.table = ambiguity(self.proto)
        self.scale = 1.0
        e = cfg.E * spec.e_scale
        if spec.family == "sparse_data":
            self.factory = lambda seed: make_sparse_data(
                spec.system, spec.scenario, e, seed, sc,
                proto=self.proto, table=self.table)
            self.base = self.factory(np.random.SeedSequence([cfg.seed, _TAG_DATA, 0]))
        elif spec.family == "sparse":
            self.base = make_sparse_equal(
                spec.system, spec.n_pilots, 0, e, sc,
                proto=self.proto, table=self.table)
            self.factory = None
        elif spec.family == "full":
            self.base = make_full_equal(
                spec.system, e, spec.energy_mode, sc,
                proto=self.proto, table=self.table, divisor=spec.divisor)
            self.factory = None
        else:
            raise ValueError(f"unknown curve family {spec.family!r}")

    def preamble(self, data_seed=None):
        if self.factory is None:
            p = self.base
        else:
            p = self.factory(data_seed)
        return p if self.scale == 1.0 else p.scaled(self.scale)

    def synthesize(self, p):
        if self.spec.system == "cpofdm":
            return modulate(p.x, self.sc).s
        return sfb(p.grid, self.proto, self.sc)

    def receive(self, r, p):
        if self.spec.system == "cpofdm":
            return demodulate(r, self.sc)[p.pilot_idx]
        return afb(r, self.proto, self.sc, [(int(m), 0) for m in p.pilot_idx])

    def estimate(self, y, p):
        if self.spec.estimator == "raw":
            return estimate_from_pilots(y, p, self.sc, mode="raw").H_hat
        if p.n_pilots == self.sc.M:
            raw = estimate_from_pilots(y, p, self.sc, mode="raw").H_hat
            return project_full(raw, self.sc).H_hat
        return estimate_from_pilots(y, p, self.sc, mode="projected").H_hat


def _build_runtimes(cfg: ExperimentConfig) -> list[_CurveRuntime]:
    runtimes = [_CurveRuntime(spec, cfg) for spec in cfg.curves]
    ref = runtimes[0]
    for rt in runtimes[1:]:
        if rt.spec.equalize:
            ratio = tpr(ref.base, rt.base, cfg.system).value
            rt.scale = float(np.sqrt(ratio))
    return runtimes


_RUNTIME_CACHE: dict = {}


def _runtimes_for(cfg: ExperimentConfig) -> list[_CurveRuntime]:
    if cfg not in _RUNTIME_CACHE:
        _RUNTIME_CACHE.clear()
        _RUNTIME_CACHE[cfg] = _build_runtimes(cfg)
    return _RUNTIME_CACHE[cfg]


def _run_channel(args) -> tuple:
    """All trials of one channel: per-curve, per-SNR mean NMSE ratios."""
    cfg, c = args
    sc = cfg.system
    runtimes = _runtimes_for(cfg)
    ch = gen_veh_a(np.random.SeedSequence([cfg.seed, _TAG_CHANNEL, c]), sc)
    H = ch.cfr(sc.M)
    norm_h2 = float(np.sum(np.abs(H) ** 2))
    e_sym = cfg.E / sc.M
    sigmas = [ebn0_to_sigma2(g, e_sym) for g in cfg.ebn0_db]

    ratios = np.zeros((len(runtimes), len(sigmas)))
    floors = np.zeros(len(runtimes))
    for i, rt in enumerate(runtimes):
        static = rt.factory is None
        if static:
            p0 = rt.preamble()
            s0 = rt.synthesize(p0)
        # layout (not data values) determines the expected floor
        rep = rt.base if rt.scale == 1.0 else rt.base.scaled(rt.scale)
        floors[i] = expected_error_floor(
            rep, ch, sc, proto=rt.proto, table=rt.table) / norm_h2
        for t in range(cfg.n_noise):
            if not static:
                p0 = rt.preamble(np.random.SeedSequence([cfg.seed, _TAG_DATA, c, t]))
                s0 = rt.synthesize(p0)
            for k, sig2 in enumerate(sigmas):
                r = propagate(s0, ch.h, sig2,
                              np.random.SeedSequence([cfg.seed, _TAG_NOISE, c, t, k]))
                y = rt.receive(r, p0)
                H_hat = rt.estimate(y, p0)
                err = float(np.sum(np.abs(H_hat - H) ** 2))
                ratios[i, k] += err / norm_h2
    ratios /= cfg.n_noise
    return ratios, floors, 1.0 / norm_h2


def run_experiment(cfg: ExperimentConfig) -> list[MseCurve]:
    """Run all curves of an experiment and aggregate across channels."""
    jobs = [(cfg, c) for c in range(cfg.n_channels)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as ex:
            per_channel = list(ex.map(_run_channel, jobs))
    else:
        per_channel = [_run_channel(j) for j in jobs]

    runtimes = _runtimes_for(cfg)
    sc = cfg.system
    e_sym = cfg.E / sc.M
    sigmas = [ebn0_to_sigma2(g, e_sym) for g in cfg.ebn0_db]
    all_ratios = np.stack([pc[0] for pc in per_channel])   # (c, curve, snr)
    all_floors = np.stack([pc[1] for pc in per_channel])   # (c, curve)
    inv_h2 = np.array([pc[2] for pc in per_channel])

    curves = []
    for i, rt in enumerate(runtimes):
        per_ch = all_ratios[:, i, :]
        nmse = per_ch.mean(axis=0)
        stderr = per_ch.std(axis=0, ddof=1) / np.sqrt(cfg.n_channels)
        stderr_db = 10.0 / np.log(10.0) * stderr / nmse
        rep = rt.base if rt.scale == 1.0 else rt.base.scaled(rt.scale)
        floor = float(all_floors[:, i].mean())
        pred = np.array([
            closed_form_mse(rep, sig2, sc, mode=rt.spec.estimator,
                            proto=rt.proto, table=rt.table).mse
            for sig2 in sigmas
        ]) * inv_h2.mean() + floor
        curves.append(MseCurve(
            label=rt.spec.label, system=rt.spec.system,
            ebn0_db=np.asarray(cfg.ebn0_db, dtype=float),
            nmse=nmse, predicted=pred, floor=floor,
            stderr_db=stderr_db,
            n_samples=cfg.n_channels * cfg.n_noise,
        ))
    return curves


CSV_HEADER = ("preset,scheme,preamble,ebn0_db,nmse_db,nmse_linear,"
              "predicted_db,floor_db,stderr_db,n_samples")


def write_csv(curves: list, path, preset_name: str) -> None:
    """Fixed-format CSV so identical runs give identical bytes."""
    floor_fmt = lambda v: "-inf" if v <= 0 else f"{10.0 * np.log10(v):.10g}"
    with open(path, "w") as fh:
        fh.write(CSV_HEADER + "\n")
        for cu in curves:
            for k, g in enumerate(cu.ebn0_db):
                fh.write(
                    f"{preset_name},{cu.system},{cu.label},{g:.10g},"
                    f"{cu.nmse_db[k]:.10g},{cu.nmse[k]:.12e},"
                    f"{cu.predicted_db[k]:.10g},{floor_fmt(cu.floor)},"
                    f"{cu.stderr_db[k]:.10g},{cu.n_samples}\n"
                )


_DESK = dict(M=128, L_h=8, n_channels=50, n_noise=100)
_PAPER = dict(M=1024, L_h=32, n_channels=200, n_noise=300)

_EBN0_DEFAULT = tuple(float(g) for g in range(0, 35, 5))
_EBN0_LONG = tuple(float(g) for g in range(0, 50, 5))


def _qam(label, family, estimator, **kw):
    return CurveSpec(label=label, system="cpofdm", family=family,
                     estimator=estimator, **kw)


def _oqam(label, family, estimator, **kw):
    return CurveSpec(label=label, system="oqam", family=family,
                     estimator=estimator, **kw)


def preset(
    name: str,
    scale: str = "desk",
    M: int | None = None,
    L_h: int | None = None,
    K: int | None = None,
    E: float | None = None,
    seed: int = 42,
    n_channels: int | None = None,
    n_noise: int | None = None,
    workers: int = 1,
    ebn0_db=None,
) -> ExperimentConfig:
    """Named experiment at desk or paper dimensions, with overrides."""
    if scale not in ("desk", "paper"):
        raise ValueError(f"scale must be 'desk' or 'paper', got {scale!r}")
    dims = dict(_DESK if scale == "desk" else _PAPER)
    spec = _PRESETS.get(name)
    if spec is None:
        raise ValueError(f"unknown preset {name!r} (have {sorted(_PRESETS)})")
    dims.update(spec.get(scale, {}))
    if M is not None:
        dims["M"] = M
    if L_h is not None:
        dims["L_h"] = L_h
    if n_channels is not None:
        dims["n_channels"] = n_channels
    if n_noise is not None:
        dims["n_noise"] = n_noise
    k_eff = K if K is not None else spec.get("K", 4)
    e_eff = E if E is not None else float(dims["M"])
    grid = tuple(ebn0_db) if ebn0_db is not None else spec.get("ebn0", _EBN0_DEFAULT)
    curves = spec["curves"](dims["M"], dims["L_h"])
    return ExperimentConfig(
        name=name, scale=scale, M=dims["M"], L_h=dims["L_h"], K=k_eff,
        E=e_eff, curves=tuple(curves), ebn0_db=grid,
        n_channels=dims["n_channels"], n_noise=dims["n_noise"],
        seed=seed, workers=workers,
    )


def preset_names() -> list:
    return sorted(_PRESETS)


_PRESETS = {
    # full-grid vs sparse CP-OFDM at equal training energy
    "fig1a": dict(K=4, curves=lambda M, L: [
        _qam("full-raw", "full", "raw"),
        _qam("sparse", "sparse", "projected", n_pilots=L, equalize=True),
    ]),
    "fig1b": dict(K=4, curves=lambda M, L: [
        _qam("full-projected", "full", "projected"),
        _qam("sparse", "sparse", "projected", n_pilots=L, equalize=True),
    ]),
    # more pilots at the same per-pilot gain (unequalized) or same energy
    "fig2a": dict(K=4, curves=lambda M, L: [
        _qam("sparse-Lh", "sparse", "projected", n_pilots=L),
        _qam("sparse-2Lh-samegain", "sparse", "projected", n_pilots=2 * L,
             e_scale=2.0),
    ]),
    "fig2b": dict(K=4, curves=lambda M, L: [
        _qam("sparse-Lh", "sparse", "projected", n_pilots=L),
        _qam("sparse-2Lh", "sparse", "projected", n_pilots=2 * L,
             equalize=True),
    ]),
    # pilots sharing the symbol with data, power equalized
    "fig3": dict(K=4, curves=lambda M, L: [
        _qam("sparse", "sparse", "projected", n_pilots=L),
        _qam("sparse-data", "sparse_data", "projected", scenario="qam-sd",
             equalize=True),
    ]),
    # full-grid vs sparse OQAM
    "fig4a": dict(K=4, curves=lambda M, L: [
        _oqam("full-pseudo-raw", "full", "raw"),
        _oqam("sparse", "sparse", "projected", n_pilots=L, equalize=True),
    ]),
    "fig4b": dict(K=4, curves=lambda M, L: [
        _oqam("full-pseudo-projected", "full", "projected"),
        _oqam("sparse", "sparse", "projected", n_pilots=L, equalize=True),
    ]),
    "fig5": dict(K=4, curves=lambda M, L: [
        _oqam("sparse-Lh", "sparse", "projected", n_pilots=L),
        _oqam("sparse-2Lh", "sparse", "projected", n_pilots=2 * L,
              equalize=True),
    ]),
    "fig6": dict(K=4, ebn0=_EBN0_LONG, curves=lambda M, L: [
        _oqam("sparse", "sparse", "projected", n_pilots=L),
        _oqam("sparse-data-3", "sparse_data", "projected", scenario="oqam-3",
              equalize=True),
    ]),
    # cross-system comparisons at equal training power per window
    "fig7a": dict(K=3, paper=dict(M=512, L_h=32), curves=lambda M, L: [
        _qam("qam-sparse", "sparse", "projected", n_pilots=L),
        _oqam("oqam-sparse", "sparse", "projected", n_pilots=L,
              equalize=True),
    ]),
    "fig7b": dict(K=4, paper=dict(M=1024, L_h=32), curves=lambda M, L: [
        _qam("qam-sparse", "sparse", "projected", n_pilots=L),
        _oqam("oqam-sparse", "sparse", "projected", n_pilots=L,
              equalize=True),
    ]),
    # truncated-prototype OQAM against CP-OFDM in (almost) equal windows
    "fig8a": dict(K=2, paper=dict(M=512, L_h=32), curves=lambda M, L: [
        _qam("qam-sparse", "sparse", "projected", n_pilots=L),
        _oqam("oqam-truncated", "sparse", "projected", n_pilots=L,
              truncate_to=M + L - 1, equalize=True),
    ]),
    "fig8b": dict(K=4, paper=dict(M=1024, L_h=32), curves=lambda M, L: [
        _qam("qam-sparse", "sparse", "projected", n_pilots=L),
        _oqam("oqam-truncated", "sparse", "projected", n_pilots=L,
              truncate_to=M + L - 1, equalize=True),
    ]),
}
