"""Benchmark configuration: a single YAML file describing one experiment.

Grammar (all keys shown; optional ones marked):

    environment:
      id: pendulum            # pendulum | cartpole | racing
      params: {dt: 0.05}      # optional overrides of the params dataclass
    controller:
      variant: lowpass        # white | lowpass | colored | lifted | spline
      n_rollouts: 64
      horizon: 30
      temperature: 1.0
      sigma: [1.0]            # one entry per control dimension
      fc_hz: 2.0              # lowpass only
      order: 2                # lowpass only
      beta: 1.0               # colored only
      n_knots: 8              # spline only
      smooth_weight: 0.1      # lifted only
    episode:
      n_steps: 300
    seeds: [0, 1, 2]
    sweep:                    # optional; required for `mppikit sweep`
      horizons: [10, 30]
      n_rollouts: [16, 64]
      variants: [white, lowpass]
    spectrum_fit:             # optional; required for `mppikit fit-spectrum`
      reference_csv: spectrum.csv
      family: lowpass
      grid: {fc_hz: [1.0, 2.0, 4.0], order: [1, 2, 4]}
    output_dir: runs/demo

`BenchConfig.resolved()` echoes every field, including defaults, so the
file written next to the results fully reproduces the run.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from mppikit.control import VARIANTS
from mppikit.sampling import SamplerSpec

ENVIRONMENT_IDS = ("pendulum", "cartpole", "racing")

# Sampler family backing each controller variant: lifted perturbs in the
# control-derivative space and spline in knot space, both with white noise.
VARIANT_SAMPLER_KIND = {
    "white": "white",
    "lowpass": "lowpass",
    "colored": "colored",
    "lifted": "white",
    "spline": "white",
}


@dataclass(frozen=True)
class BenchConfig:
    """One experiment: environment, controller, episode shape, seeds."""

    environment_id: str
    controller_variant: str
    n_rollouts: int
    horizon: int
    temperature: float
    sigma: tuple[float, ...]
    n_steps: int
    seeds: tuple[int, ...]
    output_dir: str
    environment_params: dict = field(default_factory=dict)
    fc_hz: float = 0.0
    order: int = 0
    beta: float = 0.0
    n_knots: int = 8
    smooth_weight: float = 0.1
    sweep_horizons: tuple[int, ...] | None = None
    sweep_rollouts: tuple[int, ...] | None = None
    sweep_variants: tuple[str, ...] | None = None
    fit_reference_csv: str | None = None
    fit_family: str | None = None
    fit_grid: dict | None = None

    def __post_init__(self):
        if self.environment_id not in ENVIRONMENT_IDS:
            raise ValueError(f"unknown environment {self.environment_id!r}, "
                             f"expected one of {ENVIRONMENT_IDS}")
        if self.controller_variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.controller_variant!r}, "
                             f"expected one of {VARIANTS}")
        if self.n_steps < 0:
            raise ValueError("episode n_steps must be nonnegative")
        if not self.seeds:
            raise ValueError("seed list must be nonempty")
        for name in ("sweep_horizons", "sweep_rollouts", "sweep_variants"):
            axis = getattr(self, name)
            if axis is not None and len(axis) == 0:
                raise ValueError(f"{name} must be nonempty when present")
        if self.sweep_variants is not None:
            for v in self.sweep_variants:
                if v not in VARIANTS:
                    raise ValueError(f"unknown sweep variant {v!r}")
        if self.fit_family is not None and self.fit_family not in VARIANT_SAMPLER_KIND.values():
            raise ValueError(f"unknown spectrum-fit family {self.fit_family!r}")

    @property
    def has_sweep(self) -> bool:
        return any(axis is not None for axis in
                   (self.sweep_horizons, self.sweep_rollouts, self.sweep_variants))

    def sampler_spec(self, control_rate_hz: float, variant: str | None = None) -> SamplerSpec:
        """The perturbation sampler implied by a variant at a control rate."""
        kind = VARIANT_SAMPLER_KIND[variant or self.controller_variant]
        return SamplerSpec(
            kind=kind,
            sigma=self.sigma,
            control_rate_hz=control_rate_hz,
            beta=self.beta if kind == "colored" else 0.0,
            fc_hz=self.fc_hz if kind == "lowpass" else 0.0,
            order=self.order if kind == "lowpass" else 0,
        )

    @classmethod
    def from_mapping(cls, raw: dict) -> "BenchConfig":
        env = dict(raw.get("environment") or {})
        ctl = dict(raw.get("controller") or {})
        episode = dict(raw.get("episode") or {})
        sweep = raw.get("sweep")
        fit = raw.get("spectrum_fit")
        kwargs = dict(
            environment_id=env.get("id", ""),
            environment_params=dict(env.get("params") or {}),
            controller_variant=ctl.get("variant", ""),
            n_rollouts=int(ctl.get("n_rollouts", 64)),
            horizon=int(ctl.get("horizon", 30)),
            temperature=float(ctl.get("temperature", 1.0)),
            sigma=tuple(float(s) for s in ctl.get("sigma", (1.0,))),
            fc_hz=float(ctl.get("fc_hz", 0.0)),
            order=int(ctl.get("order", 0)),
            beta=float(ctl.get("beta", 0.0)),
            n_knots=int(ctl.get("n_knots", 8)),
            smooth_weight=float(ctl.get("smooth_weight", 0.1)),
            n_steps=int(episode.get("n_steps", 0)),
            seeds=tuple(int(s) for s in raw.get("seeds", ())),
            output_dir=str(raw.get("output_dir", "runs/out")),
        )
        if sweep is not None:
            kwargs["sweep_horizons"] = (tuple(int(h) for h in sweep["horizons"])
                                        if "horizons" in sweep else None)
            kwargs["sweep_rollouts"] = (tuple(int(n) for n in sweep["n_rollouts"])
                                        if "n_rollouts" in sweep else None)
            kwargs["sweep_variants"] = (tuple(str(v) for v in sweep["variants"])
                                        if "variants" in sweep else None)
        if fit is not None:
            kwargs["fit_reference_csv"] = str(fit["reference_csv"])
            kwargs["fit_family"] = str(fit.get("family", "lowpass"))
            kwargs["fit_grid"] = {str(k): [float(x) for x in v]
                                  for k, v in dict(fit.get("grid") or {}).items()}
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path) -> "BenchConfig":
        with open(path) as fh:
            raw = yaml.safe_load(fh)
        if not isinstance(raw, dict):
            raise ValueError(f"config file {path} must hold a mapping")
        return cls.from_mapping(raw)

    def resolved(self) -> dict:
        """Every field, defaults included, in the file grammar's shape."""
        out = {
            "environment": {"id": self.environment_id,
                            "params": dict(self.environment_params)},
            "controller": {
                "variant": self.controller_variant,
                "n_rollouts": self.n_rollouts,
                "horizon": self.horizon,
                "temperature": self.temperature,
                "sigma": list(self.sigma),
                "fc_hz": self.fc_hz,
                "order": self.order,
                "beta": self.beta,
                "n_knots": self.n_knots,
                "smooth_weight": self.smooth_weight,
            },
            "episode": {"n_steps": self.n_steps},
            "seeds": list(self.seeds),
            "output_dir": self.output_dir,
        }
        if self.has_sweep:
            sweep = {}
            if self.sweep_horizons is not None:
                sweep["horizons"] = list(self.sweep_horizons)
            if self.sweep_rollouts is not None:
                sweep["n_rollouts"] = list(self.sweep_rollouts)
            if self.sweep_variants is not None:
                sweep["variants"] = list(self.sweep_variants)
            out["sweep"] = sweep
        if self.fit_reference_csv is not None:
            out["spectrum_fit"] = {"reference_csv": self.fit_reference_csv,
                                   "family": self.fit_family,
                                   "grid": dict(self.fit_grid or {})}
        return out

    def echo(self, directory) -> Path:
        """Write the resolved config next to the results for provenance."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / "config.yaml"
        with open(path, "w") as fh:
            yaml.safe_dump(self.resolved(), fh, sort_keys=True)
        return path
