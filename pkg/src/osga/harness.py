"""Experiment harness: metrics, config parsing, trace CSV / PGM output,
and the runner that wires instances to solvers."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import baselines, core, problems
from .domains import NonNeg, project
from .trace import TraceRecord

__all__ = [
    "ConfigError",
    "SolverFailure",
    "DegenerateReference",
    "delta_k",
    "psnr",
    "isnr",
    "ExperimentConfig",
    "parse_config",
    "load_config",
    "write_trace_csv",
    "write_pgm",
    "run_experiment",
]

CSV_HEADER = "iter,elapsed_s,f,delta,eta,alpha"

_FAMILIES = ("ridge", "basis_pursuit", "deblur_l22itv", "deblur_l1itv")
_SOLVERS = ("osga", "pga", "psga")


class ConfigError(ValueError):
    """Invalid experiment configuration."""


class SolverFailure(RuntimeError):
    """A solver raised during an experiment run."""


class DegenerateReference(ValueError):
    """f_0 is not above the reference value, so delta_k is undefined."""


def delta_k(f_k: float, f_hat: float, f_0: float) -> float:
    """Relative error of function values (f_k - f_hat) / (f_0 - f_hat)."""
    if f_0 <= f_hat + 1e-15:
        raise DegenerateReference(f"f_0={f_0} not above reference {f_hat}")
    return (f_k - f_hat) / (f_0 - f_hat)


def psnr(x: np.ndarray, x_true: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB for images with values in [0, 1]."""
    x = np.asarray(x, dtype=float)
    x_true = np.asarray(x_true, dtype=float)
    if x.shape != x_true.shape or x.ndim != 2:
        raise ValueError("psnr expects two images of identical 2-D shape")
    err = np.linalg.norm(x - x_true)
    if err == 0.0:
        return math.inf
    m, n = x.shape
    return 20.0 * math.log10(math.sqrt(m * n) / err)


def isnr(x: np.ndarray, y: np.ndarray, x_true: np.ndarray) -> float:
    """Improvement in signal-to-noise ratio of x over the observation y."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x_true = np.asarray(x_true, dtype=float)
    err = np.linalg.norm(x - x_true)
    if err == 0.0:
        return math.inf
    return 20.0 * math.log10(np.linalg.norm(y - x_true) / err)


@dataclass
class ExperimentConfig:
    family: str
    seed: int
    solvers: tuple = ("osga",)
    max_iter: int = 500
    out_dir: str = "results"
    fhat_policy: str = "best_found"
    # ridge / basis pursuit sizes
    n: int = 200
    m: int = 100
    cond: float = 1e6
    noise: float = 0.1
    xi: float = 10.0
    sparsity: int = 5
    # deblurring
    size: int = 64
    lam: float = 1e-4
    noise_level: float = 1e-3
    # baseline tuning
    psga_a: float = 1.0

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ConfigError(f"unknown family {self.family!r}")
        if not self.solvers:
            raise ConfigError("at least one solver required")
        for s in self.solvers:
            if s not in _SOLVERS:
                raise ConfigError(f"unknown solver {s!r}")
        if self.fhat_policy not in ("best_found", "analytic"):
            raise ConfigError(f"unknown fhat policy {self.fhat_policy!r}")
        if self.max_iter < 0:
            raise ConfigError("max_iter must be nonnegative")


_INT_KEYS = {"seed", "max_iter", "n", "m", "sparsity", "size"}
_FLOAT_KEYS = {"cond", "noise", "xi", "lam", "noise_level", "psga_a"}


def parse_config(text: str) -> ExperimentConfig:
    """Parse the flat ``key = value`` config format ('#' starts a comment;
    solvers is a comma-separated list)."""
    kv = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        kv[key] = value
    if "family" not in kv:
        raise ConfigError("missing required key 'family'")
    if "seed" not in kv:
        raise ConfigError("missing required key 'seed'")
    kwargs = {}
    for key, value in kv.items():
        try:
            if key in _INT_KEYS:
                kwargs[key] = int(value)
            elif key in _FLOAT_KEYS:
                kwargs[key] = float(value)
            elif key == "solvers":
                kwargs[key] = tuple(s.strip() for s in value.split(",") if s.strip())
            elif key in ("family", "out_dir", "fhat_policy"):
                kwargs[key] = value
            else:
                raise ConfigError(f"unknown config key {key!r}")
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {value!r}") from exc
    return ExperimentConfig(**kwargs)


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def _fmt(v) -> str:
    return "" if v is None else repr(float(v))


def write_trace_csv(path, records, f_hat=None, f_0=None) -> None:
    """One CSV row per iteration; delta is filled when a reference value
    is supplied.  Absent fields stay empty."""
    lines = [CSV_HEADER]
    for rec in records:
        delta = rec.delta
        if delta is None and f_hat is not None and f_0 is not None and f_0 > f_hat + 1e-15:
            delta = delta_k(rec.f, f_hat, f_0)
        lines.append(
            ",".join(
                [
                    str(rec.iter),
                    _fmt(rec.elapsed),
                    _fmt(rec.f),
                    _fmt(delta),
                    _fmt(rec.eta),
                    _fmt(rec.alpha),
                ]
            )
        )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def write_pgm(path, img, binary: bool = False) -> None:
    """Write a [0, 1] image as 8-bit PGM; P2 (ASCII) or P5 (binary),
    rounding half-up."""
    img = np.asarray(img, dtype=float)
    pix = np.floor(np.clip(img, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)
    m, n = pix.shape
    if binary:
        with open(path, "wb") as fh:
            fh.write(f"P5\n{n} {m}\n255\n".encode("ascii"))
            fh.write(pix.tobytes())
    else:
        rows = [" ".join(str(v) for v in row) for row in pix]
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"P2\n{n} {m}\n255\n" + "\n".join(rows) + "\n")


@dataclass
class _Instance:
    objective: object
    domain: object
    x0: np.ndarray
    x_true: np.ndarray = None
    y_image: np.ndarray = None  # observed image for ISNR / artifacts
    image_shape: tuple = None
    f_min: float = None


def build_instance(cfg: ExperimentConfig) -> _Instance:
    if cfg.family == "ridge":
        inst = problems.gen_ridge(cfg.n, cfg.cond, cfg.noise, cfg.seed, xi=cfg.xi)
        obj = problems.CompositeObjective(inst.A, inst.y, data="l22")
        return _Instance(obj, inst.domain, np.zeros(cfg.n), x_true=inst.x_true)
    if cfg.family == "basis_pursuit":
        inst = problems.gen_basis_pursuit(cfg.m, cfg.n, cfg.sparsity, cfg.seed)

        def l1_obj(x):
            return float(np.abs(x).sum()), np.sign(x)

        return _Instance(l1_obj, inst.domain, inst.domain.particular, x_true=inst.x_true)
    size = cfg.size
    image = problems.phantom(size, size)
    if cfg.family == "deblur_l22itv":
        inst = problems.gen_deblur(image, "uniform9", "gaussian", cfg.noise_level, cfg.seed)
        obj = problems.CompositeObjective(
            inst.A, inst.y.ravel(), data="l22", reg="itv", lam=cfg.lam,
            image_shape=inst.y.shape,
        )
    else:  # deblur_l1itv
        inst = problems.gen_deblur(
            image, "gaussian7", "salt_pepper", cfg.noise_level, cfg.seed
        )
        obj = problems.CompositeObjective(
            inst.A, inst.y.ravel(), data="l1", reg="itv", lam=cfg.lam,
            image_shape=inst.y.shape,
        )
    return _Instance(
        obj,
        NonNeg(),
        np.maximum(inst.y.ravel(), 0.0),
        x_true=inst.x_true,
        y_image=inst.y,
        image_shape=inst.y.shape,
    )


def _run_solver(name, inst, cfg, max_iter=None):
    max_iter = cfg.max_iter if max_iter is None else max_iter
    try:
        if name == "osga":
            params = core.OsgaParams(max_iter=max_iter)
            return core.run(inst.objective, inst.domain, inst.x0, params)
        if name == "pga":
            return baselines.run_pga(inst.objective, inst.domain, inst.x0, max_iter)
        if name == "psga":
            return baselines.run_psga(
                inst.objective, inst.domain, inst.x0, max_iter, a=cfg.psga_a
            )
    except Exception as exc:
        raise SolverFailure(f"solver {name!r} failed: {exc}") from exc
    raise ConfigError(f"unknown solver {name!r}")


def run_experiment(cfg: ExperimentConfig, write_artifacts: bool = True) -> dict:
    """Run every configured solver on the instance, compute metrics, and
    (optionally) write per-solver trace CSVs, a summary CSV, and restored
    images under cfg.out_dir.  Returns the summary as a dict."""
    inst = build_instance(cfg)
    results = {}
    for name in cfg.solvers:
        results[name] = _run_solver(name, inst, cfg)

    if cfg.fhat_policy == "analytic" and inst.f_min is not None:
        f_hat = inst.f_min
    else:
        # Reference value: best seen by any solver, plus one long run.
        _, f_ref, _ = _run_solver(cfg.solvers[0], inst, cfg, max_iter=10 * cfg.max_iter)
        f_hat = min([f_ref] + [f for (_, f, _) in results.values()])

    f_0 = results[cfg.solvers[0]][2][0].f
    summary = {"family": cfg.family, "seed": cfg.seed, "f_hat": f_hat, "solvers": {}}
    if write_artifacts:
        os.makedirs(cfg.out_dir, exist_ok=True)

    for name, (x, f_b, trace) in results.items():
        entry = {"f_b": f_b, "time_s": trace[-1].elapsed, "iters": trace[-1].iter}
        if f_0 > f_hat + 1e-15:
            entry["delta_final"] = delta_k(f_b, f_hat, f_0)
        if inst.image_shape is not None:
            img = np.clip(x.reshape(inst.image_shape), 0.0, 1.0)
            entry["psnr"] = psnr(img, inst.x_true)
            entry["isnr"] = isnr(img, inst.y_image, inst.x_true)
            if write_artifacts:
                write_pgm(
                    os.path.join(cfg.out_dir, f"{name}_restored.pgm"), img, binary=True
                )
        summary["solvers"][name] = entry
        if write_artifacts:
            write_trace_csv(
                os.path.join(cfg.out_dir, f"{name}.csv"), trace, f_hat=f_hat, f_0=f_0
            )

    if write_artifacts:
        if inst.image_shape is not None:
            write_pgm(os.path.join(cfg.out_dir, "observed.pgm"), inst.y_image, binary=True)
            write_pgm(os.path.join(cfg.out_dir, "true.pgm"), inst.x_true, binary=True)
        _write_summary_csv(os.path.join(cfg.out_dir, "summary.csv"), summary)
    return summary


def _write_summary_csv(path, summary) -> None:
    cols = ["solver", "f_b", "delta_final", "psnr", "isnr", "iters", "time_s"]
    lines = [",".join(cols)]
    for name, entry in summary["solvers"].items():
        row = [name]
        for col in cols[1:]:
            v = entry.get(col)
            row.append("" if v is None else (str(v) if col == "iters" else repr(float(v))))
        lines.append(",".join(row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
