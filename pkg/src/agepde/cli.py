"""Command-line front end: TOML config in, delimited reports and figures out.

Config layout (defaults in parentheses; unknown keys are rejected):

[grid]        T (required), a_max (= T), extents ([1.0]), n_x (required),
              n_char (16) or step (exclusive with n_char)
[model]       diffusion ("identity" | "sin_drift"), d_value (1.0),
              drift_amplitude (0.1), c_lower (1.0), m_upper (0.0),
              source ("zero" | "linear_death" | "logistic" |
              "von_bertalanffy" | "arrhenius" | "holder_power" |
              "lotka_von_foerster"), alpha (1.0), l_f (0.0),
              source_params ({}), bc ("dirichlet" | "robin"),
              surface ("zero" | "linear" | "power"), sigma (0.0),
              beta (1.0), l_s (0.0), m_flux (0.0), c0 (2.0)
[weights]     m0 (8.0), m (= m0), k (1.0), eta0 (0.05), mu0 (= T + a_max),
              p (2.0, only the quadratic family is implemented),
              m_sweep ([8, 16, 32])
[cutoff]      t1 (T/4), t2 (T/2), a1 (a_max/4), a2 (a_max/2), t3, a3,
              order (2)
[experiment]  seed (0), corpus (20), eps (1e-6), j_sweep ([1, 2, 4]),
              tau (0.05), n_steps (64), levels (3), chi (1.0),
              recovery (0.2), sigmas ([0.0, 0.5, 2.0]),
              robin_m_sweep ([16, 32, 64]), corrupt ("")
[output]      dir ("out"), figures (true)

Exit codes: 0 all emitted checks passed, 1 at least one check failed,
2 usage or configuration error, 3 numerical failure (solver divergence,
stalled power iteration, inconsistent flux data).  AGEPDE_THREADS caps
the worker pool used for parameter sweeps.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import tomli

from .errors import (
    AgepdeError,
    FluxMismatch,
    LinearSolveDiverged,
    MissingKeyError,
    PowerIterationStalled,
    PreconditionViolated,
    StiffSourceStep,
    UnknownKeyError,
)
from .grid import build_grid
from .model import SourceSpec, SurfaceSpec, isotropic_diffusion, sin_drift_diffusion
from .solver import Scenario, solve_forward
from .carleman import (
    CutoffSpec,
    compute_constants_dirichlet,
    compute_constants_robin,
    estimate_trace_constant,
)
from . import experiments, figures

__all__ = ["main", "parse_config", "write_report", "RunConfig"]


# ---------------------------------------------------------------------------
# schema-driven config parsing

_REQUIRED = object()


def _positive(x) -> bool:
    return x > 0


def _nonneg(x) -> bool:
    return x >= 0


def _unit_interval(x) -> bool:
    return 0.0 < x <= 1.0


# key -> (expected description, default, coercion check)
_SCHEMA: dict[str, dict[str, tuple]] = {
    "grid": {
        "T": ("positive real", _REQUIRED, _positive),
        "a_max": ("positive real", None, _positive),
        "extents": ("list of 1 or 2 positive reals", [1.0], None),
        "n_x": ("positive integer", _REQUIRED, _positive),
        "n_char": ("positive integer", None, _positive),
        "step": ("positive real", None, _positive),
    },
    "model": {
        "diffusion": ("'identity' or 'sin_drift'", "identity", None),
        "d_value": ("positive real", 1.0, _positive),
        "drift_amplitude": ("nonnegative real", 0.1, _nonneg),
        "c_lower": ("positive real", 1.0, _positive),
        "m_upper": ("nonnegative real", 0.0, _nonneg),
        "source": ("a known source kind", "zero", None),
        "alpha": ("real in (0,1]", 1.0, _unit_interval),
        "l_f": ("nonnegative real", 0.0, _nonneg),
        "source_params": ("table of reals", {}, None),
        "bc": ("'dirichlet' or 'robin'", "dirichlet", None),
        "surface": ("'zero', 'linear' or 'power'", "zero", None),
        "sigma": ("real", 0.0, None),
        "beta": ("real in (0,1]", 1.0, _unit_interval),
        "l_s": ("nonnegative real", 0.0, _nonneg),
        "m_flux": ("nonnegative real", 0.0, _nonneg),
        "c0": ("positive real", 2.0, _positive),
    },
    "weights": {
        "m0": ("real >= 1", 8.0, lambda x: x >= 1),
        "m": ("real >= 1", None, lambda x: x >= 1),
        "k": ("positive real", 1.0, _positive),
        "eta0": ("positive real", 0.05, _positive),
        "mu0": ("positive real", None, _positive),
        "p": ("the value 2 (quadratic norms)", 2.0, lambda x: x == 2),
        "m_sweep": ("increasing list of reals >= 1", [8.0, 16.0, 32.0], None),
    },
    "cutoff": {
        "t1": ("nonnegative real", None, _nonneg),
        "t2": ("positive real", None, _positive),
        "a1": ("nonnegative real", None, _nonneg),
        "a2": ("positive real", None, _positive),
        "t3": ("positive real", None, _positive),
        "a3": ("positive real", None, _positive),
        "order": ("integer >= 2", 2, lambda x: x >= 2),
    },
    "experiment": {
        "seed": ("nonnegative integer", 0, _nonneg),
        "corpus": ("positive integer", 20, _positive),
        "eps": ("nonnegative real", 1e-6, _nonneg),
        "j_sweep": ("list of positive integers", [1, 2, 4], None),
        "tau": ("positive real", 0.05, _positive),
        "n_steps": ("positive integer", 64, _positive),
        "levels": ("integer >= 2", 3, lambda x: x >= 2),
        "chi": ("real", 1.0, None),
        "recovery": ("nonnegative real", 0.2, _nonneg),
        "sigmas": ("list of reals", [0.0, 0.5, 2.0], None),
        "robin_m_sweep": ("increasing list of reals >= 1", [16.0, 32.0, 64.0], None),
        "corrupt": ("inequality id or empty", "", None),
    },
    "output": {
        "dir": ("path string", "out", None),
        "figures": ("boolean", True, None),
    },
}

_INT_KEYS = {
    ("grid", "n_x"), ("grid", "n_char"), ("cutoff", "order"),
    ("experiment", "seed"), ("experiment", "corpus"),
    ("experiment", "n_steps"), ("experiment", "levels"),
}
_STR_KEYS = {
    ("model", "diffusion"), ("model", "source"), ("model", "bc"),
    ("model", "surface"), ("experiment", "corrupt"), ("output", "dir"),
}
_LIST_KEYS = {
    ("grid", "extents"), ("weights", "m_sweep"), ("experiment", "j_sweep"),
    ("experiment", "sigmas"), ("experiment", "robin_m_sweep"),
}
_ENUMS = {
    ("model", "diffusion"): ("identity", "sin_drift"),
    ("model", "source"): (
        "zero", "linear_death", "logistic", "von_bertalanffy",
        "arrhenius", "holder_power", "lotka_von_foerster",
    ),
    ("model", "bc"): ("dirichlet", "robin"),
    ("model", "surface"): ("zero", "linear", "power"),
}


@dataclass
class RunConfig:
    grid: dict = field(default_factory=dict)
    model: dict = field(default_factory=dict)
    weights: dict = field(default_factory=dict)
    cutoff: dict = field(default_factory=dict)
    experiment: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)

    def section(self, name: str) -> dict:
        return getattr(self, name)


def _type_error(section: str, key: str) -> TypeError:
    expect = _SCHEMA[section][key][0]
    return TypeError(f"{section}.{key} expects {expect}")


def _coerce(section: str, key: str, raw):
    if (section, key) == ("output", "figures"):
        if not isinstance(raw, bool):
            raise _type_error(section, key)
        return raw
    if (section, key) in _STR_KEYS:
        if not isinstance(raw, str):
            raise _type_error(section, key)
        allowed = _ENUMS.get((section, key))
        if allowed and raw not in allowed:
            raise _type_error(section, key)
        return raw
    if (section, key) in _LIST_KEYS:
        if not isinstance(raw, list) or not raw or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw
        ):
            raise _type_error(section, key)
        if key == "j_sweep":
            if any(int(v) != v or v < 1 for v in raw):
                raise _type_error(section, key)
            return [int(v) for v in raw]
        out = [float(v) for v in raw]
        if key in ("m_sweep", "robin_m_sweep"):
            if any(v < 1 for v in out) or any(b <= a for a, b in zip(out, out[1:])):
                raise _type_error(section, key)
        if key == "extents" and (len(out) not in (1, 2) or any(v <= 0 for v in out)):
            raise _type_error(section, key)
        return out
    if (section, key) == ("model", "source_params"):
        if not isinstance(raw, dict) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw.values()
        ):
            raise _type_error(section, key)
        return {k: float(v) for k, v in raw.items()}
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise _type_error(section, key)
    if (section, key) in _INT_KEYS:
        if int(raw) != raw:
            raise _type_error(section, key)
        value = int(raw)
    else:
        value = float(raw)
    check = _SCHEMA[section][key][2]
    if check is not None and not check(value):
        raise _type_error(section, key)
    return value


def parse_config(source, overrides: list[str] | None = None) -> RunConfig:
    """Validate a TOML file, path, or pre-parsed dict into a RunConfig.

    ``overrides`` holds ``section.key=value`` strings with the same
    meaning as editing the file before parsing.
    """
    if isinstance(source, dict):
        data = {k: dict(v) for k, v in source.items()}
    else:
        with open(source, "rb") as f:
            data = tomli.load(f)
    for item in overrides or []:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ValueError(f"override {item!r} is not of the form section.key=value")
        target, raw_value = item.split("=", 1)
        section, key = target.split(".", 1)
        try:
            value = tomli.loads(f"v = {raw_value}")["v"]
        except tomli.TOMLDecodeError:
            value = raw_value
        data.setdefault(section, {})[key] = value

    for section in data:
        if section not in _SCHEMA:
            raise UnknownKeyError(section)
    cfg = RunConfig()
    for section, schema in _SCHEMA.items():
        given = data.get(section, {})
        if not isinstance(given, dict):
            raise UnknownKeyError(section)
        for key in given:
            if key not in schema:
                raise UnknownKeyError(f"{section}.{key}")
        out = {}
        for key, (_desc, default, _check) in schema.items():
            if key in given:
                out[key] = _coerce(section, key, given[key])
            elif default is _REQUIRED:
                raise MissingKeyError(f"{section}.{key}")
            elif default is not None:
                out[key] = default
        cfg.section(section).update(out)

    g = cfg.grid
    if "step" in g and "n_char" in g:
        raise ValueError("grid.step conflicts with grid.n_char; give exactly one")
    if "step" not in g:
        g.setdefault("n_char", 16)
    g.setdefault("a_max", g["T"])
    w = cfg.weights
    w.setdefault("m", w["m0"])
    w.setdefault("mu0", g["T"] + g["a_max"])
    c = cfg.cutoff
    c.setdefault("t1", g["T"] / 4.0)
    c.setdefault("t2", g["T"] / 2.0)
    c.setdefault("a1", g["a_max"] / 4.0)
    c.setdefault("a2", g["a_max"] / 2.0)
    return cfg


# ---------------------------------------------------------------------------
# config -> model objects


def _build_grid(cfg: RunConfig):
    g = cfg.grid
    kwargs = {"step": g["step"]} if "step" in g else {"n_char": g["n_char"]}
    return build_grid(g["T"], g["a_max"], g["extents"], g["n_x"], **kwargs)


def _build_diffusion(cfg: RunConfig, dim: int):
    m = cfg.model
    if m["diffusion"] == "identity":
        return isotropic_diffusion(m["d_value"], dim)
    return sin_drift_diffusion(dim, base=m["d_value"], amplitude=m["drift_amplitude"])


def _build_source(cfg: RunConfig) -> SourceSpec:
    m = cfg.model
    return SourceSpec(m["source"], m["source_params"], alpha=m["alpha"], l_f=m["l_f"])


def _build_surface(cfg: RunConfig) -> SurfaceSpec | None:
    m = cfg.model
    if m["bc"] != "robin":
        return None
    return SurfaceSpec(
        m["surface"], sigma=m["sigma"], beta=m["beta"], l_s=m["l_s"], m_bar=m["m_flux"]
    )


def _constants_params(cfg: RunConfig) -> dict:
    m, w = cfg.model, cfg.weights
    params = {
        "c_lower": m["c_lower"], "m_upper": m["m_upper"], "k": w["k"],
        "m0": w["m0"], "mu0": w["mu0"], "eta0": w["eta0"],
        "alpha": m["alpha"], "l_f": m["l_f"], "m": w["m"],
    }
    if m["bc"] == "robin":
        params.update(m_flux=m["m_flux"], c0=m["c0"], beta=m["beta"], l_s=m["l_s"])
    return params


def _cutoff_spec(cfg: RunConfig) -> CutoffSpec:
    c = cfg.cutoff
    return CutoffSpec(
        t1=c["t1"], t2=c["t2"], a1=c["a1"], a2=c["a2"],
        t3=c.get("t3"), a3=c.get("a3"), order=c["order"],
    )


# ---------------------------------------------------------------------------
# report writing

_HEADERS = {
    "decay": "m,bound,corner_norm,pass",
    "amplification": "j,tau,predicted,measured",
    "convergence": "level,h_x,h_s,error,order_x,order_s",
}


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_report(
    out_dir,
    decay=None,
    amplification=None,
    convergence=None,
    suite=None,
) -> list[Path]:
    """Write whichever artifact lists are given; return the paths written.

    Empty lists are written as a header-only CSV (or an empty JSON array
    for the suite), so downstream consumers always find the schema.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    if decay is not None:
        lines = [_HEADERS["decay"]]
        for r in decay:
            lines.append(",".join([_fmt(r.m), _fmt(r.bound), _fmt(r.corner_norm), _fmt(r.passed)]))
        p = out / "decay.csv"
        p.write_text("\n".join(lines) + "\n")
        paths.append(p)
    if amplification is not None:
        lines = [_HEADERS["amplification"]]
        for r in amplification:
            lines.append(",".join([_fmt(r.j), _fmt(r.tau), _fmt(r.predicted), _fmt(r.measured)]))
        p = out / "amplification.csv"
        p.write_text("\n".join(lines) + "\n")
        paths.append(p)
    if convergence is not None:
        lines = [_HEADERS["convergence"]]
        for r in convergence:
            lines.append(",".join([
                _fmt(r.level), _fmt(r.h_x), _fmt(r.h_s), _fmt(r.error),
                _fmt(r.order_x), _fmt(r.order_s),
            ]))
        p = out / "convergence.csv"
        p.write_text("\n".join(lines) + "\n")
        paths.append(p)
    if suite is not None:
        p = out / "suite.json"
        p.write_text(json.dumps([r.as_json_dict() for r in suite], indent=2) + "\n")
        paths.append(p)
    return paths


def _maybe_figure(cfg: RunConfig, render) -> None:
    if cfg.output["figures"]:
        render()


# ---------------------------------------------------------------------------
# subcommands


def _cmd_solve(cfg: RunConfig) -> int:
    grid = _build_grid(cfg)
    x = tuple(np.meshgrid(*grid.centers, indexing="ij"))
    base = np.ones(grid.spatial_shape)
    if cfg.model["bc"] == "dirichlet":
        base = np.sin(np.pi * x[0] / grid.extents[0])
        for ax in range(1, grid.dim):
            base = base * np.sin(np.pi * x[ax] / grid.extents[ax])
    initial = np.exp(-grid.a_nodes)[(slice(None),) + (None,) * grid.dim] * base
    inflow = np.exp(-grid.t_nodes)[(slice(None),) + (None,) * grid.dim] * base
    scn = Scenario(
        grid=grid,
        diffusion=_build_diffusion(cfg, grid.dim),
        source=_build_source(cfg),
        bc=cfg.model["bc"],
        surface=_build_surface(cfg),
        initial=initial,
        inflow=inflow,
    )
    rep = solve_forward(scn)
    out = Path(cfg.output["dir"])
    out.mkdir(parents=True, exist_ok=True)
    summary = {
        "steps": rep.steps,
        "total_cg_iterations": rep.total_cg_iterations,
        "max_cg_iterations": rep.max_cg_iterations,
        "max_source_lipschitz": rep.max_source_lipschitz,
        "min": float(rep.u.values.min()),
        "max": float(rep.u.values.max()),
    }
    (out / "solve.json").write_text(json.dumps(summary, indent=2) + "\n")
    _maybe_figure(cfg, lambda: figures.plot_terminal_slice(rep.u, out / "solve.png"))
    print(f"solve: {rep.steps} implicit steps, field range "
          f"[{summary['min']:.4g}, {summary['max']:.4g}]")
    return 0


def _cmd_mms(cfg: RunConfig) -> int:
    rows = experiments.run_mms(levels=cfg.experiment["levels"], dim=len(cfg.grid["extents"]))
    paths = write_report(cfg.output["dir"], convergence=rows)
    _maybe_figure(cfg, lambda: figures.plot_convergence(rows, Path(cfg.output["dir"]) / "convergence.png"))
    last = rows[-1]
    print(f"mms: {len(rows)} levels, finest error {last.error:.3e}, "
          f"orders x={last.order_x:.3f} s={last.order_s:.3f} -> {paths[0]}")
    return 0


def _cmd_carleman(cfg: RunConfig) -> int:
    e = cfg.experiment
    res = experiments.run_carleman_suite(
        seed=e["seed"],
        corpus=e["corpus"],
        m_sweep=tuple(cfg.weights["m_sweep"]),
        robin_m_sweep=tuple(e["robin_m_sweep"]),
        sigmas=tuple(e["sigmas"]),
        corrupt=e["corrupt"] or None,
    )
    out = Path(cfg.output["dir"])
    paths = write_report(out, suite=res.reports)
    _maybe_figure(cfg, lambda: figures.plot_suite(res.reports, out / "suite.png"))
    n_pass = sum(1 for r in res.reports if r.passed)
    print(f"carleman: {n_pass}/{len(res.reports)} checks passed -> {paths[0]}")
    if not res.passed:
        print("failed inequalities: " + ", ".join(res.failed_ids))
        return 1
    return 0


def _cmd_uniqueness(cfg: RunConfig) -> int:
    e = cfg.experiment
    res = experiments.run_uniqueness_decay(
        seed=e["seed"], delta=e["eps"], m_sweep=tuple(cfg.weights["m_sweep"])
    )
    out = Path(cfg.output["dir"])
    paths = write_report(out, decay=res.table.rows)
    summary = {
        "fitted_slope": res.table.fitted_slope,
        "expected_slope": res.table.expected_slope,
        "corner_norm": res.table.corner_norm,
        "defect_ratio": res.defect_ratio,
        "params": res.params,
    }
    (out / "uniqueness.json").write_text(json.dumps(summary, indent=2) + "\n")
    _maybe_figure(cfg, lambda: figures.plot_decay(res.table.rows, out / "decay.png"))
    ok = all(r.passed for r in res.table.rows)
    print(f"uniqueness: corner norm {res.table.corner_norm:.3e}, slope "
          f"{res.table.fitted_slope:.4f} (expected {res.table.expected_slope:.4f}) -> {paths[0]}")
    return 0 if ok else 1


def _cmd_backward(cfg: RunConfig) -> int:
    e = cfg.experiment
    rows = experiments.run_backward_amplification(
        j_sweep=tuple(e["j_sweep"]),
        tau=e["tau"],
        n_steps=e["n_steps"],
        n_x=cfg.grid["n_x"],
        d_value=cfg.model["d_value"],
        eps=e["eps"],
    )
    out = Path(cfg.output["dir"])
    paths = write_report(out, amplification=rows)
    _maybe_figure(cfg, lambda: figures.plot_amplification(rows, out / "amplification.png"))
    desc = ", ".join(f"j={r.j}: {r.measured:.3g}/{r.predicted:.3g}" for r in rows)
    print(f"backward: measured/predicted {desc} -> {paths[0]}")
    return 0


def _cmd_epidemic(cfg: RunConfig) -> int:
    e = cfg.experiment
    res = experiments.run_epidemic_demo(
        chi=e["chi"], recovery=e["recovery"],
        n_char=cfg.grid.get("n_char", 16), n_x=cfg.grid["n_x"],
    )
    out = Path(cfg.output["dir"])
    out.mkdir(parents=True, exist_ok=True)
    lines = ["t,susceptible,infected,total"]
    for t, s, i in zip(res.times, res.susceptible, res.infected):
        lines.append(",".join([repr(float(t)), repr(float(s)), repr(float(i)), repr(float(s + i))]))
    p = out / "epidemic.csv"
    p.write_text("\n".join(lines) + "\n")
    _maybe_figure(cfg, lambda: figures.plot_epidemic(res, out / "epidemic.png"))
    print(f"epidemic: min value {res.min_value:.3e}, final totals "
          f"S={res.susceptible[-1]:.4f} I={res.infected[-1]:.4f} -> {p}")
    return 0


def _cmd_trace(cfg: RunConfig) -> int:
    grid = _build_grid(cfg)
    c0 = estimate_trace_constant(grid)
    study = experiments.run_trace_study(dim=grid.dim)
    out = Path(cfg.output["dir"])
    out.mkdir(parents=True, exist_ok=True)
    summary = {
        "c0": c0,
        "dim": grid.dim,
        "study": [{"n_x": n, "c0": v} for n, v in study.rows],
        "relative_change": study.relative_change,
    }
    (out / "trace.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(f"trace: c0 = {c0:.6f} (dim {grid.dim}), "
          f"refinement drift {study.relative_change:.2%}")
    return 0


def _cmd_constants(cfg: RunConfig) -> int:
    params = _constants_params(cfg)
    if cfg.model["bc"] == "robin":
        c = compute_constants_robin(params)
        payload = {
            "family": "robin",
            "field_coeff": c.field_coeff,
            "dual_coeff": c.dual_coeff,
            "field_coeff_ref": c.field_coeff_ref,
            "dual_coeff_ref": c.dual_coeff_ref,
            "grad_coeff": c.grad_coeff,
            "grad_coeff_ref": c.grad_coeff_ref,
            "energy_coeff": c.energy_coeff,
            "conditions": {
                "field_coeff_positive": c.field_coeff_positive.ok,
                "ellipticity_margin": c.ellipticity_margin.ok,
                "absorption_half": c.absorption_half.ok,
                "source_bound": c.source_bound.ok,
            },
            "max_horizon": c.max_horizon,
        }
    else:
        c = compute_constants_dirichlet(params)
        payload = {
            "family": "dirichlet",
            "grad_coeff": c.grad_coeff,
            "grad_coeff_ref": c.grad_coeff_ref,
            "energy_coeff": c.energy_coeff,
            "conditions": {
                "ellipticity_margin": c.ellipticity_margin.ok,
                "source_bound": c.source_bound.ok,
            },
            "max_horizon": c.max_horizon,
        }
    out = Path(cfg.output["dir"])
    out.mkdir(parents=True, exist_ok=True)
    (out / "constants.json").write_text(json.dumps(payload, indent=2) + "\n")
    shown = {k: v for k, v in payload.items() if isinstance(v, float)}
    print("constants: " + ", ".join(f"{k}={v:.6g}" for k, v in shown.items()))
    return 0


_COMMANDS = {
    "solve": _cmd_solve,
    "mms": _cmd_mms,
    "carleman": _cmd_carleman,
    "uniqueness": _cmd_uniqueness,
    "backward": _cmd_backward,
    "epidemic": _cmd_epidemic,
    "trace": _cmd_trace,
    "constants": _cmd_constants,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="agepde",
        description="Age-structured reaction-diffusion laboratory",
        epilog="AGEPDE_THREADS caps sweep parallelism; see the module "
        "docstring for the config schema.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("config", help="TOML run configuration")
        p.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="SECTION.KEY=VALUE",
            help="override a config value (repeatable)",
        )
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        cfg = parse_config(args.config, args.overrides)
        return _COMMANDS[args.command](cfg)
    except (MissingKeyError, UnknownKeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except KeyError as exc:
        print(f"config error: missing model.source_params key {exc}", file=sys.stderr)
        return 2
    except (TypeError, ValueError, OSError, tomli.TOMLDecodeError, PreconditionViolated) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (LinearSolveDiverged, StiffSourceStep, PowerIterationStalled, FluxMismatch) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except AgepdeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
