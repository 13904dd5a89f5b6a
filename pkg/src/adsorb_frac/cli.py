"""Batch front end: ``adsorb-frac <mode> --config FILE [--set section.key=value]...``.

Configuration is an INI file.  Sections and keys::

    [model]          isotherm = henry|langmuir|frumkin|volmer|vdw
                     beta_tilde = 0          (dimensionless block only)
    [dimensionless]  Ba, f_e                 (exactly one of these two blocks)
    [physical]       D, K_a, K, Gamma_inf, c_e, beta = 0, kT = 1, sigma0 = 0
    [mesh]           regions = default | end:step, end:step, ...
    [solver]         formulation = auto|wt|exp|hybrid
                     corrector_iterations = 0
    [output]         subsurface = false      (adds a c_s column)
    [sweep]          parameter = dimensionless.Ba
                     values = 0.01, 0.1, 1
                     run = solve|henry|asymptote|compare
                     workers = <int>
    [classify]       Er = 0.01, lower = 0.01, upper = 100

Every key can be overridden on the command line with ``--set section.key=value``.

Exit status: 0 success, 2 configuration error, 3 model-validity error,
4 accuracy error (including clamped samples under ``--strict``), 1 I/O error.
"""

from __future__ import annotations

import argparse
import configparser
import io
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import henry_dc, henry_mixed
from .asymptotes import (
    coverage_asymptote,
    first_order,
    first_order_langmuir,
    henry_reference,
    pressure_asymptote,
    second_order_langmuir,
    second_order_volmer,
)
from .errors import AccuracyError, ConfigError, DomainError, ModelValidityError, ProvenanceError, RangeError
from .isotherms import Isotherm, IsothermKind
from .scaling import (
    DimensionlessParams,
    PhysicalParams,
    characteristic_times,
    classify_regime,
    regime_bounds,
    subsurface_ratio,
    to_dimensionless,
)
from .solver import build_mesh, solve, time_factor
from .solver.mesh import Mesh

__all__ = ["RunConfig", "load_config", "run", "emit_csv", "main", "MODES"]

MODES = ("solve", "henry", "asymptote", "compare", "sweep", "classify")
RUN_MODES = ("solve", "henry", "asymptote", "compare")

EXIT_OK = 0
EXIT_IO = 1
EXIT_CONFIG = 2
EXIT_VALIDITY = 3
EXIT_ACCURACY = 4

_KNOWN = {
    "model": {"isotherm", "beta_tilde"},
    "dimensionless": {"ba", "f_e"},
    "physical": {"d", "k_a", "k", "gamma_inf", "c_e", "beta", "kt", "sigma0"},
    "mesh": {"regions"},
    "solver": {"formulation", "corrector_iterations"},
    "output": {"subsurface"},
    "sweep": {"parameter", "values", "run", "workers"},
    "classify": {"er", "lower", "upper"},
}
_PHYSICAL_NAMES = {
    "d": "D", "k_a": "K_a", "k": "K", "gamma_inf": "Gamma_inf",
    "c_e": "c_e", "beta": "beta", "kt": "kT", "sigma0": "sigma0",
}
_DISPLAY = {"ba": "Ba"}


@dataclass(frozen=True)
class RunConfig:
    """A fully parsed and validated run description."""

    mode: str
    params: DimensionlessParams
    physical: PhysicalParams | None = None
    mesh: Mesh | None = None
    formulation: str = "auto"
    corrector_iterations: int = 0
    subsurface: bool = False
    strict: bool = False
    out: Path | None = None
    sweep_parameter: tuple[str, str] | None = None
    sweep_values: tuple[float, ...] = ()
    sweep_run: str = "solve"
    workers: int | None = None
    er: float = 0.01
    lower: float = 1e-2
    upper: float = 1e2
    raw: dict = field(default_factory=dict, repr=False, compare=False)

    def effective_mesh(self) -> Mesh:
        if self.mesh is not None:
            return self.mesh
        return build_mesh(diffusion_controlled=self.params.Ba == 0.0)


def _float(section, key, text):
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"[{section}] {key} = {text!r} is not a number") from None
    return value


def _bool(section, key, text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"[{section}] {key} = {text!r} is not a boolean")


def _read_sections(text: str, overrides) -> dict:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse configuration: {exc}") from None
    data = {s.lower(): {k.lower(): v for k, v in parser.items(s)} for s in parser.sections()}
    for item in overrides:
        name, sep, value = item.partition("=")
        section, dot, key = name.strip().partition(".")
        if not sep or not dot or not key:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        data.setdefault(section.lower(), {})[key.lower()] = value.strip()
    for section, keys in data.items():
        if section not in _KNOWN:
            raise ConfigError(f"unknown section [{section}]")
        unknown = set(keys) - _KNOWN[section]
        if unknown:
            raise ConfigError(f"unknown key(s) in [{section}]: {', '.join(sorted(unknown))}")
    return data


def _params_from(data: dict) -> tuple[DimensionlessParams, PhysicalParams | None]:
    model = data.get("model", {})
    name = model.get("isotherm", "henry")
    try:
        kind = IsothermKind.parse(name)
    except ModelValidityError as exc:
        raise ConfigError(str(exc)) from None
    has_dim = "dimensionless" in data
    has_phys = "physical" in data
    if has_dim == has_phys:
        raise ConfigError("exactly one of [dimensionless] and [physical] must be given")
    if has_dim:
        block = data["dimensionless"]
        missing = {"ba", "f_e"} - set(block)
        if missing:
            raise ConfigError(f"[dimensionless] is missing {', '.join(sorted(missing))}")
        beta = _float("model", "beta_tilde", model.get("beta_tilde", "0"))
        iso = Isotherm(kind, beta)
        Ba = _float("dimensionless", "Ba", block["ba"])
        f_e = _float("dimensionless", "f_e", block["f_e"])
        return DimensionlessParams(Ba, f_e, iso), None
    if "beta_tilde" in model:
        raise ConfigError("with [physical] parameters give the interaction as physical.beta")
    block = data["physical"]
    required = {"d", "k_a", "k", "gamma_inf", "c_e"}
    missing = required - set(block)
    if missing:
        raise ConfigError(f"[physical] is missing {', '.join(sorted(missing))}")
    values = {_PHYSICAL_NAMES[k]: _float("physical", k, v) for k, v in block.items()}
    p = PhysicalParams(**values)
    return to_dimensionless(p, kind), p


def load_config(mode: str, text: str = "", overrides=(), *, out=None, strict=False) -> RunConfig:
    """Parse configuration text plus ``section.key=value`` overrides.

    Raises
    ------
    ConfigError
        For syntax errors, unknown sections or keys, or missing blocks.
    ModelValidityError
        For parameter values outside a model's domain.
    """
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}; expected one of {', '.join(MODES)}")
    data = _read_sections(text, overrides)
    dp, phys = _params_from(data)

    regions = data.get("mesh", {}).get("regions")
    mesh = build_mesh(regions) if regions is not None else None

    solver = data.get("solver", {})
    formulation = solver.get("formulation", "auto").strip().lower()
    try:
        corr = int(solver.get("corrector_iterations", "0"))
    except ValueError:
        raise ConfigError("[solver] corrector_iterations must be an integer") from None

    subsurface = _bool("output", "subsurface", data.get("output", {}).get("subsurface", "false"))

    sweep = data.get("sweep", {})
    sweep_parameter = None
    sweep_values: tuple[float, ...] = ()
    sweep_run = sweep.get("run", "solve").strip().lower()
    workers = None
    if mode == "sweep":
        if "parameter" not in sweep or "values" not in sweep:
            raise ConfigError("sweep mode needs [sweep] parameter and values")
        target = sweep["parameter"].strip().lower()
        section, dot, key = target.partition(".")
        if not dot:
            section, key = ("physical" if phys is not None else "dimensionless"), target
        if section not in ("model", "dimensionless", "physical") or key not in _KNOWN[section] - {"isotherm"}:
            raise ConfigError(f"cannot sweep over {sweep['parameter']!r}")
        if section not in data and section != "model":
            raise ConfigError(f"sweep parameter {target!r} refers to a block that is not configured")
        sweep_parameter = (section, key)
        sweep_values = tuple(
            _float("sweep", "values", v) for v in sweep["values"].split(",") if v.strip()
        )
        if not sweep_values:
            raise ConfigError("[sweep] values is empty")
        if sweep_run not in RUN_MODES:
            raise ConfigError(f"[sweep] run must be one of {', '.join(RUN_MODES)}")
        if "workers" in sweep:
            try:
                workers = int(sweep["workers"])
            except ValueError:
                raise ConfigError("[sweep] workers must be an integer") from None
            if workers < 1:
                raise ConfigError("[sweep] workers must be at least 1")

    cls = data.get("classify", {})
    er = _float("classify", "Er", cls.get("er", "0.01"))
    lower = _float("classify", "lower", cls.get("lower", "0.01"))
    upper = _float("classify", "upper", cls.get("upper", "100"))
    if not 0.0 < lower < upper:
        raise ConfigError("[classify] needs 0 < lower < upper")

    return RunConfig(
        mode=mode, params=dp, physical=phys, mesh=mesh, formulation=formulation,
        corrector_iterations=corr, subsurface=subsurface, strict=strict,
        out=Path(out) if out is not None else None, sweep_parameter=sweep_parameter,
        sweep_values=sweep_values, sweep_run=sweep_run, workers=workers,
        er=er, lower=lower, upper=upper, raw=data,
    )


# ---------------------------------------------------------------- tables


@dataclass
class Table:
    """Named numeric columns plus ``#`` provenance lines."""

    provenance: list
    columns: dict

    def __len__(self):
        return len(next(iter(self.columns.values()))) if self.columns else 0


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def emit_csv(table: Table, path=None) -> str:
    """Serialize ``table`` and write it to ``path`` (if given); return the text.

    Identical tables produce byte-identical output.
    """
    buf = io.StringIO()
    for key, value in table.provenance:
        buf.write(f"# {key} = {value}\n")
    names = list(table.columns)
    buf.write(",".join(names) + "\n")
    cols = [np.asarray(table.columns[n], dtype=float) for n in names]
    for row in zip(*cols):
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8", newline="")
    return text


def _provenance(cfg: RunConfig, mode: str, mesh: Mesh, formulation: str, extra=()):
    dp = cfg.params
    lines = [("adsorb_frac", __version__), ("mode", mode)]
    lines += [(k, v if isinstance(v, str) else repr(float(v))) for k, v in dp.groups().items()]
    if cfg.physical is not None:
        p = cfg.physical
        lines += [(f"physical.{k}", repr(getattr(p, k)))
                  for k in ("D", "K_a", "K", "Gamma_inf", "c_e", "beta", "kT", "sigma0")]
    lines += [("mesh", mesh.digest()), ("mesh_regions", "; ".join(f"{e!r}:{h!r}" for e, h in mesh.regions))]
    lines += [("formulation", formulation)]
    lines += list(extra)
    return lines


def _relative_error(value, reference):
    reference = np.asarray(reference, dtype=float)
    return np.abs(np.asarray(value) - reference) / np.maximum(reference, 1e-12)


def _subsurface_column(cfg, traj):
    ratio = subsurface_ratio(traj)
    return ratio * cfg.physical.c_e if cfg.physical is not None else ratio


def _time_columns(dp, mesh):
    t_tilde = mesh.nodes * time_factor(dp)
    t_star = mesh.nodes.copy() if dp.Ba > 0.0 else np.full(len(t_tilde), np.nan)
    return t_star, t_tilde


def _asymptote_columns(dp, t_tilde):
    """Second- and first-order adsorption plus coverage and pressure asymptotes."""
    gsi, f_e, Ba = dp.gamma_star_inf, dp.f_e, dp.Ba
    if dp.iso.has_phi:
        second = second_order_langmuir(t_tilde, Ba, f_e, gsi)
        first = first_order_langmuir(t_tilde, Ba, f_e, gsi)
    else:
        second = second_order_volmer(t_tilde, Ba, dp.prefactor)
        first = first_order(t_tilde, Ba, dp.prefactor)
    coverage = coverage_asymptote(dp.iso, t_tilde, Ba, f_e)
    gh = f_e * np.asarray(henry_reference(t_tilde, Ba))
    pressure = np.full(len(t_tilde), np.nan)
    ok = gh < 1.0 if dp.iso.kind in (IsothermKind.VOLMER, IsothermKind.VDW) else np.ones(len(gh), bool)
    if ok.any():
        pressure[ok] = pressure_asymptote(dp.iso, t_tilde[ok], Ba, f_e)
    return np.asarray(second), np.asarray(first), np.asarray(coverage), pressure


def _henry_column(dp, t_tilde):
    if dp.Ba == 0.0:
        return np.asarray(henry_dc(t_tilde))
    return np.asarray(henry_reference(t_tilde, dp.Ba))


def build_table(cfg: RunConfig, mode: str) -> Table:
    """Compute the output table of a single-run mode."""
    dp = cfg.params
    mesh = cfg.effective_mesh()
    if mode == "solve" or mode == "compare":
        traj = solve(dp, mesh, cfg.formulation, corrector_iterations=cfg.corrector_iterations,
                     strict=cfg.strict)
        cols = {
            "t_star": traj.t_star, "t_tilde": traj.t_tilde, "gamma_star": traj.gamma_star,
            "coverage": traj.coverage, "pressure": traj.pressure,
        }
        if cfg.subsurface:
            cols["c_s"] = _subsurface_column(cfg, traj)
        extra = [("clamp_count", str(traj.clamp_count))]
        if mode == "compare":
            second, first, _, _ = _asymptote_columns(dp, traj.t_tilde)
            henry = _henry_column(dp, traj.t_tilde)
            cols["henry"] = henry
            cols["first_order"] = first
            cols["second_order"] = second
            cols["error_henry"] = _relative_error(traj.gamma_star, henry)
            cols["error_first_order"] = _relative_error(traj.gamma_star, first)
            cols["error_second_order"] = _relative_error(traj.gamma_star, second)
        return Table(_provenance(cfg, mode, mesh, traj.formulation, extra), cols)

    t_star, t_tilde = _time_columns(dp, mesh)
    if mode == "henry":
        henry_dp = DimensionlessParams(dp.Ba, dp.f_e, Isotherm(IsothermKind.HENRY))
        gamma = np.asarray(henry_dc(t_tilde) if dp.Ba == 0.0 else henry_mixed(t_tilde, dp.Ba))
        coverage = gamma / henry_dp.gamma_star_inf
        cfg_h = replace(cfg, params=henry_dp)
        cols = {"t_star": t_star, "t_tilde": t_tilde, "gamma_star": gamma,
                "coverage": coverage, "pressure": coverage}
        return Table(_provenance(cfg_h, mode, mesh, "analytic"), cols)
    if mode == "asymptote":
        second, first, coverage, pressure = _asymptote_columns(dp, t_tilde)
        cols = {"t_star": t_star, "t_tilde": t_tilde, "gamma_star": second,
                "coverage": coverage, "pressure": pressure, "gamma_star_first_order": first}
        return Table(_provenance(cfg, mode, mesh, "asymptote"), cols)
    raise ConfigError(f"mode {mode!r} does not produce a table")


def classify_text(cfg: RunConfig) -> str:
    dp = cfg.params
    regime = classify_regime(dp, cfg.lower, cfg.upper)
    lines = [f"regime = {regime.value}", f"Ba_star = {dp.Ba_star!r}"]
    if cfg.physical is not None:
        times = characteristic_times(dp, cfg.physical)
        t_bc, t_dc = regime_bounds(cfg.physical, cfg.er)
        lines += [
            f"T_d = {times.T_d!r}",
            f"T_a = {times.T_a!r}",
            f"Er = {cfg.er!r}",
            f"T_BC = {t_bc!r}",
            f"T_DC = {t_dc!r}",
        ]
    return "\n".join(lines) + "\n"


def _with_value(cfg: RunConfig, value: float) -> RunConfig:
    section, key = cfg.sweep_parameter
    data = {s: dict(k) for s, k in cfg.raw.items()}
    data.setdefault(section, {})[key] = repr(float(value))
    dp, phys = _params_from(data)
    return replace(cfg, params=dp, physical=phys, raw=data)


def _sweep_name(cfg: RunConfig, index: int, value: float) -> str:
    key = cfg.sweep_parameter[1]
    name = _PHYSICAL_NAMES.get(key, key) if cfg.sweep_parameter[0] == "physical" else _DISPLAY.get(key, key)
    return f"{index:03d}_{name}={_fmt(value)}.csv"


def _worker_count(cfg: RunConfig, n_runs: int) -> int:
    count = cfg.workers or os.cpu_count() or 1
    cap = os.environ.get("ADSORB_FRAC_THREADS")
    if cap:
        try:
            count = min(count, max(1, int(cap)))
        except ValueError:
            raise ConfigError(f"ADSORB_FRAC_THREADS must be an integer, got {cap!r}") from None
    return max(1, min(count, n_runs))


def run_sweep(cfg: RunConfig) -> list[Path]:
    """Run one table per sweep value into the output directory."""
    if cfg.out is None:
        raise ConfigError("sweep mode writes one file per run and needs --out DIRECTORY")
    cfg.out.mkdir(parents=True, exist_ok=True)
    runs = [(i, v, _with_value(cfg, v)) for i, v in enumerate(cfg.sweep_values)]

    def one(item):
        i, v, sub = item
        path = cfg.out / _sweep_name(cfg, i, v)
        emit_csv(build_table(sub, cfg.sweep_run), path)
        return path

    workers = _worker_count(cfg, len(runs))
    if workers == 1:
        return [one(item) for item in runs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, runs))


def run(cfg: RunConfig, stdout=None) -> int:
    """Execute a parsed configuration; return the process exit status."""
    stdout = stdout or sys.stdout
    if cfg.mode == "classify":
        text = classify_text(cfg)
        if cfg.out is not None:
            cfg.out.write_text(text, encoding="utf-8")
        else:
            stdout.write(text)
        return EXIT_OK
    if cfg.mode == "sweep":
        for path in run_sweep(cfg):
            stdout.write(f"{path}\n")
        return EXIT_OK
    table = build_table(cfg, cfg.mode)
    text = emit_csv(table, cfg.out)
    if cfg.out is None:
        stdout.write(text)
    return EXIT_OK


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="adsorb-frac",
        description="Surfactant adsorption kinetics under mixed barrier-diffusion control.",
    )
    ap.add_argument("mode", choices=MODES)
    ap.add_argument("--config", type=Path, help="INI configuration file")
    ap.add_argument("--set", dest="overrides", action="append", default=[],
                    metavar="SECTION.KEY=VALUE", help="override a configuration key (repeatable)")
    ap.add_argument("--out", type=Path, help="output file (directory for sweep); stdout if omitted")
    ap.add_argument("--strict", action="store_true", help="treat clamped samples as an accuracy error")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        text = args.config.read_text(encoding="utf-8") if args.config is not None else ""
    except OSError as exc:
        print(f"error: cannot read configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.mode, text, args.overrides, out=args.out, strict=args.strict)
        return run(cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ModelValidityError, DomainError, RangeError, ProvenanceError) as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return EXIT_VALIDITY
    except AccuracyError as exc:
        print(f"accuracy error: {exc}", file=sys.stderr)
        return EXIT_ACCURACY
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
