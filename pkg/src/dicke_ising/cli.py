"""Command-line driver: ``dicke-ising <command> [options]``.

Energies on the command line are in units of the cavity frequency, so the
model always runs with ``Omega = 1`` and ``J = four_j_over_omega / 4``.
Options may also come from a JSON config file (``--config``) whose keys are
the long option names with dashes replaced by underscores; flags given on
the command line win over the file.

Exit status is 0 on success, 1 when a solver fails and 2 for usage errors.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, ed, equilibrium, response, serialization, validate
from .errors import DickeIsingError, UsageError
from .model import ModelParams, band_edges, coupling_profile_real_space

COMMANDS = {
    "phase-diagram": "mean-field phase diagram over (lambda^2/Omega, omega_x)",
    "response-map": "cavity spectral function -Im D/pi over (omega, lambda)",
    "bound-states": "roots of the pole function outside the two-excitation band",
    "impurity-profile": "real-space coupling of the cavity to domain-wall pairs",
    "ed-spectrum": "exact-diagonalization photon spectrum for one chain",
    "finite-size-scan": "ED spectra for several chain lengths and couplings",
    "validate": "run the built-in oracle suite and print a PASS/FAIL table",
}

ENV_THREADS = "DICKE_ISING_THREADS"

# Defaults for every option; the config file may set any of these keys.
DEFAULTS = {
    "omega_x": 0.0,
    "four_j_over_omega": 1.0,
    "lambda": 0.2,
    "eta": 1e-3,
    "n_k": 4096,
    "lambda_sq_grid": [0.0, 0.3, 61],
    "omega_x_grid": [0.0, 1.0, 51],
    "lambda_grid": [0.0, 0.5, 101],
    "omega_grid": [0.0, 2.0, 801],
    "mean_field": True,
    "n_sites": 64,
    "n_spins": 8,
    "n_max": 20,
    "boundary": "open",
    "depth": 200,
    "sizes": [4, 8],
    "target_omega": 0.5,
    "half_width": 0.175,
    "output": None,
    "format": "csv",
    "threads": None,
}

# Which grids / ED settings each command actually uses.
_GRIDS = {
    "phase-diagram": ("lambda_sq_grid", "omega_x_grid"),
    "response-map": ("lambda_grid", "omega_grid"),
    "ed-spectrum": ("omega_grid",),
    "finite-size-scan": ("lambda_grid", "omega_grid"),
}
_ED_KEYS = {
    "ed-spectrum": ("n_spins", "n_max", "boundary", "depth"),
    "finite-size-scan": ("sizes", "n_max", "boundary", "depth", "target_omega", "half_width"),
}
_EXTRA_KEYS = {
    "response-map": ("mean_field",),
    "impurity-profile": ("n_sites",),
}


@dataclass
class RunConfig:
    command: str
    params: ModelParams
    grids: dict = field(default_factory=dict)
    ed: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)
    output: str | None = None
    format: str = "csv"
    threads: int = 1

    def to_dict(self) -> dict:
        """Flat mapping in the config-file format; ``parse_config`` inverts it."""
        p = self.params
        out = {"command": self.command, "omega_x": p.omega_x, "four_j_over_omega": 4.0 * p.J,
               "lambda": p.lam, "eta": p.eta, "n_k": p.n_k}
        out.update({k: list(v) for k, v in self.grids.items()})
        out.update(self.ed)
        out.update(self.extra)
        out.update(output=self.output, format=self.format, threads=self.threads)
        return out

    def grid(self, name: str) -> np.ndarray:
        start, stop, count = self.grids[name]
        return np.linspace(start, stop, int(count))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _grid_arg(p, name, help_text):
    p.add_argument(f"--{name.replace('_', '-')}", dest=name, nargs=3, type=float,
                   metavar=("START", "STOP", "COUNT"), default=argparse.SUPPRESS, help=help_text)


def _build_parser() -> _Parser:
    parser = _Parser(prog="dicke-ising", description=__doc__.split("\n")[0],
                     formatter_class=argparse.RawDescriptionHelpFormatter,
                     epilog="commands:\n" + "\n".join(f"  {k:<18}{v}" for k, v in COMMANDS.items()))
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", default=None, help="JSON config file; flags override it")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    S = argparse.SUPPRESS
    for name, help_text in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--config", default=S, help="JSON config file; flags override it")
        p.add_argument("--omega-x", dest="omega_x", type=float, default=S, help="transverse field / Omega")
        p.add_argument("--four-j-over-omega", dest="four_j_over_omega", type=float, default=S,
                       help="Ising coupling as 4J/Omega (default 1)")
        p.add_argument("--lambda", dest="lambda", type=float, default=S, help="light-matter coupling / Omega")
        p.add_argument("--eta", type=float, default=S, help="broadening / Omega")
        p.add_argument("--n-k", dest="n_k", type=int, default=S, help="momentum grid size (even)")
        p.add_argument("--output", "-o", default=S, help="data file path")
        p.add_argument("--format", choices=("csv", "json"), default=S)
        p.add_argument("--threads", type=int, default=S,
                       help=f"worker threads, 0 = all cores (env {ENV_THREADS})")
        if name == "phase-diagram":
            _grid_arg(p, "lambda_sq_grid", "lambda^2/Omega axis")
            _grid_arg(p, "omega_x_grid", "omega_x axis")
        if name in ("response-map", "finite-size-scan"):
            _grid_arg(p, "lambda_grid", "lambda axis")
        if name in ("response-map", "ed-spectrum", "finite-size-scan"):
            _grid_arg(p, "omega_grid", "frequency axis")
        if name == "response-map":
            p.add_argument("--bare-field", dest="mean_field", action="store_false", default=S,
                           help="use omega_x itself instead of the mean-field solution")
        if name == "impurity-profile":
            p.add_argument("--n-sites", dest="n_sites", type=int, default=S)
        if name in ("ed-spectrum", "finite-size-scan"):
            p.add_argument("--n-max", dest="n_max", type=int, default=S, help="photon cutoff")
            p.add_argument("--boundary", choices=("open", "periodic"), default=S)
            p.add_argument("--depth", type=int, default=S, help="Lanczos depth")
        if name == "ed-spectrum":
            p.add_argument("--n-spins", dest="n_spins", type=int, default=S)
        if name == "finite-size-scan":
            p.add_argument("--sizes", type=int, nargs="+", default=S)
            p.add_argument("--target-omega", dest="target_omega", type=float, default=S)
            p.add_argument("--half-width", dest="half_width", type=float, default=S)
    return parser


def _read_config_file(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise UsageError(f"{path}: top level must be a JSON object")
    unknown = sorted(set(doc) - set(DEFAULTS) - {"command"})
    if unknown:
        raise UsageError(f"{path}: unknown key(s) {', '.join(map(repr, unknown))}")
    return doc


def _resolve_threads(value) -> int:
    if value is None:
        env = os.environ.get(ENV_THREADS)
        try:
            value = int(env) if env is not None else 0
        except ValueError as exc:
            raise UsageError(f"{ENV_THREADS}={env!r} is not an integer") from exc
    if value < 0:
        raise UsageError(f"--threads must be >= 0, got {value}")
    return value or (os.cpu_count() or 1)


def _check_grid(name, g):
    if len(g) != 3:
        raise UsageError(f"{name} needs START STOP COUNT, got {g!r}")
    start, stop, count = float(g[0]), float(g[1]), g[2]
    if int(count) != count or count < 1:
        raise UsageError(f"{name}: COUNT must be a positive integer, got {count!r}")
    return [start, stop, int(count)]


def parse_config(argv) -> RunConfig:
    """Merge defaults, an optional config file and command-line flags."""
    argv = list(argv)
    if not argv:
        raise UsageError("no command given; choose one of: " + ", ".join(COMMANDS))
    ns = vars(_build_parser().parse_args(argv))
    file_values = _read_config_file(ns["config"]) if ns.get("config") else {}
    command = ns.get("command") or file_values.get("command")
    if command is None:
        raise UsageError("no command given; choose one of: " + ", ".join(COMMANDS))
    if command not in COMMANDS:
        raise UsageError(f"unknown command {command!r}; choose one of: " + ", ".join(COMMANDS))
    values = {**DEFAULTS, **file_values,
              **{k: v for k, v in ns.items() if k not in ("command", "config")}}
    try:
        params = ModelParams(omega_x=float(values["omega_x"]), J=float(values["four_j_over_omega"]) / 4.0,
                             lam=float(values["lambda"]), Omega=1.0, eta=float(values["eta"]),
                             n_k=int(values["n_k"]))
    except (ValueError, TypeError) as exc:
        raise UsageError(f"invalid model parameters: {exc}") from exc
    grids = {k: _check_grid(k, values[k]) for k in _GRIDS.get(command, ())}
    ed_cfg = {k: values[k] for k in _ED_KEYS.get(command, ())}
    if "sizes" in ed_cfg:
        ed_cfg["sizes"] = [int(n) for n in ed_cfg["sizes"]]
    extra = {k: values[k] for k in _EXTRA_KEYS.get(command, ())}
    if values["format"] not in ("csv", "json"):
        raise UsageError(f"format must be csv or json, got {values['format']!r}")
    output = values["output"]
    if output is None and command != "validate":
        output = f"{command}.{values['format']}"
    return RunConfig(command, params, grids, ed_cfg, extra, output, values["format"],
                     _resolve_threads(values["threads"]))


# --- commands -------------------------------------------------------------------

def _ed_config(cfg: RunConfig, n_spins, params=None) -> ed.EDConfig:
    e = cfg.ed
    return ed.EDConfig(params or cfg.params, int(n_spins), n_max=int(e["n_max"]),
                       boundary=e["boundary"], green_fn_depth=int(e["depth"]))


def _run_phase_diagram(cfg):
    return equilibrium.phase_diagram(cfg.grid("lambda_sq_grid"), cfg.grid("omega_x_grid"),
                                     cfg.params, workers=cfg.threads)


def _run_response_map(cfg):
    return response.spectral_map(cfg.grid("lambda_grid"), cfg.grid("omega_grid"), cfg.params,
                                 use_mean_field=bool(cfg.extra["mean_field"]), workers=cfg.threads)


def _run_bound_states(cfg):
    sol = equilibrium.minimize(cfg.params)
    states = response.find_bound_states(sol.field, cfg.params)
    edges = band_edges(sol.field, cfg.params)
    print(f"omega_x_tilde = {sol.omega_x_tilde:.10g}, band = [{edges.lower:.10g}, {edges.upper:.10g}]")
    if not states:
        print("no bound states")
    for b in states:
        print(f"{b.side:>5}  omega_b = {b.omega_b:.12g}  residue_proxy = {b.residue_proxy:.6g}  "
              f"gap_to_edge = {b.gap_to_edge:.6g}")
    return states


def _run_impurity_profile(cfg):
    sol = equilibrium.minimize(cfg.params)
    j, s = coupling_profile_real_space(sol.field, cfg.params, int(cfg.extra["n_sites"]))
    return serialization.CouplingProfile(j, s, sol.omega_x_tilde, {"m_x": sol.m_x})


def _run_ed_spectrum(cfg):
    res = ed.photon_spectrum(_ed_config(cfg, cfg.ed["n_spins"]), cfg.grid("omega_grid"))
    print(f"E0 = {res.ground_energy:.12g}  parity = {res.ground_parity}  "
          f"photon tail weight = {res.tail_weight:.3e}")
    if not res.cutoff_adequate:
        print(f"warning: photon cutoff n_max={cfg.ed['n_max']} looks too small", file=sys.stderr)
    return res


def _run_finite_size_scan(cfg):
    e = cfg.ed
    return ed.finite_size_scan(_ed_config(cfg, min(e["sizes"])), e["sizes"], cfg.grid("lambda_grid"),
                               cfg.grid("omega_grid"), float(e["target_omega"]),
                               float(e["half_width"]), workers=cfg.threads)


_RUNNERS = {
    "phase-diagram": _run_phase_diagram,
    "response-map": _run_response_map,
    "bound-states": _run_bound_states,
    "impurity-profile": _run_impurity_profile,
    "ed-spectrum": _run_ed_spectrum,
    "finite-size-scan": _run_finite_size_scan,
}


def _metadata(cfg: RunConfig) -> dict:
    return {"tool": "dicke-ising", "version": __version__, "command": cfg.command,
            "params": asdict(cfg.params), "grids": cfg.grids, "ed": cfg.ed, "options": cfg.extra}


def run(cfg: RunConfig) -> int:
    """Execute a parsed configuration; returns the process exit status."""
    t0 = time.perf_counter()
    if cfg.command == "validate":
        checks = validate.run_suite()
        print(validate.format_table(checks))
        return 0 if all(c.passed for c in checks) else 1
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ed.KrylovBreakdown)
        result = _RUNNERS[cfg.command](cfg)
    meta = _metadata(cfg)
    files = serialization.write_result(result, cfg.output, cfg.format, meta)
    side = {**meta, "files": [str(f) for f in files], "wall_time_s": time.perf_counter() - t0}
    serialization.write_sidecar(cfg.output, side)
    for f in files:
        print(f"wrote {f}")
    return 0


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    try:
        return run(cfg)
    except (DickeIsingError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
