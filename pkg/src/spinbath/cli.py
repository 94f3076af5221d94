"""Command-line interface: one config file in, deterministic CSV/JSON files out.

Exit codes: 0 success, 2 configuration/model error, 3 numerical-integrity
error.  Failures print a machine-readable JSON record to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import analysis, export
from .bath import coupling_matrix_elements
from .chain import build_hamiltonian, check_degeneracy, spectral_decomposition
from .config import COMMANDS, RunConfig, builtin_config_path, parse_config, resolve_initial_state, with_overrides
from .dynamics import propagate_populations, steady_states
from .errors import ConfigError, NumericalIntegrityError, SpinbathError
from .generator import build_rate_matrix

OUT_DIR_ENV = "SPINBATH_OUT"


def _echo(cfg: RunConfig, command: str) -> dict:
    params = {
        "command": command,
        "n": cfg.chain.n_sites,
        "fields": "(" + ",".join(export.fmt(h) for h in cfg.chain.fields) + ")",
        "couplings": ";".join(f"{a}-{b}:{export.fmt(d)}" for a, b, d in cfg.chain.couplings) or "none",
        "temperature": export.fmt(cfg.bath.temperature),
        "kappas": "(" + ",".join(export.fmt(k) for k in cfg.bath.kappas) + ")",
        "axes": "".join(cfg.bath.axes),
    }
    if command in ("evolve", "fig2"):
        params["times"] = str(cfg.times)
        params["initial_state"] = cfg.initial_state
    if command in ("sweep-T", "fig2"):
        params["temperature_grid"] = str(cfg.temperature_grid)
    if command in ("sweep-kappa", "fig2"):
        params["kappa_grid"] = str(cfg.kappa_grid)
        params["kappa_site"] = cfg.kappa_site
    if command in ("sweep-T", "sweep-kappa", "fig2"):
        params["t_star"] = export.fmt(cfg.t_star)
    if command == "zeros-scaling":
        params["max_n"] = cfg.max_n
        params["draws"] = cfg.draws
        params["seed"] = cfg.seed
    return params


def _header(cfg: RunConfig, command: str) -> list[str]:
    return export.provenance_lines(command, cfg.source_hash, _echo(cfg, command))


def _build_all(cfg: RunConfig):
    dec = spectral_decomposition(build_hamiltonian(cfg.chain))
    elems = coupling_matrix_elements(cfg.bath, dec)
    rates = build_rate_matrix(dec, elems, cfg.bath, tol=cfg.degeneracy_tol, chain=cfg.chain)
    return dec, elems, rates


def _cmd_spectrum(cfg: RunConfig, out: Path) -> list[Path]:
    dec = spectral_decomposition(build_hamiltonian(cfg.chain))
    report = check_degeneracy(dec, cfg.degeneracy_tol)
    header = _header(cfg, "spectrum")
    files = []
    body = ["state,energy"] + [
        f"{i + 1},{export.fmt(e)}" for i, e in enumerate(dec.energies)
    ]
    files.append(export.write_lines(out / "spectrum.csv", header, body))
    gaps = ["i,j,omega"] + [
        f"{i + 1},{j + 1},{export.fmt(dec.gap_table[i, j])}"
        for i in range(dec.dimension)
        for j in range(i + 1, dec.dimension)
    ]
    files.append(export.write_lines(out / "gaps.csv", header, gaps))
    payload = {
        "tolerance": report.tolerance,
        "spectrum_degenerate": report.spectrum_degenerate,
        "gaps_degenerate": report.gaps_degenerate,
        "spectrum_pairs": [[i + 1, j + 1, diff] for i, j, diff in report.spectrum_pairs],
        "gap_pairs": [
            [[i + 1, j + 1], [k + 1, l + 1], diff]
            for (i, j), (k, l), diff in report.gap_pairs
        ],
    }
    files.append(export.write_json(out / "degeneracy.json", payload, header))
    return files


def _cmd_rates(cfg: RunConfig, out: Path) -> list[Path]:
    _, _, rates = _build_all(cfg)
    header = _header(cfg, "rates")
    labels = [f"E={export.fmt(e)}" for e in rates.energies]
    return [
        export.write_matrix_csv(out / "rates.csv", rates.matrix, header, labels=labels),
        export.write_mask_csv(out / "rates_mask.csv", rates.nonzero_mask, header),
    ]


def _cmd_evolve(cfg: RunConfig, out: Path) -> list[Path]:
    dec, _, rates = _build_all(cfg)
    p0 = resolve_initial_state(cfg, dec)
    traj = propagate_populations(rates, p0, cfg.times.values())
    return [export.write_trajectory_csv(out / "trajectory.csv", traj, _header(cfg, "evolve"))]


def _cmd_steady(cfg: RunConfig, out: Path) -> list[Path]:
    _, _, rates = _build_all(cfg)
    states = steady_states(rates)
    d = rates.dimension
    body = ["block," + ",".join(f"p_{i + 1}" for i in range(d))]
    for k, state in enumerate(states, start=1):
        body.append(f"{k}," + ",".join(export.fmt(x) for x in state.p))
    return [export.write_lines(out / "steady.csv", _header(cfg, "steady"), body)]


def _cmd_blocks(cfg: RunConfig, out: Path) -> list[Path]:
    _, _, rates = _build_all(cfg)
    partition = analysis.connectivity_blocks(rates)
    payload = [[i + 1 for i in block] for block in partition.blocks]
    return [export.write_json(out / "blocks.json", payload, _header(cfg, "blocks"))]


def _cmd_sweep_t(cfg: RunConfig, out: Path) -> list[Path]:
    sweep = analysis.sweep_temperature(
        cfg.chain,
        cfg.bath,
        cfg.temperature_grid.values(),
        cfg.t_star,
        threads=cfg.threads,
        degeneracy_tol=cfg.degeneracy_tol,
    )
    return [export.write_sweep_csv(out / "sweep_T.csv", sweep, _header(cfg, "sweep-T"))]


def _cmd_sweep_kappa(cfg: RunConfig, out: Path) -> list[Path]:
    sweep = analysis.sweep_coupling(
        cfg.chain,
        cfg.bath,
        cfg.kappa_site,
        cfg.kappa_grid.values(),
        cfg.t_star,
        threads=cfg.threads,
        degeneracy_tol=cfg.degeneracy_tol,
    )
    return [export.write_sweep_csv(out / "sweep_kappa.csv", sweep, _header(cfg, "sweep-kappa"))]


def _cmd_zeros_scaling(cfg: RunConfig, out: Path) -> list[Path]:
    if cfg.seed is None:
        raise ConfigError("zeros-scaling needs a fixed RNG seed ([run] seed or --seed)")
    rng = np.random.default_rng(cfg.seed)
    rows = analysis.zeros_scaling(cfg.max_n, cfg.draws, rng)
    body = ["N,counted,predicted"] + [f"{n},{c},{p}" for n, c, p in rows]
    return [export.write_lines(out / "zeros_scaling.csv", _header(cfg, "zeros-scaling"), body)]


def _cmd_fig2(cfg: RunConfig, out: Path) -> list[Path]:
    """The four datasets behind the thermal-vs-chemical excitation figure.

    fig2c: P_exc(t) at several temperatures with the configured (asymmetric)
    couplings; fig2d: P_exc(t) at several kappa values for the swept site at
    the configured temperature; fig2e/f: the corresponding P_exc(t*) sweeps.
    """
    dec, elems, _ = _build_all(cfg)
    p0 = resolve_initial_state(cfg, dec)
    times = cfg.times.values()
    header = _header(cfg, "fig2")
    files = []

    curves = []
    for temperature in cfg.fig2_temperatures:
        rates = build_rate_matrix(
            dec, elems, replace(cfg.bath, temperature=float(temperature)),
            tol=cfg.degeneracy_tol, chain=cfg.chain,
        )
        traj = propagate_populations(rates, p0, times)
        curves.append(1.0 - traj.populations[:, 0])
    body = ["t," + ",".join(f"T={export.fmt(T)}" for T in cfg.fig2_temperatures)]
    for k, t in enumerate(times):
        body.append(",".join([export.fmt(t), *(export.fmt(c[k]) for c in curves)]))
    files.append(export.write_lines(out / "fig2c.csv", header, body))

    site = cfg.kappa_site
    curves = []
    for kappa in cfg.fig2_kappas:
        kappas = list(cfg.bath.kappas)
        kappas[site - 1] = float(kappa)
        rates = build_rate_matrix(
            dec, elems, replace(cfg.bath, kappas=tuple(kappas)),
            tol=cfg.degeneracy_tol, chain=cfg.chain,
        )
        traj = propagate_populations(rates, p0, times)
        curves.append(1.0 - traj.populations[:, 0])
    body = ["t," + ",".join(f"kappa{site}={export.fmt(k)}" for k in cfg.fig2_kappas)]
    for k, t in enumerate(times):
        body.append(",".join([export.fmt(t), *(export.fmt(c[k]) for c in curves)]))
    files.append(export.write_lines(out / "fig2d.csv", header, body))

    sweep_t = analysis.sweep_temperature(
        cfg.chain, cfg.bath, cfg.temperature_grid.values(), cfg.t_star,
        initial_state=p0, threads=cfg.threads, degeneracy_tol=cfg.degeneracy_tol,
    )
    files.append(export.write_sweep_csv(out / "fig2e.csv", sweep_t, header))

    sweep_k = analysis.sweep_coupling(
        cfg.chain, cfg.bath, site, cfg.kappa_grid.values(), cfg.t_star,
        initial_state=p0, threads=cfg.threads, degeneracy_tol=cfg.degeneracy_tol,
    )
    files.append(export.write_sweep_csv(out / "fig2f.csv", sweep_k, header))
    return files


_HANDLERS = {
    "spectrum": _cmd_spectrum,
    "rates": _cmd_rates,
    "evolve": _cmd_evolve,
    "steady": _cmd_steady,
    "blocks": _cmd_blocks,
    "sweep-T": _cmd_sweep_t,
    "sweep-kappa": _cmd_sweep_kappa,
    "zeros-scaling": _cmd_zeros_scaling,
    "fig2": _cmd_fig2,
}


def run_command(cfg: RunConfig) -> list[Path]:
    """Execute the configured command and return the written artifact paths."""
    if cfg.command is None:
        raise ConfigError("no command given (positional argument or [run] command)")
    if cfg.command not in _HANDLERS:
        raise ConfigError(f"unknown command {cfg.command!r}; available: {', '.join(COMMANDS)}")
    out = Path(cfg.out) if cfg.out else Path(os.environ.get(OUT_DIR_ENV, "."))
    out.mkdir(parents=True, exist_ok=True)
    return _HANDLERS[cfg.command](cfg, out)


def _resolve_config_path(value: str) -> Path:
    path = Path(value)
    if path.is_file():
        return path
    if os.sep not in value and value == Path(value).stem:
        return builtin_config_path(value)
    raise ConfigError(f"config file not found: {value}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinbath",
        description="Relaxation of open spin chains with site-asymmetric thermal baths.",
    )
    parser.add_argument("command", nargs="?", choices=COMMANDS,
                        help="command to run (defaults to the config's [run] command)")
    parser.add_argument("--config", required=True,
                        help="path to a run config, or the name of a builtin one (e.g. ising2_paper)")
    parser.add_argument("--out", help=f"output directory (default: config, then ${OUT_DIR_ENV}, then .)")
    parser.add_argument("--threads", type=int, help="parallel workers for sweeps")
    parser.add_argument("--seed", type=int, help="RNG seed for randomized runs")
    parser.add_argument("--max-n", type=int, dest="max_n", help="largest chain size for zeros-scaling")
    parser.add_argument("--draws", type=int, help="random draws per chain size for zeros-scaling")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(_resolve_config_path(args.config))
        cfg = with_overrides(
            cfg,
            command=args.command,
            out=args.out,
            seed=args.seed,
            threads=args.threads,
            max_n=args.max_n,
            draws=args.draws,
        )
        files = run_command(cfg)
    except NumericalIntegrityError as exc:
        _report_error(exc, 3)
        return 3
    except SpinbathError as exc:
        _report_error(exc, 2)
        return 2
    for path in files:
        print(path)
    return 0


def _report_error(exc: Exception, code: int) -> None:
    record = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    print(json.dumps(record), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
