"""Command-line entry point: ``hladder <subcommand> [--config FILE] ...``.

Every subcommand writes its table to ``--out`` (CSV or JSON, written to a
temporary file and renamed into place) and prints a one-line JSON summary.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import __version__
from .bands import band_structure, critical_ti, flat_band_scan, phase_diagram
from .config import RunConfig, load_config
from .errors import DegeneracyError, HladderError, VanishingOverlapError
from .finite import bulk_gap_window, disorder_robustness, finite_spectrum, in_gap_states
from .hamiltonian import bloch_operator
from .lattice import CellSpec, GroupName, GroupPreset
from .reproduce import FIGURES, bands_table, ldos_table, reproduce, spectrum_table
from .symmetry import classify_group
from .transport import LeadModel, transmission
from .zak import central_bands, periodic_gauge_frame, quantization_distance, zak_phase

logger = logging.getLogger("hladder")

SCHEMAS = {
    "classify": "no table; summary has label, protecting, description",
    "bands": "k,band_0,...,band_{D-1}  (one row per k on the closed grid [0, 2pi/a])",
    "flat": "index,energy,dispersion  (one row per flat band)",
    "critical": "eps,ti_star",
    "phasediagram": "eps,ti_star  (one row per detuning)",
    "zak": "band,phase,convergence,quantized_to  (quantized_to empty when not quantized)",
    "finite": "index,energy,in_gap",
    "ldos": "cell,site_index_in_cell,role,column,row,weight",
    "transmission": "E,T",
    "dldos": "E,site,rho",
    "reproduce": "one file per table: <fig>_<table>.<ext>; schemas as for bands/finite/ldos, "
                 "fig1d_phase_diagram: eps,ti_star; fig2_central_pair_sweep: t_i,k,E_lower,E_upper",
}


def default_config() -> RunConfig:
    """(3,4) cell, P2'm'm texture, |eps| = 0.1, t_i = 0.15 (topological phase)."""
    return RunConfig(cell=CellSpec.equal_arms(3, 4, t_i=0.15), group=GroupPreset(GroupName.P2PMPM, 0.1))


def _atomic_write(path: Path, payload: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            handle.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _cell(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return value


def render_table(header: Sequence[str], rows: Sequence[Sequence], fmt: str) -> str:
    if fmt == "json":
        clean = [[v.item() if isinstance(v, np.generic) else v for v in row] for row in rows]
        return json.dumps({"columns": list(header), "rows": clean}) + "\n"
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows([[_cell(v) for v in row] for row in rows])
    return buffer.getvalue()


def _emit(args, cfg, name, header, rows) -> str:
    fmt = (args.format or cfg.get("run", "format")).lower()
    out = args.out or cfg.get("run", "out") or f"{name}.{fmt}"
    _atomic_write(Path(out), render_table(header, rows, fmt))
    return str(out)


def _leads(cfg):
    t = float(cfg.get("transport", "lead_hopping"))
    return LeadModel(hopping=t), LeadModel(hopping=t)


def _energy_grid(cfg):
    return np.linspace(cfg.get("transport", "e_min"), cfg.get("transport", "e_max"),
                       int(cfg.get("transport", "n_energies")))


# --- subcommands -------------------------------------------------------------

def cmd_classify(args, cfg):
    group = classify_group(cfg.spec)
    return {"label": group.label.value, "protecting": [k.value for k in group.protecting],
            "description": group.describe()}


def cmd_bands(args, cfg):
    n_k = args.nk or cfg.get("bands", "n_k")
    bs = band_structure(bloch_operator(cfg.spec), n_k)
    path = _emit(args, cfg, "bands", *bands_table(bs))
    return {"out": path, "n_k": n_k, "n_bands": bs.n_bands}


def cmd_flat(args, cfg):
    n_k = args.nk or cfg.get("bands", "n_k")
    flats = flat_band_scan(band_structure(bloch_operator(cfg.spec), n_k), cfg.get("bands", "flat_tol"))
    rows = [[f.index, f.energy, f.dispersion] for f in flats]
    path = _emit(args, cfg, "flat", ["index", "energy", "dispersion"], rows)
    return {"out": path, "n_flat": len(flats)}


def _critical_inputs(cfg):
    label = cfg.group.label if cfg.group is not None else GroupName.P2PMPM
    bracket = cfg.get("critical", "bracket")
    return label, tuple(bracket) if bracket else None


def cmd_critical(args, cfg):
    label, bracket = _critical_inputs(cfg)
    eps = args.eps if args.eps is not None else cfg.get("critical", "eps")
    ti = critical_ti(cfg.cell, eps, bracket=bracket, label=label, tol=cfg.get("critical", "tol"))
    path = _emit(args, cfg, "critical", ["eps", "ti_star"], [[float(eps), ti]])
    return {"out": path, "eps": float(eps), "ti_star": ti}


def cmd_phasediagram(args, cfg):
    label, bracket = _critical_inputs(cfg)
    rows = phase_diagram(cfg.cell, cfg.get("critical", "eps_list"), label=label, bracket=bracket)
    path = _emit(args, cfg, "phasediagram", ["eps", "ti_star"], [list(r) for r in rows])
    return {"out": path, "points": len(rows)}


def cmd_zak(args, cfg):
    n_k = args.nk or cfg.get("zak", "n_k")
    shift = args.origin_shift if args.origin_shift is not None else cfg.get("zak", "origin_shift")
    op = bloch_operator(cfg.spec)
    rows, phases, skipped = [], {}, []
    for band in range(op.dim):
        # bands touched by a crossing have no single-band Wilson loop
        try:
            r = zak_phase(periodic_gauge_frame(op, band, n_k, shift))
        except (DegeneracyError, VanishingOverlapError):
            skipped.append(band)
            rows.append([band, "", "", ""])
            continue
        phases[band] = r.phase
        rows.append([band, r.phase, r.convergence, "" if r.quantized_to is None else r.quantized_to])
    path = _emit(args, cfg, "zak", ["band", "phase", "convergence", "quantized_to"], rows)
    pair = central_bands(op)
    tol = cfg.get("zak", "tol")
    quantized = all(b in phases and quantization_distance(phases[b], op.geometry.n_chain) < tol for b in pair)
    return {"out": path, "central_pair": list(pair),
            "central_phases": [phases.get(b) for b in pair], "skipped_bands": skipped,
            "verdict": "quantized" if quantized else "non-quantized"}


def cmd_finite(args, cfg):
    n_cells = args.cells or cfg.get("finite", "n_cells")
    spectrum = finite_spectrum(cfg.spec, n_cells)
    in_gap = in_gap_states(spectrum, bulk_gap_window(cfg.spec))
    path = _emit(args, cfg, "finite", *spectrum_table(spectrum, in_gap))
    summary = {"out": path, "n_states": len(spectrum.energies), "in_gap": in_gap}
    amplitude = cfg.get("finite", "amplitude")
    if amplitude > 0:
        report = disorder_robustness(cfg.spec, n_cells, amplitude, cfg.get("finite", "trials"),
                                     seed=cfg.get("run", "seed"), symmetric=cfg.get("finite", "symmetric"))
        summary["disorder_persistence"] = report.persistence
    return summary


def cmd_ldos(args, cfg):
    n_cells = args.cells or cfg.get("finite", "n_cells")
    spectrum = finite_spectrum(cfg.spec, n_cells)
    state = args.state if args.state is not None else cfg.get("finite", "state")
    if state is None:
        in_gap = in_gap_states(spectrum, bulk_gap_window(cfg.spec))
        state = in_gap[0] if in_gap else len(spectrum.energies) // 2 - 1
    path = _emit(args, cfg, "ldos", *ldos_table(spectrum, state))
    return {"out": path, "state": int(state), "energy": float(spectrum.energies[state])}


def cmd_transmission(args, cfg):
    n_cells = args.cells or cfg.get("finite", "n_cells")
    eta = args.eta or cfg.get("transport", "eta")
    curve = transmission(cfg.spec, n_cells, _energy_grid(cfg), leads=_leads(cfg), eta=eta,
                         device_eta=cfg.get("transport", "device_eta"))
    rows = [[float(e), float(t)] for e, t in zip(curve.energies, curve.T)]
    path = _emit(args, cfg, "transmission", ["E", "T"], rows)
    return {"out": path, "n_energies": len(rows), "max_T": float(curve.T.max())}


def cmd_dldos(args, cfg):
    n_cells = args.cells or cfg.get("finite", "n_cells")
    eta = args.eta or cfg.get("transport", "eta")
    energy = args.energy if args.energy is not None else cfg.get("transport", "energy")
    energies = [energy] if energy is not None else _energy_grid(cfg)
    curve = transmission(cfg.spec, n_cells, energies, leads=_leads(cfg), eta=eta, with_ldos=True,
                         device_eta=cfg.get("transport", "device_eta"))
    rows = [[float(e), i, float(r)] for e, rho in zip(curve.energies, curve.ldos) for i, r in enumerate(rho)]
    path = _emit(args, cfg, "dldos", ["E", "site", "rho"], rows)
    return {"out": path, "n_energies": len(energies)}


def cmd_reproduce(args, cfg):
    fmt = (args.format or "csv").lower()
    out_dir = Path(args.out or ".")
    written = []
    for stem, (header, rows) in reproduce(args.figure, n_k=args.nk or 512).items():
        path = out_dir / f"{stem}.{fmt}"
        _atomic_write(path, render_table(header, rows, fmt))
        written.append(str(path))
    return {"figure": args.figure, "files": written}


COMMANDS = {
    "classify": (cmd_classify, "classify the onsite texture into a two-color Frieze group"),
    "bands": (cmd_bands, "band energies on a closed k grid"),
    "flat": (cmd_flat, "list k-independent bands"),
    "critical": (cmd_critical, "critical intercell hopping of the central-pair inversion"),
    "phasediagram": (cmd_phasediagram, "critical t_i versus detuning"),
    "zak": (cmd_zak, "Zak phase of every band"),
    "finite": (cmd_finite, "finite-sample spectrum with in-gap flags"),
    "ldos": (cmd_ldos, "per-site |psi|^2 of one finite-sample state"),
    "transmission": (cmd_transmission, "two-lead transmission T(E)"),
    "dldos": (cmd_dldos, "lead-coupled LDOS -Im G_ii(E)/pi"),
    "reproduce": (cmd_reproduce, "emit the data behind one figure"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hladder", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text,
                           epilog=f"output columns: {SCHEMAS[name]}")
        p.add_argument("--config", type=Path, help="TOML run configuration")
        p.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
        p.add_argument("--out", help="output file (directory for reproduce)")
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--nk", type=int, help="number of k points")
        p.add_argument("--cells", type=int, help="number of unit cells in finite samples")
        p.add_argument("--eta", type=float, help="retarded broadening of the leads")
        p.add_argument("--origin-shift", type=float, dest="origin_shift",
                       help="shift of the horizontal origin (adds 2 pi shift / a to every Zak phase)")
        if name == "critical":
            p.add_argument("--eps", type=float, help="detuning magnitude")
        if name == "ldos":
            p.add_argument("--state", type=int, help="eigenstate index")
        if name == "dldos":
            p.add_argument("--energy", type=float, help="single energy instead of the configured grid")
        if name == "reproduce":
            p.add_argument("figure", choices=FIGURES)
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = load_config(args.config) if args.config else default_config()
        if args.seed is not None:
            if not 0 <= args.seed < 2 ** 64:
                raise HladderError("seed must be an unsigned 64-bit integer")
            cfg.params.setdefault("run", {})["seed"] = args.seed
        handler = COMMANDS[args.command][0]
        summary = {"command": args.command, "status": "ok", **handler(args, cfg)}
    except (HladderError, OSError, ValueError) as exc:
        print(json.dumps({"command": args.command, "status": "error", "error": str(exc)}))
        print(f"hladder {args.command}: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(summary, default=float))
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
