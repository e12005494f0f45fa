"""Command-line front end.

Every subcommand rebuilds the design from the JSON config, so outputs depend
only on the config and the table file it names. Errors are printed to stderr
as one JSON line and mapped to exit codes: 2 config/usage, 3 data/IO,
4 model validity.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .config import load_config
from .constants import MODES
from .control import set_mode, state_export
from .errors import ConfigError, DataError, TRSMError
from .farfield import (
    aperture_efficiency,
    evaluate_mode,
    gain_bandwidth_sweep,
    pattern_cut,
    pattern_metrics,
    principal_planes,
    radiated_power,
)
from .pipeline import build_context, design_report, design_summary, summary_text
from .synthesis import design_document, phase_map_csv

POWER_FLOOR = 1e-30


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"usage: {message}")


def _clean(obj):
    """Make a document strict-JSON safe: numpy scalars to float, non-finite to null."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _num(v) -> str:
    return repr(float(v))


class Writer:
    def __init__(self, out_dir: str, run_id=None):
        self.out_dir = out_dir
        self.run_id = run_id
        self.written = []
        try:
            os.makedirs(out_dir, exist_ok=True)
        except OSError as exc:
            raise DataError(f"cannot create output directory {out_dir}: {exc}") from exc

    def text(self, name: str, content: str) -> str:
        path = os.path.join(self.out_dir, name)
        try:
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(content)
        except OSError as exc:
            raise DataError(f"cannot write {path}: {exc}") from exc
        self.written.append(path)
        return path

    def json(self, name: str, doc: dict) -> str:
        if self.run_id is not None:
            doc = dict(doc, run_id=self.run_id)
        return self.text(name, json.dumps(_clean(doc), indent=2, allow_nan=False) + "\n")

    def csv(self, name: str, header, rows) -> str:
        lines = [",".join(header)]
        lines += [",".join(_num(v) for v in row) for row in rows]
        return self.text(name, "\n".join(lines) + "\n")


def _context(args):
    cfg = load_config(args.config, args.set)
    out = args.out or cfg.output_dir
    if args.config and not os.path.isabs(out) and args.out is None:
        out = os.path.join(cfg.base_dir, out)
    return cfg, Writer(out, args.run_id)


def _modes(mode: str):
    return MODES if mode == "both" else (mode,)


def cmd_design(args) -> int:
    cfg, w = _context(args)
    ctx = build_context(cfg, force=args.force)
    doc = design_document(ctx.design, ctx.phase_map, ctx.assignment)
    summary = design_summary(ctx)
    doc["summary"] = summary
    w.json("design.json", doc)
    w.text("phase_map.csv", phase_map_csv(ctx.phase_map))
    w.text("ul_map.csv", "\n".join(",".join(_num(v) for v in row)
                                   for row in ctx.design.ul) + "\n")
    w.text("summary.txt", summary_text(summary))
    return 0


def cmd_pattern(args) -> int:
    cfg, w = _context(args)
    ctx = build_context(cfg, force=args.force)
    f = float(args.freq) if args.freq is not None else cfg.design_frequency
    table = ctx.table(args.mode)
    ev = evaluate_mode(ctx.design, table, ctx.feed, f, args.mode, ctx.grid, ctx.element_exponent)
    pat = ev.pattern
    prad = radiated_power(pat)
    loss_db = 10.0 * math.log10(ev.budget.spillover * ev.budget.element_loss)

    def gain_db(p):
        return 10.0 * np.log10(np.maximum(4 * math.pi * p / prad, POWER_FLOOR)) + loss_db

    tag = f"{args.mode}_{f / 1e9:g}GHz"
    for name, phi in principal_planes(pat.polarization).items():
        ang, val = pattern_cut(pat, phi)
        w.csv(f"cut_{name}_{tag}.csv", ("theta_deg", "gain_dbi"), zip(ang, gain_db(val)))
    if args.full:
        T, P = np.meshgrid(pat.theta, pat.phi, indexing="ij")
        w.csv(f"pattern_{tag}.csv", ("theta_deg", "phi_deg", "gain_dbi"),
              zip(T.ravel(), P.ravel(), gain_db(pat.power).ravel()))
    m = pattern_metrics(pat)
    metrics = {
        "mode": args.mode,
        "frequency_hz": f,
        "hemisphere": pat.hemisphere,
        "boresight": pat.boresight,
        "gain_dbi": ev.gain_dbi,
        "directivity_dbi": ev.directivity.dbi,
        "aperture_eff": aperture_efficiency(ev.gain_dbi, ctx.design.area, f),
        "peak_theta_deg": m["peak_theta_deg"],
        "peak_phi_deg": m["peak_phi_deg"],
        "cuts": {k: dict(v.as_dict(), phi_deg=principal_planes(pat.polarization)[k])
                 for k, v in m["cuts"].items()},
        "efficiency": ev.budget.as_dict(),
        "coarse_grid_warning": ev.directivity.coarse_grid,
    }
    w.json(f"metrics_{tag}.json", metrics)
    return 0


def cmd_sweep(args) -> int:
    cfg, w = _context(args)
    ctx = build_context(cfg, force=args.force)
    for mode in _modes(args.mode):
        sw = gain_bandwidth_sweep(ctx.design, ctx.table(mode), ctx.feed, mode,
                                  cfg.sweep_frequencies, ctx.grid, ctx.element_exponent,
                                  cfg.operating_band)
        w.csv(f"sweep_{mode}.csv", ("f_hz", "gain_dbi", "aperture_eff"),
              zip(sw.frequencies, sw.gain_dbi, sw.aperture_eff))
        w.json(f"bandwidth_{mode}.json", sw.bandwidth_doc())
    return 0


def cmd_states(args) -> int:
    cfg, w = _context(args)
    ctx = build_context(cfg, force=args.force)
    for mode in _modes(args.mode):
        w.text(f"bias_{mode}.csv", state_export(set_mode(ctx.design, mode)))
    return 0


def cmd_report(args) -> int:
    cfg, w = _context(args)
    ctx = build_context(cfg, force=args.force)
    w.json("report.json", design_report(ctx, sweep=not args.no_sweep))
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", "-c", help="JSON design config (defaults if omitted)")
    common.add_argument("--out", "-o", help="output directory (overrides output_dir)")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key, e.g. --set aperture.rows=4")
    common.add_argument("--run-id", help="tag written into JSON metadata")
    common.add_argument("--force", action="store_true",
                        help="accept phase tables spanning less than 360 deg")

    p = _Parser(prog="trsm", description="Transmit-reflect switchable array design tool")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("design", parents=[common], help="synthesize the aperture")
    pp = sub.add_parser("pattern", parents=[common], help="principal-plane cuts and metrics")
    pp.add_argument("--mode", required=True, choices=MODES)
    pp.add_argument("--freq", type=float, help="frequency in Hz (default: design frequency)")
    pp.add_argument("--full", action="store_true", help="also write the full theta/phi grid")
    sp = sub.add_parser("sweep", parents=[common], help="gain and aperture efficiency vs frequency")
    sp.add_argument("--mode", default="both", choices=MODES + ("both",))
    st = sub.add_parser("states", parents=[common], help="diode bias table")
    st.add_argument("--mode", required=True, choices=MODES + ("both",))
    rp = sub.add_parser("report", parents=[common], help="design summary and per-mode metrics")
    rp.add_argument("--no-sweep", action="store_true", help="skip the bandwidth sweep")
    return p


COMMANDS = {"design": cmd_design, "pattern": cmd_pattern, "sweep": cmd_sweep,
            "states": cmd_states, "report": cmd_report}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except TRSMError as exc:
        err = {"error": exc.kind, "exit_code": exc.exit_code, "message": str(exc)}
        print(json.dumps(err), file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
