"""Config-driven assembly of feed, tables and design, plus the report."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .config import DesignConfig
from .constants import MODES
from .control import set_mode
from .errors import ConfigError, DataError
from .farfield import (
    AngularGrid,
    BORESIGHT,
    HEMISPHERE,
    aperture_efficiency,
    evaluate_mode,
    gain_bandwidth_sweep,
    pattern_metrics,
)
from .feed import FeedModel, edge_taper, focal_from_taper, q_from_gain, taper_angle
from .synthesis import (
    ArrayDesign,
    PhaseMap,
    ULAssignment,
    assign_ul,
    compensation_map,
    diode_accounting,
)
from .unitcell import PhaseTable, SurrogateConfig, load_phase_tables, surrogate_tables


@dataclass(frozen=True, eq=False)
class Context:
    config: DesignConfig
    feed: FeedModel
    tables: dict
    design: ArrayDesign
    phase_map: PhaseMap
    assignment: ULAssignment
    grid: AngularGrid
    element_exponent: float
    focal: dict

    def table(self, mode: str) -> PhaseTable:
        if mode not in self.tables:
            raise DataError(f"no {mode} table available")
        return self.tables[mode]


def _focal_geometry(cfg: DesignConfig) -> dict:
    ap, fd = cfg["aperture"], cfg["feed"]
    width = max(ap["cols"] * ap["pitch_x_m"], ap["rows"] * ap["pitch_y_m"])
    nominal = fd["f_over_d"]
    if fd["position_m"] is not None:
        F = abs(float(fd["position_m"][2]))
    elif fd["focal_length_m"] is not None:
        F = float(fd["focal_length_m"])
    else:
        if ap["design_width"] == "f_over_d":
            raise ConfigError("the F/D aperture reading needs feed.focal_length_m")
        F = focal_from_taper(width, fd["taper_angle_deg"])
    d_fd = F / nominal if nominal else None
    d_used = width if ap["design_width"] == "physical" else d_fd
    return {
        "focal_length_m": F,
        "physical_width_m": width,
        "f_over_d_physical": F / width,
        "f_over_d_nominal": nominal,
        "width_from_f_over_d_m": d_fd,
        "design_width_m": d_used,
        "design_width_reading": ap["design_width"],
        "taper_angle_physical_deg": taper_angle(width, F),
        "taper_angle_f_over_d_deg": taper_angle(d_fd, F) if d_fd else None,
    }


def build_feed(cfg: DesignConfig, F: float) -> FeedModel:
    fd = cfg["feed"]
    q = fd["q"] if fd["q"] is not None else q_from_gain(fd["gain_dbi"])
    pos = tuple(fd["position_m"]) if fd["position_m"] is not None else (0.0, 0.0, F)
    return FeedModel(q=float(q), position=pos, polarization=fd["polarization"],
                     center_frequency=cfg.design_frequency)


def build_tables(cfg: DesignConfig) -> dict:
    tb = cfg["table"]
    if tb["source"] == "file":
        return load_phase_tables(cfg.table_path())
    try:
        sc = SurrogateConfig.for_kind(cfg["aperture"]["cell_kind"], **tb["surrogate"])
    except TypeError as exc:
        raise ConfigError(f"bad table.surrogate entry: {exc}") from exc
    return surrogate_tables(cfg.table_frequencies, int(tb["n_ul_samples"]), sc)


def build_context(cfg: DesignConfig, force: bool = False) -> Context:
    focal = _focal_geometry(cfg)
    feed = build_feed(cfg, focal["focal_length_m"])
    tables = build_tables(cfg)
    ap = cfg["aperture"]
    design = ArrayDesign(ap["rows"], ap["cols"], ap["pitch_x_m"], ap["pitch_y_m"], feed,
                         cfg.design_frequency, cfg["feed"]["phi0_deg"], ap["cell_kind"])
    pmap = compensation_map(design)
    ref = tables.get("reflection") or next(iter(tables.values()))
    assignment = assign_ul(pmap, ref, force=force)
    design = design.with_ul(assignment)
    g = cfg["grid"]
    grid = AngularGrid.regular(g["dtheta_deg"], g["dphi_deg"])
    return Context(cfg, feed, tables, design, pmap, assignment, grid,
                   float(g["element_exponent"]), focal)


def design_summary(ctx: Context) -> dict:
    f = ctx.focal
    taper = edge_taper(ctx.feed, f["design_width_m"], f["focal_length_m"])
    diodes = diode_accounting(ctx.design)
    return {
        "focal_length_mm": f["focal_length_m"] * 1e3,
        "f_over_d_nominal": f["f_over_d_nominal"],
        "f_over_d_physical": f["f_over_d_physical"],
        "physical_width_mm": f["physical_width_m"] * 1e3,
        "width_from_f_over_d_mm": (f["width_from_f_over_d_m"] or math.nan) * 1e3,
        "design_width_reading": f["design_width_reading"],
        "taper_angle_physical_deg": f["taper_angle_physical_deg"],
        "taper_angle_f_over_d_deg": f["taper_angle_f_over_d_deg"],
        "feed_q": ctx.feed.q,
        "feed_gain_dbi": ctx.feed.gain_dbi,
        "edge_taper_db": {
            "edge": {"angle_deg": taper.edge.angle_deg, "pattern_db": taper.edge.pattern_db,
                     "spreading_db": taper.edge.spreading_db, "total_db": taper.edge.total_db},
            "corner": {"angle_deg": taper.corner.angle_deg, "pattern_db": taper.corner.pattern_db,
                       "spreading_db": taper.corner.spreading_db,
                       "total_db": taper.corner.total_db},
        },
        "diode_count": diodes["diode_count"],
        "basic_cell_diode_count": diode_accounting(ctx.design, "basic")["diode_count"],
        "elements": ctx.design.n_elements,
        "max_phase_residual_deg": ctx.assignment.max_residual,
        "design_frequency_hz": ctx.design.f_design,
    }


def summary_text(s: dict) -> str:
    e, c = s["edge_taper_db"]["edge"], s["edge_taper_db"]["corner"]
    lines = [
        f"elements: {s['elements']}",
        f"diode count: {s['diode_count']} (basic-cell tiling: {s['basic_cell_diode_count']})",
        f"design frequency: {s['design_frequency_hz'] / 1e9:g} GHz",
        f"F = {s['focal_length_mm']:.1f} mm",
        f"F/D = {s['f_over_d_physical']:.3f} (physical width {s['physical_width_mm']:.1f} mm)",
        f"F/D = {s['f_over_d_nominal']:.3f} (nominal; width {s['width_from_f_over_d_mm']:.1f} mm)",
        f"edge half-angle: {s['taper_angle_physical_deg']:.2f} deg physical, "
        f"{s['taper_angle_f_over_d_deg']:.2f} deg from F/D",
        f"feed: q = {s['feed_q']:.3f} ({s['feed_gain_dbi']:.2f} dBi)",
        f"edge taper ({s['design_width_reading']} width): edge {e['total_db']:.2f} dB "
        f"(pattern {e['pattern_db']:.2f}, spreading {e['spreading_db']:.2f}), "
        f"corner {c['total_db']:.2f} dB",
        f"max phase residual: {s['max_phase_residual_deg']:.3g} deg",
    ]
    return "\n".join(lines) + "\n"


CAVEATS = (
    "directivity integrates the radiating hemisphere only; back radiation is neglected",
    "feed blockage in reflection mode is ignored",
    "normal-incidence cell response is applied to every element",
)


def mode_report(ctx: Context, mode: str, sweep: bool = True) -> dict:
    table = ctx.table(mode)
    f = ctx.design.f_design
    ev = evaluate_mode(ctx.design, table, ctx.feed, f, mode, ctx.grid, ctx.element_exponent)
    metrics = pattern_metrics(ev.pattern)
    gain = ev.gain_dbi
    out = {
        "frequency_hz": f,
        "hemisphere": HEMISPHERE[mode],
        "boresight": BORESIGHT[mode],
        "diodes": "on" if mode == "reflection" else "off",
        "peak_gain_dbi": gain,
        "peak_direction_deg": {"theta": ev.directivity.theta_deg, "phi": ev.directivity.phi_deg},
        "directivity_dbi": ev.directivity.dbi,
        "spillover_eff": ev.budget.spillover,
        "illumination_eff": ev.budget.illumination,
        "element_loss_eff": ev.budget.element_loss,
        "phase_error_eff": ev.budget.phase_error,
        "aperture_eff": aperture_efficiency(gain, ctx.design.area, f),
        "sll_db": {k: v.sll_db for k, v in metrics["cuts"].items()},
        "hpbw_deg": {k: v.hpbw_deg for k, v in metrics["cuts"].items()},
        "coarse_grid_warning": ev.directivity.coarse_grid,
    }
    if sweep:
        sw = gain_bandwidth_sweep(ctx.design, table, ctx.feed, mode, ctx.config.sweep_frequencies,
                                  ctx.grid, ctx.element_exponent, ctx.config.operating_band)
        out["bandwidth_3db_pct"] = sw.bandwidth_pct
        out["sweep"] = sw.bandwidth_doc()
    return out


def design_report(ctx: Context, sweep: bool = True) -> dict:
    modes = {}
    for mode in MODES:
        if mode in ctx.tables:
            modes[mode] = mode_report(ctx, mode, sweep)
            modes[mode]["diode_states"] = sorted(set(int(b) for b in set_mode(ctx.design, mode).bits))
    return {"design": design_summary(ctx), "modes": modes, "caveats": list(CAVEATS)}
