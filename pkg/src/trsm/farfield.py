"""Far-field evaluation of the spatially fed array.

Each cell re-radiates the feed field it intercepts, weighted by the table
amplitude and shifted by the table phase at the analysis frequency. The
pattern is the lattice array factor times a cos^e element factor, evaluated
on a regular (theta, phi) grid over the radiating hemisphere. Reflection
and transmission beams are both expressed in a local frame whose
theta = 0 is the beam's own boresight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .constants import C0, check_mode
from .errors import DataError
from .feed import FeedModel, feed_field, spillover_efficiency
from .synthesis import ArrayDesign
from .unitcell import PhaseTable

BORESIGHT = {"transmission": "+z", "reflection": "-z"}
HEMISPHERE = {"reflection": "upper", "transmission": "lower"}
MIN_GRID = (91, 181)


@dataclass(frozen=True, eq=False)
class AngularGrid:
    theta: np.ndarray
    phi: np.ndarray

    @classmethod
    def regular(cls, dtheta: float = 0.5, dphi: float = 1.0) -> "AngularGrid":
        nt = int(round(90.0 / dtheta)) + 1
        nph = int(round(360.0 / dphi))
        return cls(np.linspace(0.0, 90.0, nt), np.arange(nph) * (360.0 / nph))

    @property
    def shape(self):
        return self.theta.size, self.phi.size


@dataclass(frozen=True, eq=False)
class FarFieldPattern:
    theta: np.ndarray
    phi: np.ndarray
    field: np.ndarray
    frequency: float
    mode: Optional[str] = None
    polarization: str = "y"

    def __post_init__(self):
        for name in ("theta", "phi", "field"):
            arr = np.array(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if np.any(np.diff(self.theta) <= 0) or np.any(np.diff(self.phi) <= 0):
            raise DataError("pattern grids must be strictly increasing")
        if not np.all(np.isfinite(self.field)):
            raise DataError("pattern field is not finite")

    @property
    def power(self) -> np.ndarray:
        return np.abs(self.field) ** 2

    @property
    def boresight(self) -> Optional[str]:
        return BORESIGHT.get(self.mode)

    @property
    def hemisphere(self) -> Optional[str]:
        return HEMISPHERE.get(self.mode)

    def scaled(self, factor: complex) -> "FarFieldPattern":
        return FarFieldPattern(self.theta, self.phi, self.field * factor,
                               self.frequency, self.mode, self.polarization)


def element_excitations(design: ArrayDesign, table: PhaseTable, feed: Optional[FeedModel],
                        f: float, mode: str) -> np.ndarray:
    """Complex excitation of every cell, shape ``(rows, cols)``."""
    check_mode(mode)
    if table.mode != mode:
        raise DataError(f"table is for {table.mode} mode, requested {mode}")
    if design.ul is None:
        raise DataError("design has no ul assignment")
    feed = feed or design.feed
    table.check_frequency(f)
    X, Y = design.centers
    xf, yf, zf = feed.position
    r = np.sqrt((X - xf) ** 2 + (Y - yf) ** 2 + zf ** 2)
    theta_f = np.degrees(np.arccos(abs(zf) / r))
    cell_phase, s = table.evaluate(design.ul, f)
    amp = feed_field(feed, theta_f) / r * s
    phase = np.radians(cell_phase) - 2 * math.pi * f / C0 * r
    return amp * np.exp(1j * phase)


def radiate(excitations, design: ArrayDesign, f: float, grid: Optional[AngularGrid] = None,
            element_exponent: float = 1.0, mode: Optional[str] = None) -> FarFieldPattern:
    """Array factor of the lattice times ``cos(theta)**element_exponent``."""
    grid = grid or AngularGrid.regular()
    a = np.asarray(excitations, dtype=complex).reshape(design.rows, design.cols)
    k = 2 * math.pi * f / C0
    th = np.radians(grid.theta)[:, None]
    ph = np.radians(grid.phi)[None, :]
    u = (np.sin(th) * np.cos(ph)).ravel()
    v = (np.sin(th) * np.sin(ph)).ravel()
    ex = np.exp(1j * k * np.outer(u, design.x))
    ey = np.exp(1j * k * np.outer(v, design.y))
    af = np.einsum("pr,pr->p", ey @ a, ex)
    # cos^e vanishes at the horizon; avoid 0**0 ambiguity by clipping
    ef = np.clip(np.cos(np.radians(grid.theta)), 0.0, None) ** element_exponent
    E = af.reshape(grid.shape) * ef[:, None]
    pol = design.feed.polarization if hasattr(design, "feed") else "y"
    return FarFieldPattern(grid.theta, grid.phi, E, f, mode, pol)


@dataclass(frozen=True)
class DirectivityResult:
    linear: float
    theta_deg: float
    phi_deg: float
    coarse_grid: bool = False

    @property
    def dbi(self) -> float:
        return 10.0 * math.log10(self.linear)


def radiated_power(pattern: FarFieldPattern) -> float:
    """``int |E|^2 sin(theta) dtheta dphi`` over the hemisphere (trapezoidal)."""
    th = np.radians(pattern.theta)
    dphi = math.radians(360.0 / pattern.phi.size)
    ring = np.sum(pattern.power, axis=1) * dphi
    return float(np.trapezoid(ring * np.sin(th), th))


def directivity(pattern: FarFieldPattern) -> DirectivityResult:
    """Peak directivity with back radiation neglected."""
    p = pattern.power
    i, j = np.unravel_index(np.argmax(p), p.shape)
    total = radiated_power(pattern)
    coarse = pattern.theta.size < MIN_GRID[0] or pattern.phi.size < MIN_GRID[1]
    return DirectivityResult(4 * math.pi * float(p[i, j]) / total,
                             float(pattern.theta[i]), float(pattern.phi[j]), coarse)


@dataclass(frozen=True)
class EfficiencyBudget:
    spillover: float
    illumination: float
    element_loss: float
    phase_error: float

    @property
    def product(self) -> float:
        return self.spillover * self.illumination * self.element_loss * self.phase_error

    def as_dict(self) -> dict:
        return {"spillover": self.spillover, "illumination": self.illumination,
                "element_loss": self.element_loss, "phase_error": self.phase_error,
                "product": self.product}


def budget_from_excitations(a: np.ndarray, s: np.ndarray, spill: float) -> EfficiencyBudget:
    a = np.asarray(a).ravel()
    s = np.asarray(s).ravel()
    b = np.abs(a / s)
    illum = float(np.sum(b) ** 2 / (b.size * np.sum(b ** 2)))
    loss = float(np.sum(np.abs(a) ** 2) / np.sum(b ** 2))
    phase = float(np.abs(np.sum(a)) ** 2 / np.sum(np.abs(a)) ** 2)
    return EfficiencyBudget(spill, illum, loss, phase)


def efficiency_budget(design: ArrayDesign, table: PhaseTable, feed: Optional[FeedModel],
                      f: float, mode: str) -> EfficiencyBudget:
    feed = feed or design.feed
    a = element_excitations(design, table, feed, f, mode)
    _, s = table.evaluate(design.ul, f)
    spill = spillover_efficiency(feed, design.width_x / 2, design.width_y / 2)
    return budget_from_excitations(a, s, spill)


@dataclass(frozen=True, eq=False)
class ModeEvaluation:
    pattern: FarFieldPattern
    directivity: DirectivityResult
    budget: EfficiencyBudget

    @property
    def gain_dbi(self) -> float:
        return self.directivity.dbi + 10.0 * math.log10(self.budget.spillover * self.budget.element_loss)


def evaluate_mode(design: ArrayDesign, table: PhaseTable, feed: Optional[FeedModel], f: float,
                  mode: str, grid: Optional[AngularGrid] = None,
                  element_exponent: float = 1.0) -> ModeEvaluation:
    feed = feed or design.feed
    a = element_excitations(design, table, feed, f, mode)
    pattern = radiate(a, design, f, grid, element_exponent, mode=mode)
    budget = efficiency_budget(design, table, feed, f, mode)
    return ModeEvaluation(pattern, directivity(pattern), budget)


def realized_gain(design: ArrayDesign, table: PhaseTable, feed: Optional[FeedModel], f: float,
                  mode: str, grid: Optional[AngularGrid] = None,
                  element_exponent: float = 1.0) -> float:
    """Directivity of the lossy excitation less spillover and cell loss, dBi."""
    return evaluate_mode(design, table, feed, f, mode, grid, element_exponent).gain_dbi


def aperture_efficiency(gain_dbi: float, aperture_area: float, f: float) -> float:
    if not (aperture_area > 0 and f > 0):
        raise DataError("aperture area and frequency must be positive")
    lam = C0 / f
    return 10.0 ** (gain_dbi / 10.0) * lam ** 2 / (4 * math.pi * aperture_area)


# ---------------------------------------------------------------------------
# pattern cuts and metrics
# ---------------------------------------------------------------------------

def _phi_index(phi: np.ndarray, target: float) -> int:
    d = np.abs(((phi - target) + 180.0) % 360.0 - 180.0)
    i = int(np.argmin(d))
    if d[i] > 1e-6:
        raise DataError(f"pattern grid has no phi = {target:g} deg cut")
    return i


def pattern_cut(pattern: FarFieldPattern, phi_deg: float):
    """Signed angle (-90..90) and power along the plane through ``phi_deg``."""
    i0 = _phi_index(pattern.phi, phi_deg)
    i1 = _phi_index(pattern.phi, (phi_deg + 180.0) % 360.0)
    p = pattern.power
    ang = np.concatenate([-pattern.theta[:0:-1], pattern.theta])
    val = np.concatenate([p[:0:-1, i1], p[:, i0]])
    return ang, val


def principal_planes(polarization: str = "y") -> dict:
    return {"E": 90.0, "H": 0.0} if polarization == "y" else {"E": 0.0, "H": 90.0}


@dataclass(frozen=True)
class CutMetrics:
    peak_deg: float
    sll_db: Optional[float]
    hpbw_deg: Optional[float]

    def as_dict(self) -> dict:
        return {"peak_deg": self.peak_deg, "sll_db": self.sll_db, "hpbw_deg": self.hpbw_deg,
                "sll_available": self.sll_db is not None,
                "hpbw_available": self.hpbw_deg is not None}


def _half_power_crossing(ang, db, start, step):
    i = start
    while 0 <= i + step < ang.size:
        j = i + step
        if db[j] <= -3.0:
            t = (-3.0 - db[i]) / (db[j] - db[i])
            return ang[i] + t * (ang[j] - ang[i])
        i = j
    return None


def _first_null(val, start, step):
    i = start
    while 0 <= i + step < val.size:
        if val[i + step] >= val[i]:
            return i
        i += step
    return None


def cut_metrics(ang: np.ndarray, val: np.ndarray) -> CutMetrics:
    k = int(np.argmax(val))
    peak = float(val[k])
    with np.errstate(divide="ignore"):
        db = 10.0 * np.log10(val / peak)
    lo = _half_power_crossing(ang, db, k, -1)
    hi = _half_power_crossing(ang, db, k, +1)
    hpbw = float(hi - lo) if lo is not None and hi is not None else None
    nl, nr = _first_null(val, k, -1), _first_null(val, k, +1)
    sll = None
    if nl is not None and nr is not None:
        side = np.concatenate([val[:nl], val[nr + 1:]])
        if side.size:
            sll = float(10.0 * math.log10(np.max(side) / peak)) if np.max(side) > 0 else -math.inf
    return CutMetrics(float(ang[k]), sll, hpbw)


def pattern_metrics(pattern: FarFieldPattern) -> dict:
    """Peak direction plus SLL and HPBW in the two principal cuts."""
    p = pattern.power
    i, j = np.unravel_index(np.argmax(p), p.shape)
    cuts = {}
    for name, phi in principal_planes(pattern.polarization).items():
        cuts[name] = cut_metrics(*pattern_cut(pattern, phi))
    return {"peak_theta_deg": float(pattern.theta[i]), "peak_phi_deg": float(pattern.phi[j]),
            "cuts": cuts}


# ---------------------------------------------------------------------------
# frequency sweep
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SweepResult:
    mode: str
    frequencies: np.ndarray
    gain_dbi: np.ndarray
    aperture_eff: np.ndarray
    peak_frequency: float
    peak_gain_dbi: float
    f_low: float
    f_high: float
    bandwidth_pct: float
    open_ended: bool
    gain_variation_db: float
    band_gain_variation_db: Optional[float] = None

    def bandwidth_doc(self) -> dict:
        return {"mode": self.mode, "peak_frequency_hz": self.peak_frequency,
                "peak_gain_dbi": self.peak_gain_dbi, "f_low_hz": self.f_low,
                "f_high_hz": self.f_high, "bandwidth_pct": self.bandwidth_pct,
                "open_ended": self.open_ended,
                "in_band_gain_variation_db": self.gain_variation_db,
                "operating_band_gain_variation_db": self.band_gain_variation_db}


def _band_edge(f, g, k, level, step):
    i = k
    while 0 <= i + step < f.size:
        j = i + step
        if g[j] < level:
            t = (level - g[i]) / (g[j] - g[i])
            return f[i] + t * (f[j] - f[i]), False
        i = j
    return f[i], True


def three_db_band(f: np.ndarray, g: np.ndarray):
    k = int(np.argmax(g))
    level = g[k] - 3.0
    lo, open_lo = _band_edge(f, g, k, level, -1)
    hi, open_hi = _band_edge(f, g, k, level, +1)
    return k, lo, hi, open_lo or open_hi


def gain_bandwidth_sweep(design: ArrayDesign, table: PhaseTable, feed: Optional[FeedModel],
                         mode: str, f_list: Sequence[float], grid: Optional[AngularGrid] = None,
                         element_exponent: float = 1.0,
                         operating_band: Optional[tuple] = None) -> SweepResult:
    f = np.sort(np.asarray(f_list, dtype=float))
    if f.size == 0:
        raise DataError("sweep needs at least one frequency")
    gains = np.array([realized_gain(design, table, feed, fi, mode, grid, element_exponent)
                      for fi in f])
    ae = np.array([aperture_efficiency(gi, design.area, fi) for gi, fi in zip(gains, f)])
    k, lo, hi, open_ended = three_db_band(f, gains)
    inside = (f >= lo - 1e-6) & (f <= hi + 1e-6)
    variation = float(gains[k] - gains[inside].min())
    band_var = None
    if operating_band is not None:
        sel = (f >= operating_band[0]) & (f <= operating_band[1])
        if sel.any():
            band_var = float(gains[sel].max() - gains[sel].min())
    bw = 100.0 * (hi - lo) / (0.5 * (hi + lo))
    return SweepResult(mode, f, gains, ae, float(f[k]), float(gains[k]), float(lo), float(hi),
                       float(bw), bool(open_ended), variation, band_var)
