"""Unit-cell models of the transmit-reflect switchable metasurface.

Three levels of description live here:

* circuit level: the PIN diode in its two bias states and the strip grid it
  loads, combined into the shunt sheet of the switch layer;
* stack level: a chain-matrix (ABCD) cascade of sheets, dielectric slabs and
  air gaps under normal incidence;
* table level: phase/amplitude versus the tuning length ``ul`` per frequency,
  either from the analytic surrogate or loaded from a delimited file, and
  inverted to find the ``ul`` that realises a wanted phase.

Lengths are in metres, frequencies in hertz, phases in degrees.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .constants import C0, ETA0, check_mode
from .errors import (
    ConfigError,
    DataError,
    DomainError,
    FrequencyRangeError,
    ModelValidityError,
)

MM = 1e-3
TABLE_HEADER = ("mode", "frequency_hz", "ul_m", "phase_deg", "amplitude")


def wrap_deg(phase):
    """Wrap degrees into [0, 360)."""
    w = np.mod(phase, 360.0)
    w = np.where(w >= 360.0, w - 360.0, w)
    return float(w) if np.ndim(w) == 0 else w


def wrapped_error(a, b):
    """Signed difference a - b folded into [-180, 180)."""
    d = np.mod(np.asarray(a, dtype=float) - b + 180.0, 360.0) - 180.0
    return float(d) if np.ndim(d) == 0 else d


# ---------------------------------------------------------------------------
# circuit level
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiodeCircuit:
    """Series equivalent circuit of a PIN diode.

    ON is ``r_on`` in series with ``l_series``; OFF is ``c_off`` in series
    with the same ``l_series``. Defaults describe a common flip-chip PIN diode.
    """

    r_on: float = 7.8
    l_series: float = 30e-12
    c_off: float = 0.025e-12

    def __post_init__(self):
        if not self.r_on > 0:
            raise ConfigError("r_on must be positive")
        if not self.l_series >= 0:
            raise ConfigError("l_series must be non-negative")
        if not self.c_off > 0:
            raise ConfigError("c_off must be positive")


def _check_state(state):
    if state not in ("on", "off"):
        raise ConfigError(f"diode state must be 'on' or 'off', got {state!r}")
    return state


def diode_impedance(circuit: DiodeCircuit, state: str, f: float) -> complex:
    """Impedance of the diode at frequency ``f``.

    At DC the OFF branch is an open circuit and is returned as ``-j*inf``.
    """
    _check_state(state)
    if f < 0:
        raise DomainError(f"frequency must be non-negative, got {f}")
    w = 2 * math.pi * f
    if state == "on":
        return complex(circuit.r_on, w * circuit.l_series)
    if f == 0:
        return complex(0.0, -math.inf)
    return complex(0.0, w * circuit.l_series - 1.0 / (w * circuit.c_off))


def grid_shunt_impedance(period: float, strip_width: float, f: float) -> complex:
    """Quasi-static shunt reactance of an inductive strip grating.

    Field parallel to the strips: ``X = eta0 (p / lambda) ln csc(pi w / 2p)``.
    """
    if not 0 < strip_width < period:
        raise ConfigError("strip width must satisfy 0 < w < period")
    if f <= 0:
        raise DomainError("grid reactance needs a positive frequency")
    lam = C0 / f
    if period >= lam:
        raise ModelValidityError(
            f"grid period {period:g} m is not below the wavelength {lam:g} m"
        )
    x = ETA0 * (period / lam) * math.log(1.0 / math.sin(math.pi * strip_width / (2 * period)))
    return complex(0.0, x)


@dataclass(frozen=True)
class TwoPortResponse:
    gamma: complex
    tau: complex
    frequency: float

    @property
    def power_balance(self) -> float:
        return abs(self.gamma) ** 2 + abs(self.tau) ** 2


def sheet_response(z_sheet: complex, f: float, z0: float = ETA0) -> TwoPortResponse:
    """Reflection/transmission of a single shunt sheet in free space."""
    if math.isinf(abs(z_sheet)):
        return TwoPortResponse(0j, 1 + 0j, f)
    gamma = -z0 / (z0 + 2 * z_sheet)
    return TwoPortResponse(complex(gamma), complex(1 + gamma), f)


# ---------------------------------------------------------------------------
# geometry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UnitCellGeometry:
    kind: str
    period_x: float
    period_y: float
    ul_range: tuple
    dims: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (self.period_x > 0 and self.period_y > 0):
            raise ConfigError("unit-cell periods must be positive")
        lo, hi = self.ul_range
        if not lo < hi:
            raise ConfigError("ul_range must be increasing")

    @classmethod
    def basic(cls) -> "UnitCellGeometry":
        dims = dict(uw=1.1, pw=1.1, pl=8.4, W=3.3, g1=1.15, g2=1.15, h=4.0, h1=4.5)
        return cls("basic", 9.2 * MM, 9.2 * MM, (0.1 * MM, 5.9 * MM),
                   {k: v * MM for k, v in dims.items()})

    @classmethod
    def low_complexity(cls) -> "UnitCellGeometry":
        dims = dict(uw=1.1, pw=1.2, pl=10.2, w1=4.2, w2=0.2, w3=1.3, l1=5.1,
                    w_slot=0.2, g1=1.375, g2=1.375, h=4.0, h1=4.5)
        return cls("low_complexity", 11 * MM, 22 * MM, (0.1 * MM, 5.9 * MM),
                   {k: v * MM for k, v in dims.items()})

    @classmethod
    def for_kind(cls, kind: str) -> "UnitCellGeometry":
        if kind == "basic":
            return cls.basic()
        if kind == "low_complexity":
            return cls.low_complexity()
        raise ConfigError(f"unknown cell kind {kind!r}")

    @property
    def trsl_fill(self) -> float:
        # strips bridged by the ON diode fill ``pl`` of the period
        return self.dims.get("trsl_fill", self.dims["pl"])


def trsl_two_port(geom: UnitCellGeometry, circuit: DiodeCircuit, state: str,
                  f: float) -> TwoPortResponse:
    """Switch-layer sheet: strip-grid branch in series with one diode per period."""
    z_grid = grid_shunt_impedance(geom.period_x, geom.trsl_fill, f)
    z_d = diode_impedance(circuit, state, f)
    return sheet_response(z_grid + z_d, f)


# ---------------------------------------------------------------------------
# layer stack cascade
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ShuntSheet:
    impedance: complex


@dataclass(frozen=True)
class StripGrid:
    period: float
    strip_width: float
    axis: str = "x"


@dataclass(frozen=True)
class DiodeGrid:
    period: float
    strip_width: float
    circuit: DiodeCircuit = DiodeCircuit()
    state: Optional[str] = None  # None: follow the operating mode


@dataclass(frozen=True)
class DielectricSlab:
    thickness: float
    eps_r: float = 2.65
    tan_delta: float = 0.001

    def __post_init__(self):
        if not self.thickness > 0:
            raise ConfigError("slab thickness must be positive")
        if not self.eps_r >= 1:
            raise ConfigError("relative permittivity must be >= 1")


@dataclass(frozen=True)
class AirGap:
    thickness: float

    def __post_init__(self):
        if not self.thickness > 0:
            raise ConfigError("air gap thickness must be positive")


Layer = Union[ShuntSheet, StripGrid, DiodeGrid, DielectricSlab, AirGap]


@dataclass(frozen=True)
class LayerStack:
    """Ordered layers from the illuminated side downwards."""

    layers: tuple

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if not self.layers:
            raise ConfigError("layer stack is empty")

    @classmethod
    def default(cls, geom: Optional[UnitCellGeometry] = None,
                circuit: DiodeCircuit = DiodeCircuit()) -> "LayerStack":
        """Five-metal stack: PGL / slab / (PRL) / slab / TRSL / air / (PRL) / slab / PGL.

        The rotating layers are ideal polarisation bookkeeping and carry no
        sheet here; the grids are x-directed wires, transparent to y.
        """
        geom = geom or UnitCellGeometry.basic()
        h, h1 = geom.dims["h"], geom.dims["h1"]
        pgl = StripGrid(geom.period_x, geom.dims["uw"], axis="x")
        return cls((
            pgl,
            DielectricSlab(h),
            DielectricSlab(h),
            DiodeGrid(geom.period_x, geom.trsl_fill, circuit),
            AirGap(h1),
            DielectricSlab(h),
            pgl,
        ))


def _abcd_layer(layer, f, mode, polarization):
    k0 = 2 * math.pi * f / C0
    if isinstance(layer, ShuntSheet):
        z = complex(layer.impedance)
    elif isinstance(layer, StripGrid):
        if layer.axis != polarization:
            return np.eye(2, dtype=complex)
        z = grid_shunt_impedance(layer.period, layer.strip_width, f)
    elif isinstance(layer, DiodeGrid):
        state = layer.state or ("on" if mode == "reflection" else "off")
        z = (grid_shunt_impedance(layer.period, layer.strip_width, f)
             + diode_impedance(layer.circuit, state, f))
    elif isinstance(layer, (DielectricSlab, AirGap)):
        if isinstance(layer, AirGap):
            eps = 1.0 + 0j
        else:
            eps = layer.eps_r * (1 - 1j * layer.tan_delta)
        n = np.sqrt(eps)
        zc = ETA0 / n
        gl = 1j * k0 * n * layer.thickness
        return np.array([[np.cosh(gl), zc * np.sinh(gl)],
                         [np.sinh(gl) / zc, np.cosh(gl)]], dtype=complex)
    else:
        raise ConfigError(f"unsupported layer {layer!r}")
    if math.isinf(abs(z)):
        return np.eye(2, dtype=complex)
    if z == 0:
        # ideal short, marked by an infinite admittance
        return np.array([[1, 0], [np.inf, 1]], dtype=complex)
    return np.array([[1, 0], [1 / z, 1]], dtype=complex)


def cascade_two_ports(stack: LayerStack, f: float, mode: str = "transmission",
                      polarization: str = "y") -> TwoPortResponse:
    """Cascade the stack between free-space half spaces.

    Diode grids without an explicit state follow the mode: ON for
    reflection, OFF for transmission.
    """
    check_mode(mode)
    if not stack.layers:
        raise ConfigError("layer stack is empty")
    if f <= 0:
        raise DomainError("frequency must be positive")
    mats = [_abcd_layer(layer, f, mode, polarization) for layer in stack.layers]
    if any(np.isinf(m[1, 0]) for m in mats):
        # a short anywhere in the chain: total reflection seen from the top
        first = next(i for i, m in enumerate(mats) if np.isinf(m[1, 0]))
        m = np.eye(2, dtype=complex)
        for mi in mats[:first]:
            m = m @ mi
        # input impedance of the section in front of the short
        zin = m[0, 1] / m[1, 1]
        gamma = (zin - ETA0) / (zin + ETA0)
        return TwoPortResponse(complex(gamma), 0j, f)
    m = np.eye(2, dtype=complex)
    for mi in mats:
        m = m @ mi
    a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    den = a + b / ETA0 + c * ETA0 + d
    gamma = (a + b / ETA0 - c * ETA0 - d) / den
    tau = 2 * (a * d - b * c) / den
    return TwoPortResponse(complex(gamma), complex(tau), f)


# ---------------------------------------------------------------------------
# phase tables
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PhaseTable:
    """Phase and amplitude of one operating mode versus ``ul`` and frequency.

    ``phase`` and ``amplitude`` have shape ``(n_freq, n_ul)``. Phases are
    unwrapped along ``ul`` and aligned between slices so that linear
    interpolation in frequency is meaningful.
    """

    mode: str
    frequencies: np.ndarray
    ul: np.ndarray
    phase: np.ndarray
    amplitude: np.ndarray
    insufficient_span: bool = False

    def __post_init__(self):
        check_mode(self.mode)
        for name in ("frequencies", "ul", "phase", "amplitude"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        nf, nu = self.frequencies.size, self.ul.size
        if nf == 0 or nu == 0:
            raise DataError("phase table is empty")
        if self.phase.shape != (nf, nu) or self.amplitude.shape != (nf, nu):
            raise DataError("phase/amplitude shape does not match the sample grids")
        if np.any(np.diff(self.frequencies) <= 0):
            raise DataError("table frequencies must be strictly increasing")
        if np.any(np.diff(self.ul) <= 0):
            raise DataError("table ul samples must be strictly increasing")
        if not np.all((self.amplitude > 0) & (self.amplitude <= 1 + 1e-12)):
            raise DataError("table amplitudes must lie in (0, 1]")

    @property
    def f_min(self) -> float:
        return float(self.frequencies[0])

    @property
    def f_max(self) -> float:
        return float(self.frequencies[-1])

    def spans(self) -> np.ndarray:
        return np.ptp(self.phase, axis=1)

    def span(self, f: float) -> float:
        return float(np.ptp(self.curve(f)[0]))

    def check_frequency(self, f: float) -> None:
        tol = 1e-9 * max(abs(self.f_max), 1.0)
        if not (self.f_min - tol <= f <= self.f_max + tol):
            raise FrequencyRangeError(
                f"frequency {f:g} Hz outside table range "
                f"[{self.f_min:g}, {self.f_max:g}] Hz"
            )

    def curve(self, f: float):
        """Phase and amplitude curves over ``ul`` at frequency ``f``."""
        self.check_frequency(f)
        fr = self.frequencies
        if fr.size == 1:
            return self.phase[0], self.amplitude[0]
        j = int(np.clip(np.searchsorted(fr, f, side="right") - 1, 0, fr.size - 2))
        t = float(np.clip((f - fr[j]) / (fr[j + 1] - fr[j]), 0.0, 1.0))
        if t == 0.0:
            return self.phase[j], self.amplitude[j]
        if t == 1.0:
            return self.phase[j + 1], self.amplitude[j + 1]
        ph = (1 - t) * self.phase[j] + t * self.phase[j + 1]
        amp = (1 - t) * self.amplitude[j] + t * self.amplitude[j + 1]
        return ph, amp

    def evaluate(self, ul, f: float):
        """Phase (unwrapped degrees) and amplitude at ``ul`` for frequency ``f``."""
        ph, amp = self.curve(f)
        ul = np.asarray(ul, dtype=float)
        if np.any(ul < self.ul[0] - 1e-15) or np.any(ul > self.ul[-1] + 1e-15):
            raise DataError("ul outside the tabulated range")
        p = np.interp(ul, self.ul, ph)
        a = np.interp(ul, self.ul, amp)
        if p.ndim == 0:
            return float(p), float(a)
        return p, a

    def decreasing(self) -> bool:
        return bool(self.phase[0, -1] < self.phase[0, 0])


@dataclass(frozen=True)
class SurrogateConfig:
    """Parameters of the analytic phase/amplitude surrogate.

    Phase per frequency is ``phi_ref - S [atan(a (ul-u1)) + atan(a (ul-u2))]``
    with ``S`` scaled so the span over the ``ul`` range is ``span_deg``.
    The steepness ``a`` grows linearly with frequency (``dispersion``), which
    keeps the curves nearly parallel but not identical across the band.
    """

    ul_min: float = 0.1 * MM
    ul_max: float = 5.9 * MM
    n_prl: int = 2
    span_deg: Optional[float] = None
    per_prl_capability_deg: float = 200.0
    center_frequency: float = 7.5e9
    steepness: float = 1.0 / MM
    dispersion: float = 4.0
    resonances: tuple = (0.3, 0.7)
    phi_ref_deg: float = 0.0
    phase_slope_deg_per_ghz: float = -40.0
    band: tuple = (6.5e9, 8.5e9)
    reflection_loss_db: float = 0.6
    transmission_loss_db: float = 0.9
    dip_db: float = 0.2
    rolloff_db: float = 10.0
    rolloff_ref: float = 0.04
    tr_offset_deg: float = 0.0

    @classmethod
    def basic(cls, **kw) -> "SurrogateConfig":
        return cls(**kw)

    @classmethod
    def low_complexity(cls, **kw) -> "SurrogateConfig":
        base = dict(band=(7.0e9, 8.0e9), reflection_loss_db=0.6, transmission_loss_db=1.2)
        base.update(kw)
        return cls(**base)

    @classmethod
    def for_kind(cls, kind: str, **kw) -> "SurrogateConfig":
        if kind == "basic":
            return cls.basic(**kw)
        if kind == "low_complexity":
            return cls.low_complexity(**kw)
        raise ConfigError(f"unknown cell kind {kind!r}")

    @property
    def target_span(self) -> float:
        return self.span_deg if self.span_deg is not None else self.per_prl_capability_deg * self.n_prl

    def loss_bound_db(self, mode: str) -> float:
        return self.reflection_loss_db if mode == "reflection" else self.transmission_loss_db


def _surrogate_slice(cfg: SurrogateConfig, mode: str, f: float, ul: np.ndarray):
    lo, hi = cfg.ul_min, cfg.ul_max
    u1 = lo + cfg.resonances[0] * (hi - lo)
    u2 = lo + cfg.resonances[1] * (hi - lo)
    a = cfg.steepness * (1.0 + cfg.dispersion * (f - cfg.center_frequency) / cfg.center_frequency)
    if a <= 0:
        raise ConfigError("surrogate steepness became non-positive inside the band")
    shape = np.arctan(a * (ul - u1)) + np.arctan(a * (ul - u2))
    end = (math.atan(a * (hi - u1)) + math.atan(a * (hi - u2))
           - math.atan(a * (lo - u1)) - math.atan(a * (lo - u2)))
    scale = cfg.target_span / math.degrees(end)
    ref = cfg.phi_ref_deg + cfg.phase_slope_deg_per_ghz * (f - cfg.center_frequency) / 1e9
    if mode == "transmission":
        ref += cfg.tr_offset_deg
    phase = ref - scale * np.degrees(shape - shape[0])

    um, width = 0.5 * (u1 + u2), 0.25 * (hi - lo)
    loss = cfg.loss_bound_db(mode) - cfg.dip_db
    loss = loss + cfg.dip_db * np.exp(-(((ul - um) / width) ** 2))
    f_lo, f_hi = cfg.band
    excess = max(f_lo - f, f - f_hi, 0.0) / cfg.center_frequency
    loss = loss + cfg.rolloff_db * (excess / cfg.rolloff_ref) ** 2
    amplitude = 10.0 ** (-loss / 20.0)
    return phase, amplitude


def synthesize_phase_table(mode: str, frequencies: Sequence[float], n_ul_samples: int = 401,
                           config: Optional[SurrogateConfig] = None) -> PhaseTable:
    """Build a phase table from the analytic surrogate."""
    check_mode(mode)
    cfg = config or SurrogateConfig()
    if n_ul_samples < 8:
        raise ConfigError("need at least 8 ul samples")
    if cfg.n_prl not in (1, 2):
        raise ConfigError("n_prl must be 1 or 2")
    capability = cfg.per_prl_capability_deg * cfg.n_prl
    if cfg.target_span > capability + 1e-9:
        raise ConfigError(
            f"requested span {cfg.target_span:g} deg exceeds the "
            f"{cfg.n_prl}-layer capability of {capability:g} deg"
        )
    freqs = np.sort(np.asarray(frequencies, dtype=float))
    if freqs.size == 0 or np.any(freqs <= 0):
        raise ConfigError("frequencies must be positive and non-empty")
    ul = np.linspace(cfg.ul_min, cfg.ul_max, n_ul_samples)
    rows = [_surrogate_slice(cfg, mode, f, ul) for f in freqs]
    phase = np.array([r[0] for r in rows])
    amp = np.array([r[1] for r in rows])
    return PhaseTable(mode, freqs, ul, phase, amp,
                      insufficient_span=bool(np.any(np.ptp(phase, axis=1) < 360.0)))


def surrogate_tables(frequencies, n_ul_samples=401, config=None) -> dict:
    return {m: synthesize_phase_table(m, frequencies, n_ul_samples, config)
            for m in ("reflection", "transmission")}


def _align_slices(phase: np.ndarray) -> np.ndarray:
    out = phase.copy()
    for i in range(1, out.shape[0]):
        shift = 360.0 * np.round((out[i - 1, 0] - out[i, 0]) / 360.0)
        out[i] += shift
    return out


def load_phase_tables(path) -> dict:
    """Read every mode present in a phase-table file.

    Expected header: ``mode,frequency_hz,ul_m,phase_deg,amplitude``.
    """
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read phase table {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"phase table {path} is empty") from None
        if tuple(h.strip() for h in header) != TABLE_HEADER:
            raise DataError(f"bad header {header}; expected {','.join(TABLE_HEADER)}")
        data = {}
        for lineno, row in enumerate(reader, start=2):
            if not row or not "".join(row).strip():
                continue
            if len(row) != 5:
                raise DataError(f"line {lineno}: expected 5 columns")
            try:
                mode = row[0].strip()
                vals = [float(v) for v in row[1:]]
            except ValueError as exc:
                raise DataError(f"line {lineno}: {exc}") from exc
            if mode not in ("reflection", "transmission"):
                raise DataError(f"line {lineno}: unknown mode {mode!r}")
            data.setdefault(mode, {}).setdefault(vals[0], []).append(vals[1:])
    if not data:
        raise DataError(f"phase table {path} has no rows")
    return {mode: _table_from_rows(mode, slices) for mode, slices in data.items()}


def _table_from_rows(mode, slices) -> PhaseTable:
    freqs = sorted(slices)
    ul_grid = None
    phases, amps = [], []
    for f in freqs:
        rows = np.array(slices[f], dtype=float)
        order = np.argsort(rows[:, 0], kind="stable")
        rows = rows[order]
        if np.any(np.diff(rows[:, 0]) == 0):
            raise DataError(f"duplicate ul sample in {mode} slice at {f:g} Hz")
        if ul_grid is None:
            ul_grid = rows[:, 0]
        elif rows.shape[0] != ul_grid.size or not np.allclose(rows[:, 0], ul_grid, rtol=0, atol=1e-12):
            raise DataError("all frequency slices must share the same ul samples")
        ph = np.unwrap(rows[:, 1], period=360.0)
        d = np.diff(ph)
        if ph.size > 1 and not (np.all(d < 0) or np.all(d > 0)):
            raise DataError(f"{mode} phase at {f:g} Hz is not monotone in ul after unwrapping")
        phases.append(ph)
        amps.append(rows[:, 2])
    phase = _align_slices(np.array(phases))
    short = bool(np.any(np.ptp(phase, axis=1) < 360.0))
    if short:
        warnings.warn(f"{mode} table spans less than 360 deg at some frequencies", stacklevel=3)
    return PhaseTable(mode, np.array(freqs), ul_grid, phase, np.array(amps),
                      insufficient_span=short)


def load_phase_table(path, mode: Optional[str] = None) -> PhaseTable:
    tables = load_phase_tables(path)
    if mode is None:
        if len(tables) != 1:
            raise DataError("file holds several modes; pass mode=")
        return next(iter(tables.values()))
    if mode not in tables:
        raise DataError(f"file has no {mode} rows")
    return tables[mode]


def save_phase_tables(tables, path) -> None:
    if isinstance(tables, PhaseTable):
        tables = [tables]
    elif isinstance(tables, dict):
        tables = list(tables.values())
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(TABLE_HEADER) + "\n")
        for t in tables:
            for i, f in enumerate(t.frequencies):
                for j, u in enumerate(t.ul):
                    fh.write(f"{t.mode},{float(f)!r},{float(u)!r},"
                             f"{float(t.phase[i, j])!r},{float(t.amplitude[i, j])!r}\n")


def invert_phase(table: PhaseTable, target_phase, f: float):
    """Smallest ``ul`` whose phase at ``f`` matches ``target_phase`` modulo 360.

    The table is linearly interpolated along ``ul``; when no ``ul`` reaches
    the target (span below 360 deg) the sample with the least wrapped error
    is returned.
    """
    if table.ul.size == 0:
        raise DataError("empty phase table")
    ph, _ = table.curve(f)
    ul = table.ul
    if ph[-1] < ph[0]:
        ph_asc, ul_asc = ph[::-1], ul[::-1]
    else:
        ph_asc, ul_asc = ph, ul
    pmin, pmax = ph_asc[0], ph_asc[-1]
    t = np.atleast_1d(np.asarray(target_phase, dtype=float))
    nmin = np.ceil((pmin - t) / 360.0)
    nmax = np.floor((pmax - t) / 360.0)
    best = np.full(t.shape, np.inf)
    for k in range(int(math.ceil((pmax - pmin) / 360.0)) + 2):
        n = nmin + k
        ok = n <= nmax
        if not ok.any():
            continue
        cand = np.interp(t + 360.0 * n, ph_asc, ul_asc)
        best = np.where(ok, np.minimum(best, cand), best)
    miss = ~np.isfinite(best)
    if miss.any():
        err = np.abs(wrapped_error(ph[None, :], t[miss, None]))
        # argmin picks the first (smallest-ul) sample among ties
        best[miss] = ul[np.argmin(err, axis=1)]
    return float(best[0]) if np.ndim(target_phase) == 0 else best.reshape(np.shape(target_phase))


def polarization_trace(mode: str, incident: str = "y"):
    """Ideal polarisation bookkeeping through the cell for one mode."""
    check_mode(mode)
    rotated = "x" if incident == "y" else "y"
    trace = [("incident", incident), ("upper PGL", incident), ("upper PRL", rotated),
             ("TRSL", rotated)]
    if mode == "reflection":
        trace += [("upper PRL", incident), ("upper PGL", incident)]
    else:
        trace += [("lower PRL", incident), ("lower PGL", incident)]
    return trace
