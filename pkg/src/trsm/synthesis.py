"""Array layout, feed-path phase compensation and ul assignment."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional

import numpy as np

from .constants import C0, check_mode
from .errors import ConfigError, InsufficientSpanError
from .feed import FeedModel
from .unitcell import PhaseTable, invert_phase, wrap_deg, wrapped_error

CELL_KINDS = ("basic", "low_complexity")
PRL_UNITS_PER_DIODE = {"basic": 2, "low_complexity": 4}


def spatial_phase(x, y, feed: FeedModel, lambda0: float, phi0: float = 0.0):
    """Compensation phase (degrees, wrapped) for elements at ``(x, y, 0)``."""
    if not lambda0 > 0:
        raise ConfigError("wavelength must be positive")
    xf, yf, zf = feed.position
    r = np.sqrt((np.asarray(x) - xf) ** 2 + (np.asarray(y) - yf) ** 2 + zf ** 2)
    return wrap_deg(360.0 * r / lambda0 + phi0)


@dataclass(frozen=True)
class PhaseMap:
    values: np.ndarray
    frequency: float
    mode: str

    def __post_init__(self):
        arr = np.array(self.values, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)


class ULAssignment(NamedTuple):
    ul: np.ndarray
    achieved: np.ndarray
    residual: np.ndarray
    max_residual: float


@dataclass(frozen=True, eq=False)
class ArrayDesign:
    """Rectangular lattice of cells centred on the origin in the z = 0 plane.

    Rows run along y, columns along x; element id ``row * cols + col``.
    """

    rows: int
    cols: int
    pitch_x: float
    pitch_y: float
    feed: FeedModel
    f_design: float = 7.3e9
    phi0: float = 0.0
    cell_kind: str = "low_complexity"
    ul: Optional[np.ndarray] = None
    max_residual: Optional[float] = None
    diode_groups: tuple = field(default=())

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ConfigError("rows and cols must be at least 1")
        if not (self.pitch_x > 0 and self.pitch_y > 0):
            raise ConfigError("pitches must be positive")
        if self.cell_kind not in CELL_KINDS:
            raise ConfigError(f"unknown cell kind {self.cell_kind!r}")
        if self.ul is not None:
            ul = np.array(self.ul, dtype=float).reshape(self.rows, self.cols)
            ul.setflags(write=False)
            object.__setattr__(self, "ul", ul)
        if not self.diode_groups:
            groups = tuple((i, (i,)) for i in range(self.rows * self.cols))
            object.__setattr__(self, "diode_groups", groups)

    @property
    def n_elements(self) -> int:
        return self.rows * self.cols

    @property
    def x(self) -> np.ndarray:
        return (np.arange(self.cols) - (self.cols - 1) / 2.0) * self.pitch_x

    @property
    def y(self) -> np.ndarray:
        return (np.arange(self.rows) - (self.rows - 1) / 2.0) * self.pitch_y

    @property
    def centers(self):
        X, Y = np.meshgrid(self.x, self.y, indexing="xy")
        return X, Y

    @property
    def width_x(self) -> float:
        return self.cols * self.pitch_x

    @property
    def width_y(self) -> float:
        return self.rows * self.pitch_y

    @property
    def area(self) -> float:
        return self.width_x * self.width_y

    def path_lengths(self) -> np.ndarray:
        X, Y = self.centers
        xf, yf, zf = self.feed.position
        return np.sqrt((X - xf) ** 2 + (Y - yf) ** 2 + zf ** 2)

    def with_ul(self, assignment: ULAssignment) -> "ArrayDesign":
        return replace(self, ul=assignment.ul, max_residual=assignment.max_residual)


def compensation_map(design: ArrayDesign, f_design: Optional[float] = None,
                     mode: str = "reflection") -> PhaseMap:
    """Target cell phases; the same map serves both modes."""
    check_mode(mode)
    f = f_design or design.f_design
    X, Y = design.centers
    vals = spatial_phase(X, Y, design.feed, C0 / f, design.phi0)
    return PhaseMap(np.asarray(vals).reshape(design.rows, design.cols), f, mode)


def assign_ul(phase_map: PhaseMap, table: PhaseTable, force: bool = False) -> ULAssignment:
    """Choose each element's ``ul`` so the table phase matches the map."""
    f = phase_map.frequency
    span = table.span(f)
    if span < 360.0 and not force:
        raise InsufficientSpanError(
            f"{table.mode} table spans {span:.1f} deg at {f:g} Hz; at least 360 deg required"
        )
    targets = phase_map.values
    ul = invert_phase(table, targets.ravel(), f).reshape(targets.shape)
    achieved, _ = table.evaluate(ul, f)
    achieved = np.asarray(achieved).reshape(targets.shape)
    residual = np.abs(wrapped_error(achieved, targets))
    return ULAssignment(ul, achieved, residual, float(np.max(residual)))


def build_design(rows: int = 10, cols: int = 20, pitch_x: float = 11e-3, pitch_y: float = 22e-3,
                 feed: Optional[FeedModel] = None, f_design: float = 7.3e9, phi0: float = 0.0,
                 cell_kind: str = "low_complexity", table: Optional[PhaseTable] = None,
                 force: bool = False) -> ArrayDesign:
    feed = feed or FeedModel.from_gain(9.0)
    design = ArrayDesign(rows, cols, pitch_x, pitch_y, feed, f_design, phi0, cell_kind)
    if table is None:
        return design
    return design.with_ul(assign_ul(compensation_map(design), table, force=force))


def diode_accounting(design: ArrayDesign, cell_kind: Optional[str] = None) -> dict:
    """Diodes needed to tile the design's aperture with the given cell kind.

    A low-complexity element occupies the footprint of two basic cells and
    drives both of their PRL pairs from one diode.
    """
    kind = cell_kind or design.cell_kind
    if kind not in CELL_KINDS:
        raise ConfigError(f"unknown cell kind {kind!r}")
    n = design.n_elements
    if kind == design.cell_kind:
        count = n
    elif kind == "basic":
        count = 2 * n
    else:
        if n % 2:
            raise ConfigError("an odd number of basic cells cannot be paired")
        count = n // 2
    return {
        "cell_kind": kind,
        "diode_count": count,
        "elements_per_diode": 1,
        "prl_units_per_diode": PRL_UNITS_PER_DIODE[kind],
    }


def design_document(design: ArrayDesign, phase_map: PhaseMap,
                    assignment: Optional[ULAssignment] = None) -> dict:
    X, Y = design.centers
    xf, yf, zf = design.feed.position
    doc = {
        "grid": {"rows": design.rows, "cols": design.cols,
                 "pitch_x_m": design.pitch_x, "pitch_y_m": design.pitch_y,
                 "cell_kind": design.cell_kind},
        "f_design_hz": design.f_design,
        "phi0_deg": design.phi0,
        "feed": {"q": design.feed.q, "gain_dbi": design.feed.gain_dbi,
                 "position_m": [xf, yf, zf], "polarization": design.feed.polarization},
        "elements": [],
        "diode_groups": [{"diode_id": d, "elements": list(el)} for d, el in design.diode_groups],
    }
    if assignment is not None:
        doc["max_residual_deg"] = assignment.max_residual
    for r in range(design.rows):
        for c in range(design.cols):
            e = {"id": r * design.cols + c, "row": r, "col": c,
                 "x_m": float(X[r, c]), "y_m": float(Y[r, c]),
                 "target_phase_deg": float(phase_map.values[r, c])}
            if design.ul is not None:
                e["ul_m"] = float(design.ul[r, c])
            if assignment is not None:
                e["achieved_phase_deg"] = float(wrap_deg(assignment.achieved[r, c]))
            doc["elements"].append(e)
    return doc


def phase_map_csv(phase_map: PhaseMap) -> str:
    lines = [",".join(repr(float(v)) for v in row) for row in phase_map.values]
    return "\n".join(lines) + "\n"


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"
