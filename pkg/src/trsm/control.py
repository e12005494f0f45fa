"""Diode bias states and their mapping to operating modes.

All diodes ON turns the switch layer into a mesh ground (reflection, beam
in the upper hemisphere); all OFF leaves a polarisation grid (transmission,
beam in the lower hemisphere). Anything in between is reported as mixed
and never simulated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .constants import check_mode
from .errors import DataError
from .synthesis import ArrayDesign

MODE_TABLE = {
    "reflection": {"diodes": True, "hemisphere": "upper"},
    "transmission": {"diodes": False, "hemisphere": "lower"},
}


@dataclass(frozen=True)
class ModeState:
    mode: str
    bits: tuple
    hemisphere: str
    polarization: str
    groups: tuple = ()

    @property
    def diode_count(self) -> int:
        return len(self.bits)


class StateCheck(NamedTuple):
    mode: str
    violations: tuple


def set_mode(design: ArrayDesign, mode: str) -> ModeState:
    check_mode(mode)
    if not design.diode_groups:
        raise DataError("design has no diode groups")
    row = MODE_TABLE[mode]
    bits = tuple(row["diodes"] for _ in design.diode_groups)
    return ModeState(mode, bits, row["hemisphere"], design.feed.polarization,
                     tuple(design.diode_groups))


def validate_state(design: ArrayDesign, state_bits) -> StateCheck:
    """Classify a bias vector; ``violations`` lists the minority-state diode ids."""
    n = len(design.diode_groups)
    if n == 0:
        raise DataError("design has no diodes")
    bits = [bool(b) for b in state_bits]
    if len(bits) != n:
        raise DataError(f"state vector has {len(bits)} bits, design has {n} diodes")
    on = sum(bits)
    if on == n:
        return StateCheck("reflection", ())
    if on == 0:
        return StateCheck("transmission", ())
    # on a tie the OFF diodes are listed
    minority = on < n - on
    ids = tuple(d for (d, _), b in zip(design.diode_groups, bits) if b == minority)
    return StateCheck("mixed", ids)


def state_export(state: ModeState) -> str:
    """Bias table ``diode_id,group_elements,state`` sorted by diode id.

    Group members are joined with ``;`` so the file stays comma-delimited.
    """
    rows = ["diode_id,group_elements,state"]
    for (did, members), bit in sorted(zip(state.groups, state.bits), key=lambda t: t[0][0]):
        rows.append(f"{did},{';'.join(str(m) for m in members)},{int(bit)}")
    return "\n".join(rows) + "\n"
