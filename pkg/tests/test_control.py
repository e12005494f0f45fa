import pytest

from trsm.control import set_mode, state_export, validate_state
from trsm.errors import ConfigError, DataError
from trsm.synthesis import build_design, diode_accounting


@pytest.fixture(scope="module")
def design():
    return build_design()


@pytest.mark.parametrize("mode,bit,hemi", [("reflection", True, "upper"),
                                           ("transmission", False, "lower")])
def test_set_mode_follows_state_table(design, mode, bit, hemi):
    s = set_mode(design, mode)
    assert s.diode_count == 200
    assert all(b is bit for b in s.bits)
    assert s.hemisphere == hemi
    assert s.polarization == "y"


def test_set_mode_single_element():
    s = set_mode(build_design(rows=1, cols=1), "reflection")
    assert s.bits == (True,)


def test_set_mode_rejects_unknown_mode(design):
    with pytest.raises(ConfigError):
        set_mode(design, "absorb")


@pytest.mark.parametrize("shape", [(1, 1), (2, 3), (10, 20)])
def test_round_trip(shape):
    d = build_design(rows=shape[0], cols=shape[1])
    for mode in ("reflection", "transmission"):
        check = validate_state(d, set_mode(d, mode).bits)
        assert check.mode == mode and check.violations == ()


def test_single_flip_is_mixed(design):
    bits = [1] * 200
    bits[37] = 0
    check = validate_state(design, bits)
    assert check.mode == "mixed" and check.violations == (37,)


def test_tie_lists_off_diodes():
    d = build_design(rows=1, cols=4)
    assert validate_state(d, [1, 0, 1, 0]).violations == (1, 3)


def test_validate_errors(design):
    with pytest.raises(DataError):
        validate_state(design, [1] * 199)


def test_export_rows(design):
    for mode, flag in (("reflection", "1"), ("transmission", "0")):
        text = state_export(set_mode(design, mode))
        lines = text.split("\n")
        assert lines[0] == "diode_id,group_elements,state"
        assert text.endswith("\n") and "\r" not in text
        rows = lines[1:-1]
        assert len(rows) == diode_accounting(design)["diode_count"]
        assert all(r.split(",")[2] == flag for r in rows)
        assert [int(r.split(",")[0]) for r in rows] == list(range(200))


def test_export_is_byte_stable(design):
    a = state_export(set_mode(design, "reflection")).encode()
    b = state_export(set_mode(build_design(), "reflection")).encode()
    assert a == b
