import json

import pytest
from numpy.testing import assert_allclose

from trsm.config import DEFAULTS, apply_overrides, frequency_list, load_config
from trsm.errors import ConfigError, DataError


def test_defaults_load_without_file():
    cfg = load_config()
    assert cfg.design_frequency == 7.3e9
    assert cfg["aperture"]["rows"] == 10 and cfg["aperture"]["cols"] == 20
    assert cfg.sweep_frequencies[0] == 6.5e9 and cfg.sweep_frequencies[-1] == 8.5e9
    assert cfg.operating_band == (7.0e9, 8.0e9)


def test_shipped_config_matches_defaults():
    from pathlib import Path
    path = Path(__file__).resolve().parents[1] / "configs" / "prototype_default.json"
    cfg = load_config(path)
    base = load_config()
    for section in ("frequency", "aperture", "grid"):
        assert cfg[section] == base[section]


def test_frequency_list_forms():
    assert_allclose(frequency_list({"start": 7e9, "stop": 8e9, "step": 0.25e9}, "x"),
                    [7e9, 7.25e9, 7.5e9, 7.75e9, 8e9])
    assert_allclose(frequency_list(7.3e9, "x"), [7.3e9])
    assert_allclose(frequency_list([7e9, 8e9], "x"), [7e9, 8e9])
    for bad in ([], [-1.0], {"start": 8e9, "stop": 7e9, "step": 1e8}, "7e9"):
        with pytest.raises(ConfigError):
            frequency_list(bad, "x")


def test_overrides_parse_json_values():
    raw = apply_overrides({}, ["aperture.rows=4", "feed.polarization=y", "feed.q=null"])
    assert raw == {"aperture": {"rows": 4}, "feed": {"polarization": "y", "q": None}}
    with pytest.raises(ConfigError):
        apply_overrides({}, ["novalue"])


def test_unknown_key_rejected(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"aperture": {"rowz": 3}}))
    with pytest.raises(ConfigError):
        load_config(p)


@pytest.mark.parametrize("override", ["aperture.rows=0", "aperture.cell_kind=\"hex\"",
                                      "frequency.design_hz=-1", "table.source=\"file\"",
                                      "feed.position_m=[0,0]", "grid.dtheta_deg=0"])
def test_invalid_values(override):
    with pytest.raises(ConfigError):
        load_config(overrides=[override])


def test_bad_json_and_missing_files(tmp_path):
    p = tmp_path / "c.json"
    p.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(p)
    with pytest.raises(DataError):
        load_config(tmp_path / "absent.json")
    p.write_text(json.dumps({"table": {"source": "file", "path": "nope.csv"}}))
    with pytest.raises(DataError):
        load_config(p)


def test_table_path_relative_to_config(tmp_path):
    (tmp_path / "t.csv").write_text("x")
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"table": {"source": "file", "path": "t.csv"}}))
    assert load_config(p).table_path() == str(tmp_path / "t.csv")


def test_defaults_not_mutated():
    load_config(overrides=["aperture.rows=3"])
    assert DEFAULTS["aperture"]["rows"] == 10
