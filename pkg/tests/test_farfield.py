import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from trsm.constants import C0
from trsm.errors import DataError, FrequencyRangeError
from trsm.farfield import (
    AngularGrid,
    aperture_efficiency,
    budget_from_excitations,
    cut_metrics,
    directivity,
    efficiency_budget,
    element_excitations,
    evaluate_mode,
    gain_bandwidth_sweep,
    pattern_cut,
    pattern_metrics,
    radiate,
    realized_gain,
    three_db_band,
)
from trsm.feed import FeedModel
from trsm.pipeline import mode_report
from trsm.synthesis import ArrayDesign, build_design
from trsm.unitcell import PhaseTable

F0 = 7.3e9
LAM = C0 / F0
FINE = AngularGrid.regular(0.25, 1.0)


def _af_oracle_metrics(n, d_over_lam, e):
    """SLL and HPBW of an n-element uniform line times cos^e, on a very fine grid."""
    th = np.linspace(-90, 90, 180001)
    psi = 2 * math.pi * d_over_lam * np.sin(np.radians(th))
    with np.errstate(invalid="ignore", divide="ignore"):
        af = np.sin(n * psi / 2) / (n * np.sin(psi / 2))
    af = np.where(np.abs(psi) < 1e-12, 1.0, af)
    p = af ** 2 * np.cos(np.radians(th)).clip(0) ** (2 * e)
    k = p.size // 2
    db = 10 * np.log10(np.maximum(p / p[k], 1e-300))
    hi = np.argmax(db[k:] <= -3.0) + k
    hpbw = 2 * np.interp(-3.0, db[hi:hi - 2:-1], th[hi:hi - 2:-1])
    j = k
    while p[j + 1] < p[j]:
        j += 1
    sll = 10 * math.log10(p[j:].max() / p[k])
    return sll, hpbw


def _uniform(rows, cols, px, py, e=1.0, grid=FINE):
    d = ArrayDesign(rows, cols, px, py, FeedModel(1.0))
    return radiate(np.ones((rows, cols)), d, F0, grid, e)


def test_single_element_pattern_is_element_factor():
    p = _uniform(1, 1, 0.01, 0.01)
    assert_allclose(np.abs(p.field), np.cos(np.radians(p.theta))[:, None].clip(0)
                    * np.ones_like(p.phi), atol=1e-12)
    res = directivity(p)
    assert res.linear == pytest.approx(6.0, rel=1e-4)
    m = pattern_metrics(p)["cuts"]["E"]
    assert m.hpbw_deg == pytest.approx(90.0, abs=0.5)
    assert m.sll_db is None


@pytest.mark.xfail(strict=True, reason="a cos(theta) field gives 2(2q+1) = 6 with q = 1, not 8")
def test_single_cos_element_directivity_quoted():
    assert directivity(_uniform(1, 1, 0.01, 0.01)).linear == pytest.approx(8.0, rel=0.01)


def test_isotropic_hemisphere_directivity():
    res = directivity(_uniform(1, 1, 0.01, 0.01, e=0.0))
    assert res.linear == pytest.approx(2.0, rel=1e-4)
    assert res.dbi == pytest.approx(3.01, abs=0.01)


def test_two_element_half_wave_null_at_horizon():
    p = _uniform(1, 2, LAM / 2, 0.01, e=0.0)
    ang, val = pattern_cut(p, 0.0)
    assert val[-1] < 1e-20 and val[0] < 1e-20
    assert val[ang.size // 2] == pytest.approx(4.0)


def test_uniform_line_against_closed_form():
    p = _uniform(1, 10, LAM / 2, 0.01, e=0.0)
    sll, hpbw = _af_oracle_metrics(10, 0.5, 0.0)
    m = pattern_metrics(p)["cuts"]["H"]
    assert m.sll_db == pytest.approx(sll, abs=0.05)
    assert m.hpbw_deg == pytest.approx(hpbw, abs=0.05)
    assert m.sll_db == pytest.approx(-13.0, abs=0.3)
    assert m.hpbw_deg == pytest.approx(10.2, abs=0.3)


def test_uniform_lattice_sidelobes_match_line_theory():
    p = _uniform(10, 20, 0.011, 0.022)
    m = pattern_metrics(p)
    assert m["peak_theta_deg"] == 0.0
    sll_h, _ = _af_oracle_metrics(20, 0.011 / LAM, 1.0)
    sll_e, _ = _af_oracle_metrics(10, 0.022 / LAM, 1.0)
    assert m["cuts"]["H"].sll_db == pytest.approx(sll_h, abs=0.1)
    assert m["cuts"]["E"].sll_db == pytest.approx(sll_e, abs=0.1)
    for cut in m["cuts"].values():
        assert cut.sll_db == pytest.approx(-13.2, abs=0.4)


def test_uniform_lattice_directivity_near_area_limit():
    d = directivity(_uniform(10, 20, 0.011, 0.022)).dbi
    limit = 10 * math.log10(4 * math.pi * 0.22 * 0.22 / LAM ** 2)
    assert limit == pytest.approx(25.57, abs=0.01)
    assert abs(d - limit) <= 0.3


@pytest.mark.xfail(strict=True,
                   reason="hemispheric normalisation with a cos element factor overshoots 4piA/lambda^2")
def test_uniform_lattice_respects_area_bound():
    assert directivity(_uniform(10, 20, 0.011, 0.022)).dbi <= 25.6 + 0.1


def test_metrics_invariant_under_scaling():
    p = _uniform(10, 20, 0.011, 0.022, grid=AngularGrid.regular(0.5, 1.0))
    a, b = pattern_metrics(p), pattern_metrics(p.scaled(3.7 - 2j))
    for k in ("E", "H"):
        assert a["cuts"][k].sll_db == pytest.approx(b["cuts"][k].sll_db, abs=1e-9)
        assert a["cuts"][k].hpbw_deg == pytest.approx(b["cuts"][k].hpbw_deg, abs=1e-9)
    assert directivity(p).linear == pytest.approx(directivity(p.scaled(10.0)).linear)


def test_cut_metrics_flags_missing_null():
    ang = np.linspace(-90, 90, 7)
    m = cut_metrics(ang, 1.0 + 0.1 * np.cos(np.radians(ang)))
    assert m.sll_db is None and m.hpbw_deg is None


def test_coarse_grid_flag():
    p = _uniform(2, 2, 0.02, 0.02, grid=AngularGrid.regular(2.0, 4.0))
    assert directivity(p).coarse_grid
    assert not directivity(_uniform(2, 2, 0.02, 0.02)).coarse_grid


# --- excitations and budget ------------------------------------------------------

def _flat_table(mode, amp=1.0, phase=0.0):
    ul = np.linspace(0.0, 1.0, 5)
    return PhaseTable(mode, [6e9, 9e9], ul, np.full((2, 5), phase) - np.arange(5) * 100.0,
                      np.full((2, 5), amp))


def test_single_element_lossless_isotropic_feed():
    feed = FeedModel(0.0, position=(0.02, 0.0, 0.1))
    d = ArrayDesign(1, 1, 0.01, 0.01, feed, ul=np.zeros((1, 1)))
    a = element_excitations(d, _flat_table("reflection"), feed, F0, "reflection")
    assert abs(a[0, 0]) == pytest.approx(1.0 / math.hypot(0.02, 0.1))


def test_excitation_phase_flat_at_design_and_spreads_off_design(default_ctx):
    d, t = default_ctx.design, default_ctx.tables["reflection"]
    def spread(f):
        a = element_excitations(d, t, None, f, "reflection")
        ph = np.degrees(np.angle(a / a[0, 0]))
        return np.max(np.abs(ph))
    assert spread(F0) <= 2.0
    assert spread(1.06 * F0) > spread(F0)


def test_excitation_guards(default_ctx):
    d, t = default_ctx.design, default_ctx.tables["reflection"]
    with pytest.raises(DataError):
        element_excitations(d, t, None, F0, "transmission")
    with pytest.raises(FrequencyRangeError):
        element_excitations(d, t, None, 12e9, "reflection")
    bare = ArrayDesign(2, 2, 0.01, 0.01, FeedModel(1.0))
    with pytest.raises(DataError):
        element_excitations(bare, t, None, F0, "reflection")


def test_budget_ideal_case_all_ones():
    b = budget_from_excitations(np.ones((4, 5), complex), np.ones((4, 5)), 1.0)
    assert_allclose([b.spillover, b.illumination, b.element_loss, b.phase_error], 1.0)


def test_budget_terms_by_hand():
    a = np.array([1.0, 0.5j, 0.25]) * 0.8
    s = np.full(3, 0.8)
    b = budget_from_excitations(a, s, 0.6)
    mags = np.abs(a / s)
    assert b.illumination == pytest.approx(mags.sum() ** 2 / (3 * (mags ** 2).sum()))
    assert b.element_loss == pytest.approx(0.64)
    assert b.phase_error == pytest.approx(abs(a.sum()) ** 2 / np.abs(a).sum() ** 2)
    assert b.spillover == 0.6
    assert b.product == pytest.approx(0.6 * b.illumination * 0.64 * b.phase_error)


def test_halving_amplitude_costs_six_db_gain():
    feed = FeedModel(1.486, position=(0, 0, 0.15))
    d = build_design(rows=4, cols=4, feed=feed, table=_flat_table("reflection"), force=True)
    full = evaluate_mode(d, _flat_table("reflection"), None, F0, "reflection")
    half = evaluate_mode(d, _flat_table("reflection", amp=0.5), None, F0, "reflection")
    assert half.directivity.linear == pytest.approx(full.directivity.linear, rel=1e-12)
    assert full.gain_dbi - half.gain_dbi == pytest.approx(20 * math.log10(2), abs=1e-9)


def test_lossless_uniform_gain_equals_directivity():
    feed = FeedModel(0.0, position=(0, 0, 1e4))
    d = build_design(rows=1, cols=1, feed=feed, table=_flat_table("reflection"), force=True)
    ev = evaluate_mode(d, _flat_table("reflection"), None, F0, "reflection")
    # a remote isotropic feed spills almost everything, so compare without it
    assert ev.budget.element_loss == pytest.approx(1.0)
    assert ev.gain_dbi - 10 * math.log10(ev.budget.spillover) == pytest.approx(ev.directivity.dbi)


def test_mode_patterns_differ_only_through_amplitudes(default_ctx):
    d = default_ctx.design
    r = default_ctx.tables["reflection"]
    t = PhaseTable("transmission", r.frequencies, r.ul, r.phase, r.amplitude)
    pr = evaluate_mode(d, r, None, F0, "reflection").pattern
    pt = evaluate_mode(d, t, None, F0, "transmission").pattern
    assert_allclose(pr.field, pt.field, rtol=1e-12, atol=0)
    assert (pr.hemisphere, pt.hemisphere) == ("upper", "lower")
    assert (pr.boresight, pt.boresight) == ("-z", "+z")


# --- default design -------------------------------------------------------------------

@pytest.mark.parametrize("mode", ["reflection", "transmission"])
def test_default_report_invariants(default_ctx, mode):
    rep = mode_report(default_ctx, mode, sweep=False)
    for key in ("spillover_eff", "illumination_eff", "element_loss_eff", "phase_error_eff"):
        assert 0 < rep[key] <= 1 + 1e-12
    assert rep["peak_gain_dbi"] <= rep["directivity_dbi"]
    assert rep["peak_direction_deg"]["theta"] == 0.0
    assert rep["directivity_dbi"] <= 25.6 + 0.1
    ae = 10 ** (rep["peak_gain_dbi"] / 10) * LAM ** 2 / (4 * math.pi * 0.22 * 0.22)
    assert rep["aperture_eff"] == pytest.approx(ae, rel=1e-6)
    assert rep["hemisphere"] == ("upper" if mode == "reflection" else "lower")


def test_grid_refinement_converges(default_ctx):
    d, t = default_ctx.design, default_ctx.tables["reflection"]
    coarse = evaluate_mode(d, t, None, F0, "reflection", AngularGrid.regular(0.5, 1.0))
    fine = evaluate_mode(d, t, None, F0, "reflection", AngularGrid.regular(0.25, 0.5))
    assert abs(coarse.directivity.dbi - fine.directivity.dbi) < 0.05


def test_efficiency_budget_matches_gain(default_ctx):
    d, t = default_ctx.design, default_ctx.tables["transmission"]
    b = efficiency_budget(d, t, None, F0, "transmission")
    ev = evaluate_mode(d, t, None, F0, "transmission")
    assert ev.gain_dbi == pytest.approx(ev.directivity.dbi
                                        + 10 * math.log10(b.spillover * b.element_loss))
    assert realized_gain(d, t, None, F0, "transmission") == pytest.approx(ev.gain_dbi)


def test_aperture_efficiency_identity():
    g = 10 * math.log10(4 * math.pi * 0.0484 / LAM ** 2)
    assert aperture_efficiency(g, 0.0484, F0) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(DataError):
        aperture_efficiency(20.0, 0.0, F0)


# --- sweep -----------------------------------------------------------------------------

def test_sweep_consistency(default_ctx):
    d, t = default_ctx.design, default_ctx.tables["reflection"]
    grid = AngularGrid.regular(1.0, 2.0)
    sw = gain_bandwidth_sweep(d, t, None, "reflection", [7.0e9, F0, 7.6e9], grid)
    assert sw.gain_dbi[1] == realized_gain(d, t, None, F0, "reflection", grid)
    for g, ae, f in zip(sw.gain_dbi, sw.aperture_eff, sw.frequencies):
        assert ae == pytest.approx(aperture_efficiency(g, d.area, f), rel=1e-12)


def test_single_frequency_sweep_is_open_ended(default_ctx):
    d, t = default_ctx.design, default_ctx.tables["reflection"]
    sw = gain_bandwidth_sweep(d, t, None, "reflection", [F0], AngularGrid.regular(1.0, 2.0))
    assert sw.frequencies.size == 1 and sw.open_ended


def test_three_db_band_interpolates_edges():
    f = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
    g = np.array([0.0, 4.0, 6.0, 4.0, 0.0])
    k, lo, hi, open_ended = three_db_band(f, g)
    assert k == 2 and not open_ended
    assert lo == pytest.approx(1.75) and hi == pytest.approx(4.25)
    _, _, _, open_ended = three_db_band(f[:3], g[:3])
    assert open_ended


def test_flat_table_gain_is_single_peaked():
    feed = FeedModel(1.486, position=(0, 0, 0.1504))
    t = _flat_table("reflection")
    d = build_design(rows=6, cols=6, pitch_x=0.02, pitch_y=0.02, feed=feed, table=t, force=True)
    f = np.linspace(6.2e9, 8.8e9, 14)
    sw = gain_bandwidth_sweep(d, t, None, "reflection", f, AngularGrid.regular(1.0, 2.0))
    k = int(np.argmax(sw.gain_dbi))
    assert np.all(np.diff(sw.gain_dbi[:k + 1]) > -1e-9)
    assert np.all(np.diff(sw.gain_dbi[k:]) < 1e-9)


@pytest.mark.xfail(strict=True,
                   reason="with near-parallel cell curves the gain keeps rising with frequency "
                          "and peaks near the top of the band")
def test_reflection_sweep_peaks_near_design_frequency(default_ctx):
    d, t = default_ctx.design, default_ctx.tables["reflection"]
    f = np.round(np.arange(7.0e9, 8.0e9 + 1, 0.05e9), 3)
    sw = gain_bandwidth_sweep(d, t, None, "reflection", f, AngularGrid.regular(1.0, 2.0))
    assert abs(sw.peak_frequency - F0) <= 0.1e9
