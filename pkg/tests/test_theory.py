import numpy as np
import pytest

from sharedsvd import (
    ContractError,
    RateQuery,
    classify_phase,
    phase_grid,
    rate_upper,
    snr_thresholds,
    space_membership,
    switch_profile,
    write_phase_svg,
)
from sharedsvd.harness import table1_spec

from conftest import (
    explicit_geometry_spec,
    scenario2_spec,
    strong_unshared_spec,
    worked_example_spec,
)


# ---------------------------------------------------------------------------
# rate_upper
# ---------------------------------------------------------------------------

def test_rate_upper_vanishes_at_high_strength():
    q = RateQuery(n=10, p_total=40, strength_sq=1e9, r=2)
    assert rate_upper(q) < 1e-6


def test_rate_upper_cap_active():
    q = RateQuery(n=1, p_total=1, strength_sq=1.0, r=1)
    assert rate_upper(q) == 1.0  # min(2, 1)
    qf = RateQuery(n=1, p_total=1, strength_sq=1.0, r=1, norm="frobenius_squared")
    assert rate_upper(qf) == 1.0


def test_rate_upper_linear_in_p_when_uncapped():
    # p dominates the strength but the cap stays inactive
    base = RateQuery(n=5, p_total=10**7, strength_sq=1e5, r=1)
    double = RateQuery(n=5, p_total=2 * 10**7, strength_sq=1e5, r=1)
    assert rate_upper(base) < 1.0
    ratio = rate_upper(double) / rate_upper(base)
    assert 1.9 < ratio < 2.1


def test_rate_upper_monotonicity_grid():
    rng = np.random.default_rng(0)
    for _ in range(100):
        n = int(rng.integers(2, 50))
        p = int(rng.integers(2, 500))
        s = float(rng.uniform(10, 1e4))
        r = int(rng.integers(1, 5))
        q = RateQuery(n=n, p_total=p, strength_sq=s, r=r)
        assert rate_upper(RateQuery(n=n, p_total=p, strength_sq=2 * s, r=r)) <= rate_upper(q)
        assert rate_upper(RateQuery(n=n + 1, p_total=p, strength_sq=s, r=r)) >= rate_upper(q)
        assert rate_upper(RateQuery(n=n, p_total=p + 1, strength_sq=s, r=r)) >= rate_upper(q)
        qf = RateQuery(n=n, p_total=p, strength_sq=s, r=r, norm="frobenius_squared")
        qf2 = RateQuery(n=n, p_total=p, strength_sq=s, r=r + 1, norm="frobenius_squared")
        assert rate_upper(qf2) >= rate_upper(qf)


# ---------------------------------------------------------------------------
# snr_thresholds / classify_phase
# ---------------------------------------------------------------------------

def test_snr_thresholds_closed_forms():
    t = snr_thresholds(7, 7, 7)
    assert t["stacked"] == pytest.approx(7 * np.sqrt(3))
    assert t["individual_1"] == pytest.approx(7 * np.sqrt(2))
    assert snr_thresholds(10, 20, 20)["stacked"] == pytest.approx(np.sqrt(500))


def test_snr_thresholds_limit_large_p2():
    t = snr_thresholds(10, 20, 10**8)
    assert t["stacked"] / t["individual_2"] == pytest.approx(1.0, abs=1e-3)


def test_classify_phase_distinguished_region():
    # stack consistent while neither individual is
    thr = snr_thresholds(50, 5000, 5000)
    region = classify_phase(50, 5000, 5000, snr1=thr["individual_1"] * 0.8,
                            snr2=thr["individual_2"] * 0.8,
                            snr_stacked=thr["stacked"] * 1.3)
    assert region.value in ("stack_consistent", "stack_optimal")
    assert not region.flags["x1_consistent"]
    assert not region.flags["x2_consistent"]


def test_classify_phase_deep_interior_optimal():
    region = classify_phase(10, 30, 30, snr1=1e9, snr2=1e9, snr_stacked=2e9)
    assert region.value == "stack_optimal"


def test_classify_phase_everything_tiny_impossible():
    region = classify_phase(10, 30, 30, snr1=1.0, snr2=1.0, snr_stacked=2.0)
    assert region.value == "impossible"


def test_classify_phase_individual_only():
    # huge p2 pushes the stacked threshold far above the x1 threshold
    thr = snr_thresholds(20, 40, 10**6)
    snr1 = thr["individual_1"] * 2
    region = classify_phase(20, 40, 10**6, snr1=snr1, snr2=0.0, snr_stacked=snr1)
    assert region.value == "x1_consistent"


def test_classify_phase_pre():
    with pytest.raises(ContractError):
        classify_phase(10, 10, 10, snr1=5.0, snr2=1.0, snr_stacked=2.0)


def test_classify_phase_monotone_grid():
    values = np.linspace(0, 1200, 20)
    for n, p1, p2 in [(50, 5000, 5000), (20, 100, 4000)]:
        level = np.empty((20, 20), dtype=int)
        for i, s1 in enumerate(values):
            for j, s2 in enumerate(values):
                level[i, j] = classify_phase(n, p1, p2, s1, s2, s1 + s2).level()
        assert np.all(np.diff(level, axis=0) >= 0)
        assert np.all(np.diff(level, axis=1) >= 0)


def test_phase_grid_rows_and_svg(tmp_path):
    rows = phase_grid(50, 5000, 5000, np.linspace(0, 1000, 8))
    assert len(rows) == 64
    assert {r[2] for r in rows} >= {"impossible"}
    out = tmp_path / "phase.svg"
    write_phase_svg(out, rows)
    text = out.read_text()
    assert text.startswith("<svg") and "rect" in text


# ---------------------------------------------------------------------------
# space_membership
# ---------------------------------------------------------------------------

def test_membership_fully_shared_in_F():
    spec = table1_spec(10, 20, 20, 50, 50, seed=0)
    gamma_sq = 2 * 12.5**2
    rep = space_membership(spec, "F", strength_sq=gamma_sq)
    assert rep.member, rep.violations
    rep2 = space_membership(spec, "F", strength_sq=gamma_sq * 1.01)
    assert not rep2.member


def test_membership_scenario1_violation_reported():
    # an unshared value above the min combined shared value breaks Eq-style
    # weak-unshared condition
    spec = worked_example_spec()
    rep = space_membership(spec, "H1", strength_sq=1.0)
    assert not rep.member
    assert any("scenario" in v or ">=" in v for v in rep.violations)


def test_membership_worked_example_in_H():
    spec = worked_example_spec(alpha=3.0, beta=4.0)
    prof = switch_profile(spec)
    rep = space_membership(spec, "H", strength_sq=prof.min_gap_sq)
    assert rep.member, rep.violations
    rep2 = space_membership(spec, "H", strength_sq=prof.min_gap_sq * 1.01)
    assert not rep2.member


def test_membership_H2_scenario():
    spec = scenario2_spec()
    prof = switch_profile(spec)
    assert prof.g2 is not None
    rep = space_membership(spec, "H2", strength_sq=prof.g2)
    assert rep.member, rep.violations


def test_membership_S_explicit_geometry(rng):
    spec = explicit_geometry_spec(rng)
    prof = switch_profile(spec)
    rep = space_membership(spec, "S", strength_sq=prof.min_gap_sq)
    assert rep.member, rep.violations
    # H requires orthogonal unshared subspaces; correlated blocks violate it
    rep_h = space_membership(spec, "H", strength_sq=1.0)
    assert not rep_h.member
    assert any("orthogonal" in v for v in rep_h.violations)


def test_membership_F_with_actual_gamma_always_member(rng):
    for seed in range(5):
        spec = table1_spec(10, 20, 20, 30 + seed, 40 + seed, seed=seed)
        gamma_sq = min(
            sum(spec.values[(i, lab)] ** 2 for i in (1, 2)) for lab in spec.shared_labels)
        assert space_membership(spec, "F", strength_sq=gamma_sq).member


def test_membership_violations_carry_both_sides():
    spec = table1_spec(10, 20, 20, 50, 50, seed=0)
    rep = space_membership(spec, "F", strength_sq=1e9)
    assert not rep.member
    assert any("<" in v and "312.5" in v for v in rep.violations)
