"""Rate formulas, SNR phase transitions, and parameter-space membership.

All signal strengths are tau^2-normalized (noise variance scaled to one), and
all rate constants are set to 1: the formulas are order-level envelopes, not
sharp predictions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import ContractError
from .model import SignalSpec, switch_profile

REGION_ORDER = ("impossible", "x1_consistent", "x2_consistent", "stack_consistent", "stack_optimal")
#: consistency level per region; x1/x2 sit on one level so the classifier is
#: monotone in each SNR argument
REGION_LEVEL = {"impossible": 0, "x1_consistent": 1, "x2_consistent": 1,
                "stack_consistent": 2, "stack_optimal": 3}


@dataclass(frozen=True)
class RateQuery:
    n: int
    p_total: int
    strength_sq: float   # gamma^2 or t^2, tau^2-normalized
    r: int
    norm: str = "spectral"

    def __post_init__(self):
        if min(self.n, self.p_total, self.r) < 1 or self.strength_sq <= 0:
            raise ContractError("RateQuery fields must be positive")
        if self.norm not in ("spectral", "frobenius_squared"):
            raise ContractError(f"unknown norm {self.norm!r}")


def rate_upper(q: RateQuery) -> float:
    """Minimax risk envelope: n(gamma^2 + p)/gamma^4 capped at 1 (spectral)
    or the r-scaled analogue capped at r (squared Frobenius)."""
    base = q.n * (q.strength_sq + q.p_total) / q.strength_sq**2
    if q.norm == "spectral":
        return float(min(base, 1.0))
    return float(min(q.r * base, float(q.r)))


def snr_thresholds(n: int, p1: int, p2: int) -> dict[str, float]:
    """Critical tau^2-normalized squared signal strengths for consistency:
    sqrt(n(n+p_i)) for each individual estimator, sqrt(n(n+p1+p2)) stacked."""
    if min(n, p1, p2) < 1:
        raise ContractError("dimensions must be positive")
    return {
        "individual_1": float(np.sqrt(n * (n + p1))),
        "individual_2": float(np.sqrt(n * (n + p2))),
        "stacked": float(np.sqrt(n * (n + p1 + p2))),
    }


@dataclass(frozen=True)
class PhaseRegion:
    """Classified region plus the individual consistency flags behind it."""

    value: str
    flags: dict[str, bool] = field(default_factory=dict)

    def level(self) -> int:
        """Consistency level (0 impossible .. 3 stack optimal)."""
        return REGION_LEVEL[self.value]


def classify_phase(n: int, p1: int, p2: int, snr1: float, snr2: float,
                   snr_stacked: float, comparable_ratio: float = 4.0) -> PhaseRegion:
    """Place a point of the SNR plane into the phase diagram.

    ``snr_stacked`` is the combined squared strength min_i{sigma_i^2(X_1) +
    sigma_i^2(X_2)}/tau^2 and must dominate both individual strengths. The
    stacked estimator is called optimal when it is consistent and either the
    dimensions are comparable (max/min ratio at most ``comparable_ratio``) or
    the combined strength gamma reaches p1+p2.
    """
    if snr_stacked < max(snr1, snr2):
        raise ContractError("stacking adds signal: snr_stacked must be >= max(snr1, snr2)")
    thr = snr_thresholds(n, p1, p2)
    flags = {
        "x1_consistent": snr1 >= thr["individual_1"],
        "x2_consistent": snr2 >= thr["individual_2"],
        "stack_consistent": snr_stacked >= thr["stacked"],
    }
    comparable = max(p1, p2) / min(p1, p2) <= comparable_ratio
    strong_signal = np.sqrt(snr_stacked) >= p1 + p2
    flags["stack_optimal"] = flags["stack_consistent"] and (comparable or strong_signal)
    for value in ("stack_optimal", "stack_consistent", "x1_consistent", "x2_consistent"):
        if flags[value]:
            return PhaseRegion(value=value, flags=flags)
    return PhaseRegion(value="impossible", flags=flags)


def phase_grid(n: int, p1: int, p2: int, snr_values) -> list[tuple[float, float, str]]:
    """Sweep a square (snr1, snr2) grid, treating the combined strength as
    snr1 + snr2, and return (snr1, snr2, region) rows."""
    rows = []
    for s2 in snr_values:
        for s1 in snr_values:
            region = classify_phase(n, p1, p2, float(s1), float(s2), float(s1) + float(s2))
            rows.append((float(s1), float(s2), region.value))
    return rows


_REGION_COLORS = {
    "impossible": "#bdbdbd",
    "x1_consistent": "#7fb3d5",
    "x2_consistent": "#b39ddb",
    "stack_consistent": "#e05c5c",
    "stack_optimal": "#3fa34d",
}


def write_phase_svg(path, rows, side: int = 420) -> None:
    """Render a (snr1, snr2, region) grid as a minimal SVG heatmap."""
    s1_vals = sorted({r[0] for r in rows})
    s2_vals = sorted({r[1] for r in rows})
    cw = side / len(s1_vals)
    ch = side / len(s2_vals)
    margin = 60
    width, height = side + margin + 150, side + margin + 20
    cells = []
    for s1, s2, region in rows:
        x = margin + s1_vals.index(s1) * cw
        y = side + 10 - (s2_vals.index(s2) + 1) * ch   # snr2 grows upward
        cells.append(f'<rect x="{x:.2f}" y="{y:.2f}" width="{cw:.2f}" height="{ch:.2f}" '
                     f'fill="{_REGION_COLORS[region]}"/>')
    legend = []
    for i, (region, color) in enumerate(_REGION_COLORS.items()):
        ly = 30 + 22 * i
        legend.append(f'<rect x="{side + margin + 10}" y="{ly}" width="14" height="14" fill="{color}"/>'
                      f'<text x="{side + margin + 30}" y="{ly + 12}" font-size="12">{region}</text>')
    svg = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">\n'
        f'<text x="{margin + side / 2:.0f}" y="{side + 40}" font-size="13" text-anchor="middle">'
        f'snr1 ({s1_vals[0]:g} .. {s1_vals[-1]:g})</text>\n'
        f'<text x="18" y="{10 + side / 2:.0f}" font-size="13" text-anchor="middle" '
        f'transform="rotate(-90 18 {10 + side / 2:.0f})">snr2 ({s2_vals[0]:g} .. {s2_vals[-1]:g})</text>\n'
        + "\n".join(cells) + "\n" + "\n".join(legend) + "\n</svg>\n"
    )
    with open(path, "w") as fh:
        fh.write(svg)


@dataclass(frozen=True)
class MembershipReport:
    member: bool
    violations: tuple[str, ...]


def _check(violations: list[str], ok: bool, text: str):
    if not ok:
        violations.append(text)


def space_membership(spec: SignalSpec, space: str, r: int | None = None,
                     strength_sq: float = 0.0, gap_constant: float = 0.1,
                     scenario_constant: float = 0.9) -> MembershipReport:
    """Check the defining inequalities of a parameter space.

    ``space`` is one of:

    - ``"F"``  fully shared, min combined squared value >= strength_sq;
    - ``"H"``  orthogonal unshared, relative gap condition at every switch
      (``gap_constant`` plays the unspecified constant c) and min gap >= t^2;
    - ``"H1"`` weak unshared signals (scenario ordering, max unshared below
      ``scenario_constant`` times the min combined shared, G1 >= t^2);
    - ``"H2"`` strong unshared signals (the mirrored conditions on G2);
    - ``"S"``  non-orthogonal variant of H, gaps taken from the closed-form
      stacked SVD.

    ``strength_sq`` is gamma^2 for F and t^2 otherwise. Violations carry both
    sides of each failed inequality.
    """
    if space not in ("F", "H", "H1", "H2", "S"):
        raise ContractError(f"unknown space {space!r}")
    violations: list[str] = []
    want_r = spec.r if r is None else r
    _check(violations, spec.r == want_r, f"shared rank {spec.r} != requested r {want_r}")

    if space == "F":
        _check(violations, not spec.all_unshared,
               f"space F admits no unshared vectors, found {len(spec.all_unshared)}")
        if spec.shared_labels:
            combined = min(sum(spec.values[(i, lab)] ** 2 for i in range(1, spec.k + 1))
                           for lab in spec.shared_labels)
            _check(violations, combined >= strength_sq,
                   f"min combined shared value^2 {combined:.6g} < gamma^2 {strength_sq:.6g}")
        else:
            violations.append("no shared vectors")
        return MembershipReport(member=not violations, violations=tuple(violations))

    if spec.k != 2:
        violations.append(f"space {space} is defined for k=2, spec has k={spec.k}")
        return MembershipReport(member=False, violations=tuple(violations))

    if space in ("H", "H1", "H2") and spec.unshared_geometry == "explicit":
        from .model import build_signal
        pair = build_signal(spec)
        u1, u2 = pair.unshared_frames
        if u1 is not None and u2 is not None:
            cross = float(np.max(np.abs(u1.T @ u2)))
            _check(violations, cross <= 1e-10,
                   f"unshared subspaces not orthogonal: max |U1*^T U2*| = {cross:.3e}")

    profile = switch_profile(spec)

    if space in ("H", "S"):
        for pos, gap in zip(profile.switch_set, profile.gaps):
            bound = gap_constant * float(profile.stacked_values[pos] ** 2)
            _check(violations, gap > bound,
                   f"switch at {pos}: gap^2 {gap:.6g} <= c*sigma_(s+1)^2 {bound:.6g}")
        if profile.min_gap_sq is None:
            violations.append("no eigen-gap is defined (no switches, no terminal shared vector)")
        else:
            _check(violations, profile.min_gap_sq >= strength_sq,
                   f"min gap^2 {profile.min_gap_sq:.6g} < t^2 {strength_sq:.6g}")
        return MembershipReport(member=not violations, violations=tuple(violations))

    if space == "H1":
        if profile.g1 is None:
            violations.append("scenario-I ordering fails: some matrix has an unshared value "
                              "above a shared one")
        else:
            combined_min = min(sum(spec.values[(i, lab)] ** 2 for i in (1, 2))
                               for lab in spec.shared_labels)
            max_unshared = max((spec.values[(v.owner, v.label)] ** 2 for v in spec.all_unshared),
                               default=0.0)
            _check(violations, max_unshared < scenario_constant * combined_min,
                   f"max unshared value^2 {max_unshared:.6g} >= c1*min combined shared "
                   f"{scenario_constant * combined_min:.6g}")
            _check(violations, profile.g1 >= strength_sq,
                   f"G1 {profile.g1:.6g} < t^2 {strength_sq:.6g}")
        return MembershipReport(member=not violations, violations=tuple(violations))

    # space == "H2"
    if profile.g2 is None:
        violations.append("scenario-II ordering fails: unshared values must sit above shared "
                          "ones in both matrices")
    else:
        d_min = min(min(spec.values[(i, lab)] for lab in spec.unshared_labels(i)) ** 2
                    for i in (1, 2))
        combined_max = max(sum(spec.values[(i, lab)] ** 2 for i in (1, 2))
                           for lab in spec.shared_labels)
        _check(violations, combined_max < scenario_constant * d_min,
               f"max combined shared value^2 {combined_max:.6g} >= c1*min unshared "
               f"{scenario_constant * d_min:.6g}")
        _check(violations, profile.g2 >= strength_sq,
               f"G2 {profile.g2:.6g} < t^2 {strength_sq:.6g}")
    return MembershipReport(member=not violations, violations=tuple(violations))
