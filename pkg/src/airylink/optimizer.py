"""Coarse-to-fine parameter search for the shadowed user's curved beam.

The mixed scenario has one shadowed user (index 0, served by a cubic-phase
beam) and one bright user (index 1, served by a fixed traditional beam).
The search tunes the cubic beam's (bending, focal, angle-offset) triple to
maximize the post-precoding sum rate, subject to a floor on the shadowed
user's own channel gain: |h11|^2 >= eta * |h11_geo|^2, where h11_geo is
the gain of the purely geometric design. The constraint stops the search
from trading UE-1's link entirely away for orthogonality.

Stage 1 exhaustively scans a coarse grid (loop order: bending outer, focal
middle, angle inner; first-found wins ties via strict > improvement).
Stage 2 re-scans a refined grid spanning +/- fine_span coarse steps around
the stage-1 incumbent on every axis at fine_refine_factor x resolution.
Identical inputs always produce the identical outcome and trace, including
under concurrent evaluation, because the reduction replays the sequential
loop order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .beams import AiryParams, airy_weights, traditional_focus
from .channels import FRESNEL_DIFFRACTION, ChannelMatrix, beam_column
from .errors import AirylinkError, ConfigError, InfeasibleSearchError
from .geometry import GridSpec, ScenarioConfig, geometric_angle
from .precoding import link_metrics, rzf_precoder

__all__ = [
    "SearchGrids",
    "TraceEntry",
    "SearchOutcome",
    "default_search_grids",
    "geometric_baseline_params",
    "evaluate_candidate",
    "coarse_to_fine_search",
    "complexity_estimate",
]

# Geometric comparator design for the shadowed user: moderate bending with
# the focal region placed a little beyond the obstacle plane.
GEO_BENDING = -25.0
GEO_FOCAL = 1.75


def default_search_grids() -> "SearchGrids":
    """Stock grids: bending -60..-10 step 5, focal 1.00..2.50 m step 0.25,
    angle offset -5..+5 deg step 0.5 deg; fine stage refines 5x within one
    coarse step. 11*7*21 = 1617 coarse candidates."""
    return SearchGrids(
        coarse_bending=tuple(float(b) for b in range(-60, -5, 5)),
        coarse_focal=tuple(1.0 + 0.25 * i for i in range(7)),
        coarse_dtheta=tuple(math.radians(-5.0 + 0.5 * i) for i in range(21)),
        fine_refine_factor=5,
        fine_span=1,
    )


@dataclass(frozen=True)
class SearchGrids:
    """Search space: coarse axis values plus the fine-stage refinement rule."""

    coarse_bending: tuple
    coarse_focal: tuple
    coarse_dtheta: tuple
    fine_refine_factor: int = 5
    fine_span: int = 1

    def __post_init__(self):
        for name, axis in (
            ("coarse_bending", self.coarse_bending),
            ("coarse_focal", self.coarse_focal),
            ("coarse_dtheta", self.coarse_dtheta),
        ):
            if len(axis) == 0:
                raise ConfigError(f"{name} must not be empty")
            if list(axis) != sorted(axis):
                raise ConfigError(f"{name} must be sorted ascending")
        if self.fine_refine_factor < 2:
            raise ConfigError(
                f"fine_refine_factor must be >= 2, got {self.fine_refine_factor}"
            )
        if self.fine_span < 1:
            raise ConfigError(f"fine_span must be >= 1, got {self.fine_span}")


@dataclass(frozen=True)
class TraceEntry:
    """One evaluated candidate: parameters, measured quantities, verdict."""

    bending: float
    focal: float
    dtheta: float
    h11_power: float
    rate: float
    feasible: bool
    stage: str


@dataclass(frozen=True)
class SearchOutcome:
    best_params: AiryParams
    best_rate: float
    baseline_gain: float
    threshold: float
    evaluations: int
    rejected_by_constraint: int
    trace: tuple


def geometric_baseline_params(scenario: ScenarioConfig) -> AiryParams:
    """The no-search comparator: stock (bending, focal) aimed straight at
    the shadowed user's geometric angle."""
    return AiryParams(
        bending=GEO_BENDING,
        focal=GEO_FOCAL,
        launch_angle=geometric_angle(scenario.users[0]),
    )


def evaluate_candidate(
    scenario: ScenarioConfig,
    params: AiryParams,
    fixed_h2: np.ndarray,
    scale: complex = 1.0 + 0.0j,
) -> tuple:
    """Score one cubic-beam design for the shadowed user.

    Builds the candidate beam, propagates it through the obstacle cascade
    to get the first effective-channel column, pairs it with the
    precomputed bright-user column, and runs the full precoding + metrics
    stack. Returns (sum_rate, |h11|^2).
    """
    if scenario.k != 2:
        raise ConfigError(f"the search expects exactly 2 users, got {scenario.k}")
    w1 = airy_weights(scenario.array, scenario.carrier, params)
    w2 = traditional_focus(scenario.array, scenario.carrier, scenario.users[1])
    h1 = beam_column(scenario, w1.weights, scale)
    h_eff = ChannelMatrix(
        np.column_stack([h1, fixed_h2]), model=FRESNEL_DIFFRACTION, kind="effective"
    )
    w_rf = np.column_stack([w1.weights, w2.weights])
    pre = rzf_precoder(h_eff, w_rf, scenario.tx_power, scenario.rzf_epsilon)
    rec = link_metrics(h_eff, pre, scenario.noise_power)
    if math.isnan(rec.sum_rate):
        raise AirylinkError(f"candidate {params} produced a NaN sum rate")
    return rec.sum_rate, float(abs(h1[0]) ** 2)


def _fine_axis(coarse: tuple, center: float, span: int, refine: int) -> list:
    """Refined axis around `center`: +/- span coarse steps at refine x
    resolution. A singleton coarse axis has no step to refine, so the axis
    collapses to the incumbent value."""
    if len(coarse) < 2:
        return [center]
    step = (coarse[-1] - coarse[0]) / (len(coarse) - 1)
    fine_step = step / refine
    n = span * refine
    return [center + i * fine_step for i in range(-n, n + 1)]


def _scan(
    candidates: list,
    evaluate,
    threshold: float,
    stage: str,
    workers: int | None,
):
    """Evaluate candidates and reduce to the best feasible one.

    Evaluation may be concurrent; the reduction walks results in candidate
    (= loop) order with strict improvement, so ties resolve exactly as the
    sequential nested loops would.
    """
    if workers is not None and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(evaluate, candidates))
    else:
        results = [evaluate(c) for c in candidates]

    best = None  # (rate, params-tuple)
    trace = []
    rejected = 0
    max_h11 = 0.0
    for (b, f, dt), (rate, h11_power) in zip(candidates, results):
        max_h11 = max(max_h11, h11_power)
        feasible = h11_power >= threshold
        trace.append(TraceEntry(b, f, dt, h11_power, rate, feasible, stage))
        if not feasible:
            rejected += 1
            continue
        if best is None or rate > best[0]:
            best = (rate, (b, f, dt))
    return best, trace, rejected, max_h11


def coarse_to_fine_search(
    scenario: ScenarioConfig,
    grids: SearchGrids,
    eta: float = 0.4,
    scale: complex = 1.0 + 0.0j,
    workers: int | None = None,
) -> SearchOutcome:
    """Run the two-stage constrained search for the shadowed user's beam.

    `scale` is the cross-model calibration constant (see
    channels.remark1_calibration); it multiplies every channel column so
    absolute SINRs line up with the closed-form model.
    """
    if not 0.0 < eta < 1.0:
        raise ConfigError(f"eta must lie in (0, 1), got {eta}")
    if scenario.obstacle is None:
        raise ConfigError("the search is defined for an obstructed scenario")
    theta_geo = geometric_angle(scenario.users[0])

    # The bright user's column never changes; build it once.
    w2 = traditional_focus(scenario.array, scenario.carrier, scenario.users[1])
    fixed_h2 = beam_column(scenario, w2.weights, scale)

    def evaluate(cand):
        b, f, dt = cand
        params = AiryParams(bending=b, focal=f, launch_angle=theta_geo + dt)
        return evaluate_candidate(scenario, params, fixed_h2, scale)

    # Stage 0: constraint threshold from the geometric design's own gain.
    _, h11_geo = evaluate_candidate(
        scenario, geometric_baseline_params(scenario), fixed_h2, scale
    )
    tau = eta * h11_geo

    coarse = [
        (b, f, dt)
        for b in grids.coarse_bending
        for f in grids.coarse_focal
        for dt in grids.coarse_dtheta
    ]
    best, trace, rejected, max_h11 = _scan(coarse, evaluate, tau, "coarse", workers)
    evaluations = len(coarse)
    if best is None:
        raise InfeasibleSearchError(
            f"no coarse candidate met the gain constraint: max |h11|^2 = "
            f"{max_h11:.6e} < threshold {tau:.6e}",
            max_h11_power=max_h11,
            threshold=tau,
        )

    axes_refinable = (
        len(grids.coarse_bending) > 1
        or len(grids.coarse_focal) > 1
        or len(grids.coarse_dtheta) > 1
    )
    if axes_refinable:
        b0, f0, dt0 = best[1]
        fine = [
            (b, f, dt)
            for b in _fine_axis(grids.coarse_bending, b0, grids.fine_span, grids.fine_refine_factor)
            for f in _fine_axis(grids.coarse_focal, f0, grids.fine_span, grids.fine_refine_factor)
            for dt in _fine_axis(grids.coarse_dtheta, dt0, grids.fine_span, grids.fine_refine_factor)
        ]
        fine_best, fine_trace, fine_rejected, _ = _scan(fine, evaluate, tau, "fine", workers)
        evaluations += len(fine)
        rejected += fine_rejected
        trace.extend(fine_trace)
        if fine_best is not None and fine_best[0] > best[0]:
            best = fine_best

    rate, (b, f, dt) = best
    return SearchOutcome(
        best_params=AiryParams(bending=b, focal=f, launch_angle=theta_geo + dt),
        best_rate=rate,
        baseline_gain=h11_geo,
        threshold=tau,
        evaluations=evaluations,
        rejected_by_constraint=rejected,
        trace=tuple(trace),
    )


def complexity_estimate(grids: SearchGrids, grid_spec: GridSpec) -> float:
    """Abstract cost (candidate count) x (Nx log2 Nx) of one FFT cascade."""
    n_coarse = (
        len(grids.coarse_bending) * len(grids.coarse_focal) * len(grids.coarse_dtheta)
    )
    axes = (grids.coarse_bending, grids.coarse_focal, grids.coarse_dtheta)
    if all(len(a) < 2 for a in axes):
        n_fine = 0
    else:
        n_fine = 1
        for a in axes:
            n_fine *= (
                2 * grids.fine_span * grids.fine_refine_factor + 1 if len(a) > 1 else 1
            )
    return (n_coarse + n_fine) * grid_spec.nx * math.log2(grid_spec.nx)
