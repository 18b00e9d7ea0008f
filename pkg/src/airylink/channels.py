"""Channel construction: free-space Green's model and diffraction model.

Two routes to a channel matrix, kept deliberately independent so each can
check the other:

* the Green's model writes each element->user coefficient in closed form,
  lambda/(4 pi r) e^{-j k0 r}, valid only with nothing in the way;
* the diffraction model launches each analog beam as an aperture field and
  runs it through the wave-optics cascade (propagate, mask at the knife
  edge, propagate, sample at the user).

The two models use different amplitude conventions (a closed-form spread
factor versus a 1D Fresnel kernel), so a single complex calibration
constant is fitted once per scenario on the obstacle-free geometry and
applied to diffraction-model channels. After calibration the models agree
to better than 2% on the obstacle-free reference, which is what makes
SINR values comparable across the two.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import AirylinkError, ConfigError, ModelMismatchError
from .geometry import ScenarioConfig
from .propagation import (
    ComplexField,
    apply_mask,
    launch_aperture,
    propagate_angular_spectrum,
    sample_field,
)

__all__ = [
    "ChannelMatrix",
    "greens_channel",
    "effective_channel_greens",
    "beam_column",
    "effective_channel_diffraction",
    "remark1_calibration",
]

GREENS_FREE_SPACE = "greens_free_space"
FRESNEL_DIFFRACTION = "fresnel_diffraction"


@dataclass(frozen=True)
class ChannelMatrix:
    """Complex channel matrix with provenance tags.

    kind "physical": rows = users, columns = array elements (K x N).
    kind "effective": rows = users, columns = analog beams (K x K).
    """

    entries: np.ndarray
    model: str
    kind: str

    def __post_init__(self):
        if self.model not in (GREENS_FREE_SPACE, FRESNEL_DIFFRACTION):
            raise AirylinkError(f"unknown channel model {self.model!r}")
        if self.kind not in ("physical", "effective"):
            raise AirylinkError(f"unknown channel kind {self.kind!r}")
        if not np.all(np.isfinite(self.entries)):
            raise AirylinkError("channel matrix contains NaN or Inf entries")
        if self.kind == "effective" and self.entries.shape[0] != self.entries.shape[1]:
            raise AirylinkError(
                f"effective channel must be square (one beam per user), "
                f"got shape {self.entries.shape}"
            )

    @property
    def k(self) -> int:
        return self.entries.shape[0]


def greens_channel(scenario: ScenarioConfig) -> ChannelMatrix:
    """Closed-form free-space channel, h_{k,n} = lambda/(4 pi r) e^{-j k0 r}.

    Only valid with an unobstructed line of sight from every element to
    every user; refuses to run when the scenario has an obstacle.
    """
    if scenario.obstacle is not None:
        raise ModelMismatchError(
            "the closed-form free-space model cannot represent an obstacle; "
            "use effective_channel_diffraction for blocked scenarios"
        )
    lam = scenario.carrier.wavelength
    k0 = scenario.carrier.wavenumber
    xs = np.asarray(scenario.array.element_x())
    rows = []
    for u in scenario.users:
        r = np.hypot(xs - u.x, u.z)
        rows.append(lam / (4.0 * math.pi * r) * np.exp(-1j * k0 * r))
    return ChannelMatrix(np.vstack(rows), model=GREENS_FREE_SPACE, kind="physical")


def effective_channel_greens(h_phys: ChannelMatrix, w_rf: np.ndarray) -> ChannelMatrix:
    """Effective (per-beam) channel: plain product of the physical matrix
    with the N x K analog beam matrix."""
    if h_phys.kind != "physical":
        raise AirylinkError("effective_channel_greens expects a physical-kind matrix")
    w = np.asarray(w_rf, dtype=complex)
    if w.ndim != 2 or w.shape[0] != h_phys.entries.shape[1]:
        raise AirylinkError(
            f"beam matrix shape {w.shape} does not match {h_phys.entries.shape[1]} elements"
        )
    return ChannelMatrix(h_phys.entries @ w, model=h_phys.model, kind="effective")


def _propagate_beam_to_depths(
    scenario: ScenarioConfig, launch: ComplexField, depths
) -> dict:
    """Carry one launched beam to each distinct user depth.

    The field at the obstacle plane is masked once and reused for every
    depth beyond it.
    """
    lam = scenario.carrier.wavelength
    obstacle = scenario.obstacle
    fields = {}
    masked = None
    for depth in depths:
        if obstacle is None or depth <= obstacle.depth:
            fields[depth] = propagate_angular_spectrum(launch, depth - launch.depth, lam)
        else:
            if masked is None:
                at_obstacle = propagate_angular_spectrum(
                    launch, obstacle.depth - launch.depth, lam
                )
                masked = apply_mask(at_obstacle, obstacle)
            fields[depth] = propagate_angular_spectrum(masked, depth - obstacle.depth, lam)
    return fields


def _amplitude_conversion(wavelength: float, depth: float) -> float:
    """Convert the 1D Fresnel field amplitude to the closed-form channel
    convention at one depth.

    The 1D kernel spreads as 1/sqrt(lambda z) while the closed-form channel
    decays as lambda/(4 pi r); their ratio, lambda^{3/2}/(4 pi sqrt(z)),
    depends on depth, so it must be applied per user before a single global
    calibration constant can reconcile the two models. Without it, users at
    different depths disagree by sqrt(z2/z1) and no scalar fit closes the gap.
    """
    return wavelength**1.5 / (4.0 * math.pi * math.sqrt(depth))


def beam_column(
    scenario: ScenarioConfig, weights, scale: complex = 1.0 + 0.0j
) -> np.ndarray:
    """Per-user complex response of one analog beam (length-K column).

    This is the diffraction model for a single beam: launch the weights as
    an aperture field, run the knife-edge cascade once per distinct user
    depth, sample at each user, convert each sample to the closed-form
    amplitude convention for its depth, and scale by the cross-model
    calibration.
    """
    half = scenario.grid.interior_half_width
    for u in scenario.users:
        if abs(u.x) >= half:
            raise ConfigError(
                f"user {u.label!r} at x={u.x:.4e} m lies outside the usable window "
                f"(|x| < {half:.4e} m)"
            )
    lam = scenario.carrier.wavelength
    launch = launch_aperture(
        np.asarray(weights, dtype=complex), scenario.array, scenario.grid, lam
    )
    depths = sorted({u.z for u in scenario.users})
    fields = _propagate_beam_to_depths(scenario, launch, depths)
    return scale * np.array(
        [
            _amplitude_conversion(lam, u.z) * sample_field(fields[u.z], u.x)
            for u in scenario.users
        ]
    )


def effective_channel_diffraction(
    scenario: ScenarioConfig,
    w_rf: np.ndarray,
    scale: complex = 1.0 + 0.0j,
    workers: int | None = None,
) -> ChannelMatrix:
    """Wave-optics effective channel.

    Entry (k, j) is the complex field that beam column j produces at user
    k's position after the launch filter and the knife-edge cascade,
    multiplied by the cross-model calibration `scale` (see
    remark1_calibration; pass 1 for the raw uncalibrated field).

    Beam columns are independent and may be propagated concurrently
    (`workers` > 1); results are assembled by column index so the output
    never depends on scheduling.
    """
    w = np.asarray(w_rf, dtype=complex)
    if w.ndim != 2 or w.shape[0] != scenario.array.n:
        raise AirylinkError(
            f"beam matrix shape {w.shape} does not match {scenario.array.n} elements"
        )

    def column(j: int) -> np.ndarray:
        return beam_column(scenario, w[:, j], scale)

    n_beams = w.shape[1]
    if workers is not None and workers > 1 and n_beams > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            cols = list(pool.map(column, range(n_beams)))
    else:
        cols = [column(j) for j in range(n_beams)]
    return ChannelMatrix(np.column_stack(cols), model=FRESNEL_DIFFRACTION, kind="effective")


def remark1_calibration(scenario: ScenarioConfig) -> tuple[complex, float]:
    """Fit the single complex constant tying the two channel models together.

    Runs both models on the obstacle-free scenario with traditional
    (matched) beams and solves the scalar least-squares problem

        c* = argmin_c  sum |H_greens - c * H_diffraction|^2

    Returns (c*, residual) where residual is the relative Frobenius misfit
    after scaling. Callers apply c* to every diffraction-model channel of
    the same scenario family so both models share one amplitude scale.
    """
    if scenario.obstacle is not None:
        raise ModelMismatchError(
            "calibration must run on the obstacle-free geometry; "
            "call scenario.without_obstacle() first"
        )
    from .beams import build_codebook  # local import to avoid a module cycle

    w_rf = build_codebook(scenario, "trad_all").matrix
    h_greens = effective_channel_greens(greens_channel(scenario), w_rf).entries
    h_diff = effective_channel_diffraction(scenario, w_rf).entries
    denom = np.vdot(h_diff, h_diff).real
    if denom == 0.0:
        raise AirylinkError("diffraction channel is identically zero; cannot calibrate")
    c = np.vdot(h_diff, h_greens) / denom
    residual = float(
        np.linalg.norm(h_greens - c * h_diff) / np.linalg.norm(h_greens)
    )
    return complex(c), residual
