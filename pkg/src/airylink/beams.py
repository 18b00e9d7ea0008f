"""Analog codebook generation.

Two beam families, both phase-only with uniform 1/sqrt(N) amplitude:

* traditional near-field focusing -- per-element phase conjugation of the
  spherical propagation phase toward a target point, the matched filter for
  an unobstructed link;
* cubic-phase ("curved") beams -- a lens term, a linear steering term, and a
  cubic term that makes the main lobe follow a parabolic arc instead of a
  straight ray, which is what lets energy hook around a knife edge.

All element positions are evaluated in meters; the cubic coefficient
`bending` is dimensionless and `focal` is a length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .geometry import (
    ArrayGeometry,
    Carrier,
    ScenarioConfig,
    UserPosition,
    classify_user,
    geometric_angle,
)

__all__ = [
    "AiryParams",
    "BeamWeights",
    "Codebook",
    "traditional_focus",
    "airy_weights",
    "build_codebook",
]

_NORM_TOL = 1e-12


@dataclass(frozen=True)
class AiryParams:
    """Cubic-beam parameters: bending (dimensionless, typically negative),
    focal length in meters, launch angle in radians."""

    bending: float
    focal: float
    launch_angle: float = 0.0

    def __post_init__(self):
        if not self.focal > 0:
            raise ConfigError(f"focal length must be positive, got {self.focal}")
        if not abs(self.launch_angle) < math.pi / 2:
            raise ConfigError(
                f"launch angle must satisfy |theta| < pi/2, got {self.launch_angle} rad"
            )

    def with_angle_offset(self, delta: float) -> "AiryParams":
        return AiryParams(self.bending, self.focal, self.launch_angle + delta)


@dataclass(frozen=True)
class BeamWeights:
    """One codebook column: N complex weights at unit Euclidean norm.

    `kind` is "traditional" or "airy"; the matching descriptor field
    (`target` or `params`) records what the column was built for.
    """

    weights: np.ndarray
    kind: str
    target: UserPosition | None = None
    params: AiryParams | None = None

    def __post_init__(self):
        norm = float(np.linalg.norm(self.weights))
        if abs(norm - 1.0) > _NORM_TOL:
            raise ConfigError(f"beam weights must have unit norm, got {norm!r}")

    @property
    def phases(self) -> np.ndarray:
        """Per-element phase in radians (what a phase-shifter bank realizes)."""
        return np.angle(self.weights)


@dataclass(frozen=True)
class Codebook:
    """Ordered collection of beams, one per user."""

    beams: tuple[BeamWeights, ...]

    @property
    def matrix(self) -> np.ndarray:
        """N x K analog precoding matrix (beams as columns)."""
        return np.column_stack([b.weights for b in self.beams])


def traditional_focus(
    array: ArrayGeometry, carrier: Carrier, target: UserPosition
) -> BeamWeights:
    """Near-field focusing weights: w_n = (1/sqrt(N)) e^{+j k0 r_n}.

    The +j sign conjugates the e^{-j k0 r} propagation phase, so all element
    contributions arrive at the target in phase.
    """
    if not target.z > 0:
        raise ConfigError(f"focus target must lie in front of the array (z > 0), got z={target.z}")
    xs = np.asarray(array.element_x())
    r = np.hypot(xs - target.x, target.z)
    w = np.exp(1j * carrier.wavenumber * r) / math.sqrt(array.n)
    return BeamWeights(weights=w, kind="traditional", target=target)


def airy_weights(
    array: ArrayGeometry, carrier: Carrier, params: AiryParams
) -> BeamWeights:
    """Cubic-phase beam: w_n = (1/sqrt(N)) e^{+j phi(x_n)} with

        phi(x) = k0 x^2 / (2 focal)  -  k0 sin(theta) x
                 + (2 pi / (3 lambda)) * bending * (x / focal)^3

    The quadratic term is a lens focused at depth ~focal, the linear term
    steers the launch direction, and the cubic term curves the trajectory:
    negative bending accelerates the lobe toward -x past the focal region.
    """
    xs = np.asarray(array.element_x())
    k0 = carrier.wavenumber
    lam = carrier.wavelength
    phase = (
        k0 * xs**2 / (2.0 * params.focal)
        - k0 * math.sin(params.launch_angle) * xs
        + (2.0 * math.pi / (3.0 * lam)) * params.bending * (xs / params.focal) ** 3
    )
    w = np.exp(1j * phase) / math.sqrt(array.n)
    return BeamWeights(weights=w, kind="airy", params=params)


def build_codebook(
    scenario: ScenarioConfig,
    strategy: str,
    airy_params: AiryParams | None = None,
) -> Codebook:
    """Assemble one beam per user.

    strategy "trad_all": every user gets a traditional focusing beam.
    strategy "airy_geo": every user gets a cubic beam sharing the given
        (bending, focal); the launch angle is replaced per user by that
        user's geometric angle atan2(x, z).
    strategy "mixed": shadowed users get the given cubic-beam parameters
        verbatim, bright users get traditional beams. Raises ConfigError
        when the scenario has no shadowed user (there is nothing for the
        curved beam to do).
    """
    if strategy == "trad_all":
        beams = [
            traditional_focus(scenario.array, scenario.carrier, u)
            for u in scenario.users
        ]
        return Codebook(tuple(beams))

    if strategy == "airy_geo":
        if airy_params is None:
            raise ConfigError("airy_geo strategy needs airy_params for (bending, focal)")
        beams = []
        for u in scenario.users:
            aimed = AiryParams(
                bending=airy_params.bending,
                focal=airy_params.focal,
                launch_angle=geometric_angle(u),
            )
            beams.append(airy_weights(scenario.array, scenario.carrier, aimed))
        return Codebook(tuple(beams))

    if strategy == "mixed":
        if airy_params is None:
            raise ConfigError("mixed strategy needs airy_params for the shadowed user")
        if scenario.obstacle is None:
            raise ConfigError("mixed strategy needs an obstacle; no user can be shadowed")
        flags = [
            classify_user(u, scenario.obstacle, scenario.array) == "shadowed"
            for u in scenario.users
        ]
        if not any(flags):
            raise ConfigError(
                "mixed strategy requires at least one shadowed user; "
                "all users have line of sight"
            )
        beams = []
        for u, shadowed in zip(scenario.users, flags):
            if shadowed:
                beams.append(airy_weights(scenario.array, scenario.carrier, airy_params))
            else:
                beams.append(traditional_focus(scenario.array, scenario.carrier, u))
        return Codebook(tuple(beams))

    raise ConfigError(f"unknown codebook strategy {strategy!r}")
