"""Digital baseband stage: regularized zero-forcing and link metrics.

One code path covers both plain zero-forcing (epsilon = 0, exact channel
inversion) and its regularized variant: the unnormalized precoder is

    W~ = H^H (H H^H + epsilon I)^(-1)

followed by a total-power normalization alpha = sqrt(P_tx / ||W_RF W~||_F^2),
W_BB = alpha W~. With epsilon = 0 the product H W_BB is exactly alpha I, so
every user sees the same post-precoding gain and the common SINR is
|alpha|^2 / noise_power. The condition number of the effective channel is
the diagnostic that predicts when that inversion becomes power-hungry:
near-parallel user columns push sigma_min toward zero and alpha collapses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AirylinkError, SingularChannelError
from .channels import ChannelMatrix

__all__ = ["PrecodingResult", "MetricsRecord", "rzf_precoder", "link_metrics"]

# Relative sigma_min below which an epsilon = 0 inversion is refused.
_SINGULAR_RCOND = 1e-13


@dataclass(frozen=True)
class PrecodingResult:
    """Baseband precoder W_BB (K x K), the power-normalization scalar alpha
    (real-positive by construction), the diagnostic product H_eff @ W_BB,
    and the transmit power actually realized (||W_RF W_BB||_F^2)."""

    baseband: np.ndarray
    alpha: float
    product_check: np.ndarray
    achieved_power: float


@dataclass(frozen=True)
class MetricsRecord:
    """All per-operating-point link metrics.

    singular_values are sorted descending; condition_number is
    sigma_max/sigma_min, or +inf (with `singular` set) when sigma_min
    underflows to zero. coupling_db holds 10*log10 |h_kj|^2 of the raw
    effective channel entries.
    """

    condition_number: float
    singular_values: tuple
    alpha_power: float
    common_sinr_db: float
    sum_rate: float
    coupling_db: np.ndarray
    singular: bool = False


def rzf_precoder(
    h_eff: ChannelMatrix, w_rf: np.ndarray, tx_power: float, epsilon: float
) -> PrecodingResult:
    """Regularized zero-forcing with exact total-power normalization."""
    if h_eff.kind != "effective":
        raise AirylinkError("precoding expects an effective-kind channel matrix")
    if epsilon < 0:
        raise AirylinkError(f"epsilon must be nonnegative, got {epsilon}")
    if tx_power <= 0:
        raise AirylinkError(f"tx_power must be positive, got {tx_power}")
    h = h_eff.entries
    k = h.shape[0]
    w = np.asarray(w_rf, dtype=complex)
    if w.shape[1] != k:
        raise AirylinkError(f"analog matrix has {w.shape[1]} beams, channel expects {k}")

    sigma = np.linalg.svd(h, compute_uv=False)
    if epsilon == 0.0 and sigma[-1] <= _SINGULAR_RCOND * sigma[0]:
        raise SingularChannelError(
            "effective channel is numerically singular; zero-forcing would "
            "divide by a vanishing singular value (use epsilon > 0 or change geometry)",
            sigma_min=float(sigma[-1]),
        )
    gram = h @ h.conj().T + epsilon * np.eye(k)
    w_tilde = h.conj().T @ np.linalg.inv(gram)

    norm_sq = float(np.linalg.norm(w @ w_tilde, "fro") ** 2)
    if norm_sq == 0.0:
        raise SingularChannelError(
            "precoder is identically zero; cannot normalize transmit power",
            sigma_min=float(sigma[-1]),
        )
    alpha = math.sqrt(tx_power / norm_sq)
    w_bb = alpha * w_tilde
    achieved = float(np.linalg.norm(w @ w_bb, "fro") ** 2)
    return PrecodingResult(
        baseband=w_bb,
        alpha=alpha,
        product_check=h @ w_bb,
        achieved_power=achieved,
    )


def link_metrics(
    h_eff: ChannelMatrix, precoding: PrecodingResult, noise_power: float
) -> MetricsRecord:
    """Condition number, common SINR, sum rate, and coupling powers."""
    if noise_power <= 0:
        raise AirylinkError(f"noise_power must be positive, got {noise_power}")
    h = h_eff.entries
    k = h.shape[0]
    if precoding.baseband.shape != (k, k):
        raise AirylinkError("precoder and channel dimensions disagree")

    sigma = np.linalg.svd(h, compute_uv=False)
    singular = sigma[-1] == 0.0
    kappa = math.inf if singular else float(sigma[0] / sigma[-1])

    alpha_power = precoding.alpha**2
    sinr = alpha_power / noise_power
    sinr_db = 10.0 * math.log10(sinr) if sinr > 0 else -math.inf
    sum_rate = k * math.log2(1.0 + sinr)

    with np.errstate(divide="ignore"):
        coupling_db = 10.0 * np.log10(np.abs(h) ** 2)

    return MetricsRecord(
        condition_number=kappa,
        singular_values=tuple(float(s) for s in sigma),
        alpha_power=float(alpha_power),
        common_sinr_db=float(sinr_db),
        sum_rate=float(sum_rate),
        coupling_db=coupling_db,
        singular=singular,
    )
