"""airylink: wave-optics simulation of curved-beam multi-user links.

A 2D (transverse x, depth z) simulator for millimeter-wave downlinks where
a knife-edge obstacle shadows part of the service area. Cubic-phase analog
beams steer energy around the edge; a zero-forcing digital stage separates
the users; everything downstream (condition numbers, SINR, sum rates,
parameter search) is built on one FFT propagation core with an independent
quadrature oracle behind it.
"""

from .beams import AiryParams, BeamWeights, Codebook, airy_weights, build_codebook, traditional_focus
from .channels import (
    ChannelMatrix,
    beam_column,
    effective_channel_diffraction,
    effective_channel_greens,
    greens_channel,
    remark1_calibration,
)
from .config import load_scenario, parse_scenario_text, validate_scenario
from .errors import (
    AirylinkError,
    ConfigError,
    GridError,
    InfeasibleSearchError,
    ModelMismatchError,
    SingularChannelError,
)
from .experiments import (
    FieldCut,
    MixedOptimizationResult,
    SweepResult,
    run_baseline_scan,
    run_fieldmap,
    run_mixed_optimization,
    run_robustness_sweep,
    run_shadow_scan,
)
from .geometry import (
    ArrayGeometry,
    Carrier,
    GridSpec,
    KnifeEdgeObstacle,
    ScenarioConfig,
    UserPosition,
    classify_user,
    fraunhofer_distance,
    geometric_angle,
)
from .optimizer import (
    SearchGrids,
    SearchOutcome,
    TraceEntry,
    coarse_to_fine_search,
    complexity_estimate,
    default_search_grids,
    evaluate_candidate,
    geometric_baseline_params,
)
from .precoding import MetricsRecord, PrecodingResult, link_metrics, rzf_precoder
from .propagation import (
    ComplexField,
    IntensityMap,
    band_limit,
    embed_aperture,
    intensity_map,
    launch_aperture,
    propagate_angular_spectrum,
    propagate_blocked,
    propagate_direct_fresnel,
    sample_field,
)

__version__ = "0.1.0"
