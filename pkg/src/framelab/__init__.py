"""Finite frames, phase retrieval stability constants and perturbation checks."""

from .constructions import (
    KINDS,
    ConstructionSpec,
    basis_frame,
    basis_plus_diluted_parseval,
    construct,
    diluted_tight_frame,
    parsevalize,
    random_gaussian_frame,
)
from .frame import (
    COMPLEX,
    REAL,
    Frame,
    FrameBounds,
    FrameFormatError,
    VectorPair,
    analyze,
    frame_bounds_l2,
    frame_operator,
    load_frame,
    magnitude_gap,
    min_phase_distance,
    p_frame_bounds,
    parse_frame,
    save_frame,
    serialize_frame,
)
from .harness import SUITES, SuiteResult, VerifyConfig, run_suite
from .perturbation import (
    MODES,
    PerturbationPlan,
    balan_rho_original,
    balan_rho_sum,
    christensen_bounds,
    perturb_frame,
    perturbation_sweep,
    perturbed_pr_bound,
    predict,
    stability_threshold,
)
from .report import TheoremCheck
from .stability import (
    A0Report,
    SearchConfig,
    StabilityReport,
    a0_denominator,
    a0_ratio,
    estimate_a0,
    estimate_stability_constant,
    grid_a0_2d,
    grid_certified_stability_2d,
    l4_stability_from_a0,
    stability_ratio,
)

__version__ = "0.1.0"
