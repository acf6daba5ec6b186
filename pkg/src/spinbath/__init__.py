"""spinbath: repeated initialization-evolution-readout correlation protocols
for a qubit coupled to a nuclear spin bath.

Two models of the readout autocorrelation (an exact switched-uniaxial
coupling model and a semiclassical window-matrix model for pulsed
sequences), brute-force verification oracles, and a deterministic parallel
sweep engine with a CLI.
"""
from .bath import (
    BathComponent,
    CouplingCluster,
    DotGeometry,
    GAAS_SPECIES,
    NuclearSpecies,
    PhysicalConstants,
    bath_components,
    build_clusters,
    default_constants,
    gaas_geometry,
    larmor_frequencies,
    mean_coupling,
    wavefunction_weight,
)
from .kernels import backend as kernel_backend
from .oracles import (
    GaussianCheck,
    OracleMC,
    OracleResult,
    SmallBath,
    classical_vector_mc,
    gaussian_identity_check,
    protocol_oracle,
)
from .protocols import (
    ExperimentSequence,
    PulseProtocol,
    flip_integral,
    make_sequence,
    switching_value,
)
from .results import CorrelationResult
from .semiclassical import (
    DeltaFieldSample,
    SemiclassicalConfig,
    TMatrix,
    build_tmatrix,
    correlation_semiclassical,
    correlation_value,
    draw_delta_sample,
)
from .uniaxial import (
    CONTOUR_LEVEL,
    ScalingPoint,
    UniaxialConfig,
    cluster_factor,
    correlation_uniaxial,
    correlation_uniaxial_grid,
    element_up_doubleprime,
    element_up_prime,
    fit_scaling_exponent,
    scaling_contour,
)

__version__ = "0.1.0"
