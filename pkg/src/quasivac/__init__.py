"""quasivac: minimization of ladder-operator Hamiltonians over pure Gaussian states.

The package rewrites a polynomial Hamiltonian in Bogoliubov-transformed
operators, descends the expectation value over the Gaussian family, and
certifies that at the minimum only a constant, a particle-conserving
quadratic block and higher-order terms survive, so the quadratic block's
eigenvalues read off the quasiparticle spectrum.
"""

from .bogoliubov import (
    BogoliubovMap,
    Generator,
    ThoulessChart,
    chart_from_generator,
    chart_from_map,
    compose,
    from_generator,
    generator_polynomial,
    identity,
    inverse,
    number_conserving,
    random_generator,
    random_number_conserving,
    reflection,
    residual_norms,
)
from .errors import (
    ChartDomainError,
    DegeneracyError,
    DegreeCapError,
    DimensionCapError,
    HermiticityError,
    IndexRangeError,
    InvalidGeneratorError,
    InvalidMapError,
    ParityError,
    QuasivacError,
    SpecFormatError,
    StatisticsMismatchError,
    TailToleranceError,
)
from .fock import (
    FockBasis,
    FockVector,
    build_ladders,
    exp_generator,
    expectation,
    gaussian_vector,
    ground_energy,
    quantize,
    state_of_map,
    vacuum_vector,
)
from .ordering import (
    LinearOperator,
    Side,
    multiply_linear,
    product_vacuum_expectation,
    substitute_linear,
    vacuum_expectation,
)
from .variational import (
    CertificationReport,
    MinimizationResult,
    MinimizeOptions,
    Mode,
    RunStatus,
    certify,
    descent_direction,
    directional_derivative,
    minimize,
    residual_blocks,
)
from .wick import (
    Statistics,
    TermParity,
    TransformedBlocks,
    WickPolynomial,
    canonicalize_term,
    extract_blocks,
    reassemble,
)

__version__ = "0.1.0"

__all__ = [
    "BogoliubovMap",
    "CertificationReport",
    "ChartDomainError",
    "DegeneracyError",
    "DegreeCapError",
    "DimensionCapError",
    "FockBasis",
    "FockVector",
    "Generator",
    "HermiticityError",
    "IndexRangeError",
    "InvalidGeneratorError",
    "InvalidMapError",
    "LinearOperator",
    "MinimizationResult",
    "MinimizeOptions",
    "Mode",
    "ParityError",
    "QuasivacError",
    "RunStatus",
    "Side",
    "SpecFormatError",
    "Statistics",
    "StatisticsMismatchError",
    "TailToleranceError",
    "TermParity",
    "ThoulessChart",
    "TransformedBlocks",
    "WickPolynomial",
    "build_ladders",
    "canonicalize_term",
    "certify",
    "chart_from_generator",
    "chart_from_map",
    "compose",
    "descent_direction",
    "directional_derivative",
    "exp_generator",
    "expectation",
    "extract_blocks",
    "from_generator",
    "gaussian_vector",
    "generator_polynomial",
    "ground_energy",
    "identity",
    "inverse",
    "minimize",
    "multiply_linear",
    "number_conserving",
    "product_vacuum_expectation",
    "quantize",
    "random_generator",
    "random_number_conserving",
    "reassemble",
    "reflection",
    "residual_blocks",
    "residual_norms",
    "state_of_map",
    "substitute_linear",
    "vacuum_expectation",
    "vacuum_vector",
]
