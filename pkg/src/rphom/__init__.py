"""Real polyhedral homotopy: certify, build binomial start systems, track
real roots, and Krawczyk-certify the results."""

from .binomial import (
    BinomialSystem,
    SmithDecomposition,
    binomial_from_matrix,
    count_binomial_real,
    generate_binomials,
    smith_normal_form,
    solve_binomial_real,
)
from .certify_numeric import (
    CertificateOutcome,
    Interval,
    certify_solution_set,
    interval_eval,
    krawczyk_test,
)
from .errors import (
    DegenerateLiftingError,
    DegenerateSystemError,
    DimensionError,
    RPHError,
    SystemParseError,
)
from .mixed_cells import (
    CayleyConfiguration,
    DualConeGenerator,
    IntegerLifting,
    MixedCell,
    cayley,
    dual_cone_generators,
    enumerate_mixed_cells,
    integerize,
    mixed_volume,
)
from .patchwork import PatchworkCertificate, certify_patchwork
from .poly_core import (
    Lifting,
    SparsePolynomial,
    SparseSystem,
    evaluate,
    jacobian,
    log_lifting,
    make_system,
    parse_system,
    print_system,
)
from .tracking import (
    PathResult,
    RealPolyhedralHomotopy,
    TrackerOptions,
    build_homotopy,
    davidenko_velocity,
    newton_correct,
    rph_track,
    track_path,
)

__version__ = "0.1.0"
