"""Certified numerics for summing norms of Bloch functions on the unit disc.

Submodules:
- disc: disc points, automorphisms, sampling
- holo: expression trees with exact derivatives and JSON serialization
- bloch_norms: certified seminorm brackets and test families
- simplex: small dense LP solver
- summing: summing estimates, domination LP, factorization, extrapolation
- molecules: vector-valued molecules and tensor-norm sandwich bounds
- verify: scenario runner and the certified check suite
"""

__version__ = "0.1.0"

from .disc import DiscPoint, MobiusMap, sample_disc
from .errors import (
    BlochError,
    CertificationFailure,
    DimensionMismatch,
    Infeasible,
    OutOfDisc,
    OutOfValidity,
    ParseError,
    RankDeficiency,
    Unbounded,
)
from .holo import (
    Extremal,
    HoloExpr,
    Monomial,
    PrecomposeMobius,
    Scale,
    Sum,
    Taylor,
    Tensor,
    expr_from_dict,
    expr_to_dict,
    normalize_origin,
)
from .bloch_norms import (
    CertBracket,
    TestFamily,
    bloch_seminorm_bracket,
    default_family,
    extremal,
    family_mobius_closure,
    make_family,
)
from .summing import (
    FactorizationCertificate,
    PietschMeasure,
    SummingEstimate,
    WeightedSample,
    denominator,
    domination_check,
    factorize,
    lp_duality_check,
    maurey_extrapolate,
    pietsch_lp,
    summing_estimate,
)
from .molecules import (
    Molecule,
    cs_lower_dual,
    cs_upper,
    crossnorm_check,
    pairing,
    projective_upper,
)
from .verify import Report, run_scenario, verify_all
