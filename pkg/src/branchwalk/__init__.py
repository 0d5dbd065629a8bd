"""Branch systems, transfer operators, and path-space measures.

The package is organized around one construction: a finite-to-one map
``r`` with labeled inverse branches, a nonnegative weight ``V``, and a
branch transition density derived from them.  The density drives three
interlocking objects — the transfer operator, the random backward paths
it induces, and the measures on path space those paths carry — together
with verification batteries that check the defining identities on
concrete systems (subshifts of finite type, ``x -> N x`` on the circle,
quadratic Julia maps).
"""

from .disintegration import (
    ScenarioBundle,
    lhs_integral,
    rhs_integral,
    verify_bundle,
    verify_cross_oracle,
    verify_disintegration,
    verify_duality,
    verify_pushforward,
    verify_quasi_invariance,
)
from .errors import (
    BranchwalkError,
    BudgetExceeded,
    ConfigError,
    DepthMismatch,
    EigenvalueMismatch,
    EigenvalueNotOne,
    EmptyPath,
    GridIncompatible,
    InvalidPoint,
    NoConvergence,
    NormalizationDefect,
    NotNonnegative,
    NotPositive,
    NumericOverflow,
    QmfViolation,
    WordTooShort,
)
from .measures import (
    CylinderTable,
    EmpiricalCloud,
    GridDensity,
    TestFunctionSet,
    brolin_sample,
    cylinder_indicators,
    integrate,
    moment_functions,
    perron_fixed_measure,
    set_deterministic_sums,
    trig_modes,
    verify_fixed_point_property,
)
from .pathspace import (
    CylinderFunctional,
    PathPrefix,
    cocycle_weight,
    consistency_check,
    label_indicator,
    path_integral,
    sample_path,
    shift_drop,
    shift_extend,
)
from .report import CheckReport, make_row
from .rng import ALGORITHM, CounterRng
from .scenarios import (
    BUNDLED,
    ScenarioConfig,
    build_bundle,
    load_scenario,
    parse_config,
)
from .systems import (
    DEFAULT_NODE_BUDGET,
    Branch,
    BranchSystem,
    CircleMap,
    QuadraticJulia,
    Subshift,
    TreeLeaf,
    branch_labels,
)
from .weights import (
    CallbackWeight,
    ConstantWeight,
    FilterSquared,
    FixedPointResult,
    PerronData,
    SymbolTable,
    TransitionDensity,
    TrigPolynomial,
    Weight,
    default_sample_points,
    derive_delta,
    fixed_point_h,
    grid_transfer_operator,
    transfer_apply,
    transfer_power,
)

__version__ = "0.1.0"

__all__ = [
    "ALGORITHM",
    "BUNDLED",
    "Branch",
    "BranchSystem",
    "BranchwalkError",
    "BudgetExceeded",
    "CallbackWeight",
    "CheckReport",
    "CircleMap",
    "ConfigError",
    "ConstantWeight",
    "CounterRng",
    "CylinderFunctional",
    "CylinderTable",
    "DEFAULT_NODE_BUDGET",
    "DepthMismatch",
    "EigenvalueMismatch",
    "EigenvalueNotOne",
    "EmpiricalCloud",
    "EmptyPath",
    "FilterSquared",
    "FixedPointResult",
    "GridDensity",
    "GridIncompatible",
    "InvalidPoint",
    "NoConvergence",
    "NormalizationDefect",
    "NotNonnegative",
    "NotPositive",
    "NumericOverflow",
    "PathPrefix",
    "PerronData",
    "QmfViolation",
    "QuadraticJulia",
    "ScenarioBundle",
    "ScenarioConfig",
    "Subshift",
    "SymbolTable",
    "TestFunctionSet",
    "TransitionDensity",
    "TreeLeaf",
    "TrigPolynomial",
    "Weight",
    "WordTooShort",
    "branch_labels",
    "brolin_sample",
    "build_bundle",
    "cocycle_weight",
    "consistency_check",
    "cylinder_indicators",
    "default_sample_points",
    "derive_delta",
    "fixed_point_h",
    "grid_transfer_operator",
    "integrate",
    "label_indicator",
    "lhs_integral",
    "load_scenario",
    "make_row",
    "moment_functions",
    "parse_config",
    "path_integral",
    "perron_fixed_measure",
    "rhs_integral",
    "sample_path",
    "set_deterministic_sums",
    "shift_drop",
    "shift_extend",
    "transfer_apply",
    "transfer_power",
    "trig_modes",
    "verify_bundle",
    "verify_cross_oracle",
    "verify_disintegration",
    "verify_duality",
    "verify_fixed_point_property",
    "verify_pushforward",
    "verify_quasi_invariance",
]
