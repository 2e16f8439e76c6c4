"""Exact density-matrix simulation of catalytic teleportation and of
catalytic expectation-value optimization."""
from .config import (
    BoundaryError,
    CatportError,
    DimensionLimitError,
    InfeasibleError,
    NumericError,
    PreconditionError,
    Settings,
    get_settings,
    use_settings,
)
from .qstate import (
    DensityMatrix,
    PureState,
    SchmidtSpectrum,
    partial_trace,
    schmidt,
    trace_distance,
    von_neumann_entropy,
)
from .entmetrics import (
    isotropic_twirl,
    majorizes,
    max_entangled,
    pure_ent_fraction,
    singlet_fraction,
    tele_fidelity,
)
from .teleporter import PauliFrame, avg_fidelity_mc, teleport
from .catengine import (
    BlockCatalystState,
    MultiCopyChannel,
    ProtocolReport,
    build_catalyst,
    run_subroutine,
)
from .advopt import advantage_map, advantage_point, lemma1_bound
from .smallcat import nielsen_locc, optimize_x, run_small_catalyst, small_catalyst_scenario
from .gencat import (
    Observable,
    WorkReport,
    catalytic_expectation,
    collective_ergotropy,
    entropy_matched_gibbs,
    ergotropy,
    work_report,
)

__version__ = "0.1.0"
