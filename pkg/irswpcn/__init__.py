"""
See CONTRIBUTING.md for a description of the project structure and the internal logic.
"""
import logging
import os

try:
    from ._version import version as __version__
    from ._version import version_tuple
except ImportError:
    __version__ = "unknown version"
    version_tuple = (0, 0, "unknown version")

settings = dict(
    # "barrier" or "frank-wolfe"
    log_sdp_method=os.getenv("IRSWPCN_LOG_SDP_METHOD", "barrier").lower(),
    sdp_gap_tol=1e-8,
    sdp_max_newton=400,
    lock_suffix=".lock",
    lock_timeout=10 * 60,
    # When off, the CSV wall_time_s column is 0 so output bytes are reproducible.
    record_wall_time=os.getenv("IRSWPCN_RECORD_WALL_TIME", "0").lower()
    in ("true", "yes", "1"),
)
_logger = logging.getLogger("irswpcn")

from irswpcn.baselines import (  # noqa: E402
    BaselineFailure,
    BaselineKind,
    BaselineTag,
    quantize_phases,
    run_baseline,
)
from irswpcn.bca import (  # noqa: E402
    BcaConfig,
    BcaReport,
    build_subproblem1,
    build_subproblem2,
    optimize,
)
from irswpcn.config import load_config  # noqa: E402
from irswpcn.experiments import (  # noqa: E402
    ExperimentConfig,
    ResultRow,
    run_monte_carlo,
)
from irswpcn.grouping import GroupingScheme, GroupingTag, group_users  # noqa: E402
from irswpcn.linalg import (  # noqa: E402
    DimensionError,
    DomainError,
    NumericError,
    hermitian,
    principal_eigenpair,
    rank_one_ratio,
)
from irswpcn.model import (  # noqa: E402
    ChannelRealization,
    ReflectVector,
    Solution,
    SystemParams,
    TimeAllocation,
    cascade,
    cluster_throughput,
    generate_channels,
    harvested_energy,
    reflect_gain,
    selector,
    total_throughput,
    weighted_gram,
)
from irswpcn.sdp import (  # noqa: E402
    LogTerm,
    SdpCut,
    SdpStatus,
    SdpStatusKind,
    SolverError,
    solve_linear_sdp,
    solve_log_sdp,
)
from irswpcn.srocr import (  # noqa: E402
    InitialInfeasible,
    SrocrConfig,
    SrocrReport,
    extract_unit_modulus,
    srocr_solve,
)
from irswpcn.time_alloc import (  # noqa: E402
    ClusterGains,
    allocate,
    compute_gains,
    solve_root,
)
