"""Wreath-product word metrics, tours of diluted lattice ranges, and the
Monte Carlo estimators for their limit constants."""

__version__ = "0.1.0"

from .lattice import (  # noqa: F401
    Point,
    PointSet,
    StepDistribution,
    Trajectory,
    VisitCounts,
    dilute,
    inner_boundary,
    local_time_power_sum,
    sample_walk,
    srw1d,
    srw2d,
    thin_points,
    visit_counts,
)
from .tsp import (  # noqa: F401
    GridPath,
    TspResult,
    box_tsp_diluted,
    connected_set_tour,
    exact_tsp,
    s_path_tsp_exact,
    strip_heuristic,
)
from .wreath import (  # noqa: F401
    GeneratingSet,
    LampConfig,
    SPath,
    WreathElement,
    WreathStepDistribution,
    Z2_LAMPS,
    is_complete,
    oned_word_length,
    standard_lamplighter_gens,
    standard_sws_z2,
    word_length_bfs,
    word_length_bounds,
)
from .uncross import (  # noqa: F401
    BoxDomain,
    PathCollection,
    essential_crossing,
    join_noncrossing,
    normalize_endpoints,
    uncross_all,
    uncross_pair,
)
from .experiments import ExperimentSpec, RunRecord, run_experiment  # noqa: F401
