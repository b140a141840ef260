"""greenladder: predict video encoding/decoding energy and quality from a
single cheap anchor encode, and pick the greenest configuration within a
bounded quality drop."""

from .analysis import (
    AnchorSweepRow,
    CorrelationMatrix,
    MissingCell,
    ZeroVariance,
    anchor_ranking,
    anchor_sweep,
    default_anchor_candidates,
    pairwise_correlation,
)
from .core import (
    AnchorMeasurement,
    ConfigSpace,
    Dataset,
    DuplicateKey,
    GreenLadderError,
    InvariantViolation,
    IoFailure,
    MalformedRow,
    MeasurementRecord,
    MissingAnchorRecord,
    MissingHeader,
    Representation,
    Resolution,
    TooFewVideos,
    anchor_of,
    default_space,
    load_dataset,
    save_dataset,
    split_by_video,
)
from .harness import (
    CommandFailed,
    ExternalCommandProvider,
    NegativeTime,
    ParseFailure,
    PowerModel,
    SyntheticProvider,
    SyntheticWorldParams,
    Timeout,
    energy_from_time,
    external_measure,
    fit_power_model,
    run_anchor,
    synth_generate,
)
from .metrics import (
    ConstantTruth,
    EmptyInput,
    NonPositiveBaseline,
    PolicyReport,
    RegressionReport,
    energy_savings_pct,
    mae,
    quality_drop,
    r_squared,
    rmse,
    sdae,
)
from .models import (
    DEFAULT_SPECS,
    FAMILIES,
    SEARCH_GRIDS,
    TARGETS,
    CvResult,
    FeatureVector,
    ModelSpec,
    TrainedPredictor,
    fit,
    grid_search_cv,
    load_model,
    mlp_gradient_check,
    predict,
    save_model,
    train_all,
)
from .selector import (
    GridCell,
    MissingGroundTruth,
    MissingModel,
    PredictionGrid,
    Rho,
    SelectionResult,
    build_grid,
    evaluate_policy,
    make_cell,
    select,
)

__version__ = "0.1.0"
