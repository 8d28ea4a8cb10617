"""Localized least-squares SVMs on Voronoi partitions.

The package trains an independent clipped kernel least-squares model on
each cell of a farthest-first Voronoi partition of the input space,
with per-cell hyperparameter selection, and benchmarks the result
against a single global model and a random-chunk average.
"""

from .data import (
    Dataset,
    Sample,
    ScalingTransform,
    apply_scaling,
    fit_scaling,
    invert_scaling,
    parse_libsvm,
    read_libsvm,
    serialize_libsvm,
    split_train_test,
    write_libsvm,
)
from .errors import (
    ConfigError,
    DataFormatError,
    DimensionMismatchError,
    LocsvmError,
    NumericalError,
)
from .estimators import (
    GridConfig,
    MethodSpec,
    RcSvmModel,
    TrainReport,
    VpSvmModel,
    load_model,
    predict_many,
    predict_rc,
    predict_rc_many,
    predict_vp,
    predict_vp_many,
    save_model,
    train_global,
    train_rc_svm,
    train_theory_mode,
    train_tv_vp_svm,
    train_vp_svm,
    train_with_spec,
)
from .evaluation import (
    BenchmarkResult,
    EvalReport,
    benchmark,
    dataset_source,
    empirical_risk,
    l2_error,
    report_row,
    restricted_risk,
    run_experiment,
    synthetic_source,
    write_report_csv,
)
from .partition import (
    Cover,
    VoronoiPartition,
    assign_voronoi,
    build_partition,
    cell_of,
    farthest_first_cover,
    write_cover_csv,
    write_partition_csv,
)
from .selection import (
    CellSelection,
    CVConfig,
    HyperGrid,
    TheorySchedule,
    TVConfig,
    geometric_grid,
    kfold_select,
    theory_params,
    tv_select,
    write_selection_trace,
)
from .solver import (
    CellModel,
    clip,
    gaussian_cross,
    gaussian_gram,
    kernel_eval,
    predict,
    predict_clipped,
    predict_clipped_many,
    train_cell,
    train_cell_local,
)
from .synthetic import (
    LabeledTruth,
    SyntheticSpec,
    TruthTable,
    estimate_bayes_risk,
    generate_synthetic,
    read_truth_csv,
    write_truth_csv,
)

__version__ = "0.1.0"
