"""Cascade-routing classification toolkit.

A fast classifier labels everything; a calibrated error histogram
decides which labels look risky; a budgeted selector routes only those
samples to a slower, stronger classifier whose verdict is final.
"""

from .classifiers import (
    Assignment,
    BinarySvmModel,
    ExternalStrongClassifier,
    MulticlassModel,
    OpfModel,
    StrongClassifier,
    StrongSvmClassifier,
    classify,
    classify_opf,
    grid_search,
    load_model,
    pairwise_coupling,
    platt_calibrate,
    platt_probability,
    save_model,
    strong_train,
    train_binary_svm,
    train_multiclass,
    train_opf,
)
from .datasets import (
    Dataset,
    Sample,
    Split,
    SyntheticSpec,
    balance_training,
    generate_synthetic,
    load_dataset,
    load_split,
    save_dataset,
    save_split,
    stratified_split,
)
from .errors import (
    AdapterError,
    CalibrationError,
    CascadekitError,
    ConvergenceError,
    CouplingError,
    DataError,
    NumericalError,
    RoutingError,
    ValidationError,
)
from .experiment import (
    ExperimentConfig,
    ExperimentReport,
    case_analysis,
    derive_seed,
    run_experiment,
    sweep_bins,
)
from .features import (
    FeaturePipeline,
    FeatureVector,
    Standardizer,
    bic_descriptor,
    cooccurrence_features,
    extract_features,
    glcm_matrix,
    msps_optimize,
    raw_descriptor,
    shape_features,
)
from .hybrid import (
    ErrorHistogram,
    RoutingOutcome,
    RoutingResult,
    SelectionPlan,
    bin_index,
    estimate_error_histograms,
    random_selection,
    route,
    select_for_reclassification,
)
from .metrics import (
    cohen_kappa,
    confusion_matrix,
    overall_accuracy,
    per_class_accuracy,
    time_per_sample,
)

__version__ = "0.1.0"
