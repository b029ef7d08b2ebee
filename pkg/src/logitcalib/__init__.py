"""Post-hoc probabilistic prediction layers for trained classifiers.

Fit histogram densities on a frozen classifier's training-set logits,
then replace its softmax with a maximum-likelihood (ml) or
maximum-a-posteriori (map) layer at prediction time. No retraining is
involved. The package also ships temperature scaling as the standard
calibration baseline, reliability and score diagnostics, and a
synthetic generator with an exact Bayes oracle for end-to-end checks.
"""

from .errors import LogitCalibError, DataError, FitError
from .dataset import (
    SPLITS,
    ClassRegistry,
    LogitRecord,
    SplitDataset,
    load_dataset,
    save_dataset,
)
from .density import (
    ClassConditionalModel,
    GaussianDensity,
    HistogramDensity,
    eval_gaussian,
    eval_histogram,
    fit_class_conditional,
    fit_gaussian,
    fit_histogram,
    load_model,
    save_model,
)
from .inference import (
    LAYERS,
    Posterior,
    map_posterior,
    ml_posterior,
    predict,
    softmax,
    softmax_tempered,
)
from .calibration import (
    ReliabilityDiagram,
    TemperatureParam,
    fit_temperature,
    load_temperature,
    reliability,
    save_temperature,
)
from .metrics import (
    ConfusionMatrix,
    EvaluationReport,
    confusion,
    evaluation_report,
    f_score_avg,
    f_score_weighted,
    fpr_avg,
    fpr_micro,
    score_histogram,
    unseen_stats,
)
from .synth import (
    SplitCounts,
    SynthSpec,
    bayes_posterior,
    calibrated_logit_dataset,
    default_spec,
    generate,
)

__version__ = "0.1.0"

__all__ = [
    "LogitCalibError",
    "DataError",
    "FitError",
    "SPLITS",
    "ClassRegistry",
    "LogitRecord",
    "SplitDataset",
    "load_dataset",
    "save_dataset",
    "ClassConditionalModel",
    "GaussianDensity",
    "HistogramDensity",
    "eval_gaussian",
    "eval_histogram",
    "fit_class_conditional",
    "fit_gaussian",
    "fit_histogram",
    "load_model",
    "save_model",
    "LAYERS",
    "Posterior",
    "map_posterior",
    "ml_posterior",
    "predict",
    "softmax",
    "softmax_tempered",
    "ReliabilityDiagram",
    "TemperatureParam",
    "fit_temperature",
    "load_temperature",
    "reliability",
    "save_temperature",
    "ConfusionMatrix",
    "EvaluationReport",
    "confusion",
    "evaluation_report",
    "f_score_avg",
    "f_score_weighted",
    "fpr_avg",
    "fpr_micro",
    "score_histogram",
    "unseen_stats",
    "SplitCounts",
    "SynthSpec",
    "bayes_posterior",
    "calibrated_logit_dataset",
    "default_spec",
    "generate",
    "__version__",
]
