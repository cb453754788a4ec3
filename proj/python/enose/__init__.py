"""Electronic-nose odor classification: Python access to the C++ core."""

import json

from . import _core
from ._core import (
    Config,
    Dataset,
    EnoseError,
    Model,
    confusion_matrix,
    default_config,
    f1_score,
    feature_correlation,
    fit,
    lda,
    load_config,
    load_directory,
    load_manifest,
    mlp_parameter_count,
    parse_config,
    pca,
    stratified_split,
    synth,
)

__all__ = [
    "Config", "Dataset", "EnoseError", "Model", "confusion_matrix", "default_config",
    "evaluate", "evaluate_saved", "f1_score", "feature_correlation", "fit", "lda",
    "load_config", "load_directory", "load_manifest", "mlp_parameter_count",
    "parse_config", "pca", "run", "stratified_split", "synth",
]


def evaluate(y_true, proba, classes):
    """Confusion matrix, precision/recall/F1 and ROC summary as a dict."""
    return json.loads(_core.evaluate(list(y_true), proba, list(classes)))


def run(config, verbose=False):
    """Runs the full pipeline and returns the model summary."""
    return json.loads(_core.run(config, verbose))


def evaluate_saved(model_path, config, verbose=False):
    return json.loads(_core.evaluate_saved(str(model_path), config, verbose))
