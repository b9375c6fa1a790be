"""Deterministic LSTM pipeline for 3-class EEG trial classification.

Bundles a from-scratch recurrent network engine, Butterworth band-pass
data expansion (theta/alpha/beta), curriculum pretraining with fine-tuning,
participant-grouped cross-validation splits, weighted-F1 evaluation, and a
seeded synthetic-EEG generator for desk-scale experiments.
"""

__version__ = "0.1.0"

from .augment import AugmentedCorpus, build_corpus, generate_band_subset
from .checkpoint import Checkpoint, CheckpointError, load_checkpoint, save_checkpoint
from .data import (
    DatasetManifest,
    FoldPlan,
    SplitPlan,
    Trial,
    label_from_ambiguity,
    load_manifest,
    load_trial_csv,
    make_folds,
    normalize_per_channel,
    split_train_test,
    standardize_length,
)
from .dsp import BandSpec, FilterCascade, apply_zero_phase, design_bandpass, frequency_response
from .metrics import EvalReport, confusion, evaluate, weighted_f1
from .nn import (
    ModelConfig,
    ModelParams,
    OptimizerState,
    adam_step,
    forward,
    init_params,
    loss_and_grads,
    lstm_cell_step,
    param_count,
)
from .rng import make_rng
from .synth import SynthSpec, default_benchmark_spec, generate, generate_trials
from .training import (
    TrainConfig,
    TrainHistory,
    finetune,
    pretrain_curriculum,
    run_protocol_table,
    train,
)

__all__ = [
    "AugmentedCorpus", "build_corpus", "generate_band_subset",
    "Checkpoint", "CheckpointError", "load_checkpoint", "save_checkpoint",
    "DatasetManifest", "FoldPlan", "SplitPlan", "Trial",
    "label_from_ambiguity", "load_manifest", "load_trial_csv", "make_folds",
    "normalize_per_channel", "split_train_test", "standardize_length",
    "BandSpec", "FilterCascade", "apply_zero_phase", "design_bandpass",
    "frequency_response",
    "EvalReport", "confusion", "evaluate", "weighted_f1",
    "ModelConfig", "ModelParams", "OptimizerState", "adam_step", "forward",
    "init_params", "loss_and_grads", "lstm_cell_step", "param_count",
    "make_rng",
    "SynthSpec", "default_benchmark_spec", "generate", "generate_trials",
    "TrainConfig", "TrainHistory", "finetune", "pretrain_curriculum",
    "run_protocol_table", "train",
]
