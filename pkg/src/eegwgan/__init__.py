"""Conditional Wasserstein GAN with weight clipping for class-conditioned segment synthesis."""

from .data import Dataset, FileMinMaxScaler, load_dataset_dir, make_toy_dataset, minmax_scale_file
from .evaluation import SynthesisRequest, fidelity_report, generate_synthetic
from .model import ConditionalWGAN, CriticNet, GeneratorNet, TrainConfig, TrainingLog, train
from .persistence import load_model, save_model

__version__ = "0.1.0"

__all__ = [
    "ConditionalWGAN",
    "CriticNet",
    "Dataset",
    "FileMinMaxScaler",
    "GeneratorNet",
    "SynthesisRequest",
    "TrainConfig",
    "TrainingLog",
    "fidelity_report",
    "generate_synthetic",
    "load_dataset_dir",
    "load_model",
    "make_toy_dataset",
    "minmax_scale_file",
    "save_model",
    "train",
]
