from .checkpoint import Checkpoint, CheckpointError
from .model import CoGNN, GraphState, ModelSpec
from .train import (
    EarlyStopping, TrainConfig, TrainingDiverged, TrainReport, evaluate, run_epochs, train, training_loss,
)


def infer(checkpoint: Checkpoint, y, p_t: float, phi_fixed=None):
    """Pure forward pass from pilots; no channel knowledge is consumed."""
    return checkpoint.model().infer(y, p_t, phi_fixed)


__all__ = [
    "Checkpoint", "CheckpointError", "CoGNN", "EarlyStopping", "GraphState", "ModelSpec", "TrainConfig",
    "TrainReport", "TrainingDiverged", "evaluate", "infer", "run_epochs", "train", "training_loss",
]
