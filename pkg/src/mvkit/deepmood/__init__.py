"""Multi-view sequence classification with GRU encoders and late-fusion heads."""
from .gru import gru_backward, gru_forward, init_gru
from .heads import fc_head, fm_head, mvm_head, param_count
from .model import (MoodModel, SessionInstance, TrainConfig, init_model, loss_and_grads,
                    predict, scores, train)

__all__ = [
    "gru_backward", "gru_forward", "init_gru", "fc_head", "fm_head", "mvm_head",
    "param_count", "MoodModel", "SessionInstance", "TrainConfig", "init_model",
    "loss_and_grads", "predict", "scores", "train",
]
