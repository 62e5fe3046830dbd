from app.learning.embedding_net import (
    EmbeddingNet,
    Gradients,
    forward,
    backward,
    save_checkpoint,
    load_checkpoint,
)
from app.learning.optim import AdamState, adam_step
from app.learning.losses import LossOutput, loss1, loss2, loss3, get_loss
from app.learning.sampling import Triplet, LabelIndex, sample_triplet, sample_batch, balanced_pairs

__all__ = [
    "EmbeddingNet",
    "Gradients",
    "forward",
    "backward",
    "save_checkpoint",
    "load_checkpoint",
    "AdamState",
    "adam_step",
    "LossOutput",
    "loss1",
    "loss2",
    "loss3",
    "get_loss",
    "Triplet",
    "LabelIndex",
    "sample_triplet",
    "sample_batch",
    "balanced_pairs",
]
