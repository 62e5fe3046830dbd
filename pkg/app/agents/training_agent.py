import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from app.agents.base_agent import BaseAgent
from app.datasets.base import Dataset
from app.learning.embedding_net import EmbeddingNet, backward_from_cache, forward_with_cache, save_checkpoint
from app.learning.losses import get_loss
from app.learning.optim import AdamState, adam_step
from app.learning.sampling import LabelIndex, sample_batch, triplet_arrays
from app.schemas.base import ExperimentConfig, NoiseSpec
from app.utils.constants import LossType
from app.utils.seeding import derive_seed, make_rng

logger = logging.getLogger(__name__)


@dataclass
class TrainingResult:
    """Trained network plus the run's per-epoch mean losses."""

    net: EmbeddingNet
    epoch_losses: List[float] = field(default_factory=list)
    loss: LossType = LossType.TRIPLET1
    cell_seed: int = 0


def cell_seed(config: ExperimentConfig, spec: NoiseSpec, loss: LossType, seed: int) -> int:
    """Seed of one (noise spec, loss, repetition seed) cell under the global seed."""
    return derive_seed(config.seed, seed, spec.pos_noise, spec.neg_label, LossType(loss))


def train(
    config: ExperimentConfig,
    dataset: Dataset,
    spec: NoiseSpec,
    seed: int,
    loss: Optional[LossType] = None,
) -> TrainingResult:
    """
    Train an embedding network on noisy triplets.

    Every epoch runs n // batch_size batches (at least one). A batch embeds
    its anchors, positives and negatives in one stacked forward pass, and the
    summed gradients of the three roles are backpropagated together.

    Args:
        config: Experiment configuration (architecture, optimizer, margins)
        dataset: Training split
        spec: Noise injected while sampling
        seed: Repetition seed
        loss: Loss variant (the first configured loss by default)

    Returns:
        TrainingResult; identical for identical arguments
    """
    loss = LossType(loss if loss is not None else config.losses[0])
    base_seed = cell_seed(config, spec, loss, seed)
    init_rng = make_rng(base_seed, "init")
    sample_rng = make_rng(base_seed, "sample")

    net = EmbeddingNet.initialize(
        [dataset.dim] + list(config.embedding_dims),
        init_rng,
        normalize=config.normalize_embeddings,
        seed=base_seed,
    )
    state = AdamState.for_net(net, learning_rate=config.learning_rate)
    loss_fn = get_loss(loss)
    index = LabelIndex(dataset.labels)
    batches = max(1, dataset.n // config.batch_size)
    features = dataset.features

    logger.info(
        f"Training {loss.value} on {dataset.n} samples: {config.epochs} epochs x {batches} batches, "
        f"pos_noise={spec.pos_noise}, neg_noise={spec.neg_label}, seed={seed}"
    )
    start = time.perf_counter()
    epoch_losses: List[float] = []
    for epoch in range(config.epochs):
        batch_losses = []
        for _ in range(batches):
            triplets = sample_batch(index, config.batch_size, spec, sample_rng)
            anchors, positives, negatives = triplet_arrays(triplets)
            size = anchors.size
            stacked = features[np.concatenate([anchors, positives, negatives])]

            embedded, cache = forward_with_cache(net, stacked)
            out = loss_fn(embedded[:size], embedded[size : 2 * size], embedded[2 * size :], config.margins)
            grad_out = np.concatenate([out.grad_anchor, out.grad_positive, out.grad_negative])

            grads = backward_from_cache(net, cache, grad_out)
            net, state = adam_step(net, state, grads)
            batch_losses.append(out.value)

        epoch_losses.append(float(np.mean(batch_losses)))
        logger.debug(f"Epoch {epoch + 1}/{config.epochs}: mean loss {epoch_losses[-1]:.6f}")

    final = f"{epoch_losses[-1]:.6f}" if epoch_losses else "n/a"
    logger.info(f"Finished {loss.value} training in {time.perf_counter() - start:.2f}s, final epoch loss {final}")
    return TrainingResult(net=net, epoch_losses=epoch_losses, loss=loss, cell_seed=base_seed)


class TrainingAgent(BaseAgent):
    """
    Training Agent that fits one embedding network and optionally checkpoints it.
    """

    def execute(
        self,
        config: ExperimentConfig,
        dataset: Dataset,
        spec: NoiseSpec,
        seed: int,
        loss: Optional[LossType] = None,
        checkpoint_path: Optional[str] = None,
    ) -> Dict[str, Any]:
        """
        Execute the training agent's main functionality.

        Args:
            config: Experiment configuration
            dataset: Training split
            spec: Noise specification
            seed: Repetition seed
            loss: Loss variant
            checkpoint_path: Where to save the trained network, if anywhere

        Returns:
            Dictionary containing execution results
        """
        self.logger.info(f"Starting TrainingAgent for run {self.run_id}")
        try:
            result = train(config, dataset, spec, seed, loss)
            checkpoint = None
            if checkpoint_path:
                checkpoint = str(save_checkpoint(result.net, Path(checkpoint_path)))

            report = self.create_report(
                report_type="training",
                message="Training completed",
                details={"loss": result.loss.value, "epochs": len(result.epoch_losses), "checkpoint": checkpoint},
            )
            return {"success": True, "result": result, "checkpoint": checkpoint, "report": report}
        except Exception as e:
            return self.failure(e)
