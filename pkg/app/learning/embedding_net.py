"""
Feedforward embedding network f_theta with explicit forward/backward passes.

Weights are stored as (out, in) matrices; a batch of inputs is a (B, D)
array and produces a (B, d) array. One-dimensional inputs are accepted
everywhere and produce one-dimensional outputs.
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from app.utils.exceptions import FormatError, InputShapeError, ParameterError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


@dataclass
class EmbeddingNet:
    """Weights and biases of a rectifier network with an identity output layer."""

    layer_dims: List[int]
    weights: List[np.ndarray]
    biases: List[np.ndarray]
    normalize: bool = False
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        self.layer_dims = [int(d) for d in self.layer_dims]
        if len(self.layer_dims) < 2 or any(d <= 0 for d in self.layer_dims):
            raise ParameterError(f"layer_dims must hold at least two positive sizes, got {self.layer_dims}")
        if len(self.weights) != len(self.layer_dims) - 1 or len(self.biases) != len(self.weights):
            raise InputShapeError("one weight matrix and one bias vector per layer required")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            expected = (self.layer_dims[i + 1], self.layer_dims[i])
            if w.shape != expected or b.shape != (expected[0],):
                raise InputShapeError(
                    f"layer {i}: weight {w.shape} / bias {b.shape} inconsistent with layer_dims {self.layer_dims}"
                )

    @classmethod
    def initialize(
        cls,
        layer_dims: Sequence[int],
        rng: np.random.Generator,
        normalize: bool = False,
        seed: Optional[int] = None,
    ) -> "EmbeddingNet":
        """
        Glorot-uniform weights, zero biases.

        Args:
            layer_dims: Input size, hidden sizes, output size
            rng: Random source for the weights
            normalize: L2-normalize outputs
            seed: Seed recorded in checkpoints

        Returns:
            A freshly initialized network
        """
        dims = [int(d) for d in layer_dims]
        weights, biases = [], []
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
            biases.append(np.zeros(fan_out))
        return cls(dims, weights, biases, normalize=normalize, seed=seed)

    @property
    def input_dim(self) -> int:
        return self.layer_dims[0]

    @property
    def output_dim(self) -> int:
        return self.layer_dims[-1]

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    def parameters(self) -> List[np.ndarray]:
        """Parameters in the order [W0, b0, W1, b1, ...]."""
        params = []
        for w, b in zip(self.weights, self.biases):
            params.extend([w, b])
        return params

    def with_parameters(self, params: Sequence[np.ndarray]) -> "EmbeddingNet":
        """Return a network with the same architecture and new [W0, b0, ...] parameters."""
        return EmbeddingNet(
            list(self.layer_dims),
            [np.array(p, dtype=np.float64) for p in params[0::2]],
            [np.array(p, dtype=np.float64) for p in params[1::2]],
            normalize=self.normalize,
            seed=self.seed,
        )


@dataclass
class Gradients:
    """Parameter gradients and the gradient with respect to the input."""

    weights: List[np.ndarray]
    biases: List[np.ndarray]
    inputs: np.ndarray

    def parameters(self) -> List[np.ndarray]:
        grads = []
        for w, b in zip(self.weights, self.biases):
            grads.extend([w, b])
        return grads


@dataclass
class ForwardCache:
    """Pre-activations and activations kept for the backward pass."""

    activations: List[np.ndarray] = field(default_factory=list)
    pre_activations: List[np.ndarray] = field(default_factory=list)
    raw_output: Optional[np.ndarray] = None


def _as_batch(net: EmbeddingNet, x: np.ndarray) -> Tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    batch = x[None, :] if single else x
    if batch.ndim != 2 or batch.shape[1] != net.input_dim:
        raise InputShapeError(
            f"expected input of length {net.input_dim}, got shape {x.shape}",
            {"expected": net.input_dim, "shape": list(x.shape)},
        )
    return batch, single


def forward_with_cache(net: EmbeddingNet, x: np.ndarray) -> Tuple[np.ndarray, ForwardCache]:
    """
    Run the network and keep what the backward pass needs.

    Args:
        net: Network
        x: Input of shape (D,) or (B, D)

    Returns:
        Output of shape (d,) or (B, d) and the cache
    """
    batch, single = _as_batch(net, x)
    cache = ForwardCache(activations=[batch])
    h = batch
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = h @ w.T + b
        cache.pre_activations.append(z)
        h = np.maximum(z, 0.0) if i < net.n_layers - 1 else z
        cache.activations.append(h)

    cache.raw_output = h
    if net.normalize:
        norms = np.linalg.norm(h, axis=1, keepdims=True)
        h = h / np.maximum(norms, 1e-12)

    return (h[0] if single else h), cache


def forward(net: EmbeddingNet, x: np.ndarray) -> np.ndarray:
    """Return f_theta(x); a pure function of (net, x)."""
    out, _ = forward_with_cache(net, x)
    return out


def backward_from_cache(net: EmbeddingNet, cache: ForwardCache, grad_out: np.ndarray) -> Gradients:
    """Backpropagate grad_out = dL/df(x) through a cached forward pass."""
    grad = np.asarray(grad_out, dtype=np.float64)
    single = grad.ndim == 1
    if single:
        grad = grad[None, :]
    batch_size = cache.activations[0].shape[0]
    if grad.shape != (batch_size, net.output_dim):
        raise InputShapeError(
            f"expected upstream gradient of shape {(batch_size, net.output_dim)}, got {grad.shape}",
        )

    if net.normalize:
        raw = cache.raw_output
        norms = np.maximum(np.linalg.norm(raw, axis=1, keepdims=True), 1e-12)
        unit = raw / norms
        grad = (grad - unit * np.sum(unit * grad, axis=1, keepdims=True)) / norms

    weight_grads: List[np.ndarray] = [np.empty(0)] * net.n_layers
    bias_grads: List[np.ndarray] = [np.empty(0)] * net.n_layers
    for i in reversed(range(net.n_layers)):
        if i < net.n_layers - 1:
            grad = grad * (cache.pre_activations[i] > 0.0)
        weight_grads[i] = grad.T @ cache.activations[i]
        bias_grads[i] = grad.sum(axis=0)
        grad = grad @ net.weights[i]

    return Gradients(weight_grads, bias_grads, grad[0] if single else grad)


def backward(net: EmbeddingNet, x: np.ndarray, grad_out: np.ndarray) -> Gradients:
    """
    Gradients of L with respect to every parameter and to x.

    Args:
        net: Network
        x: Input of shape (D,) or (B, D)
        grad_out: dL/df(x), same leading shape as the output

    Returns:
        Gradients (summed over the batch for parameters)
    """
    _, cache = forward_with_cache(net, x)
    return backward_from_cache(net, cache, grad_out)


def save_checkpoint(net: EmbeddingNet, path: PathLike) -> Path:
    """
    Write the network to an .npz archive.

    The archive holds layer_dims, the normalize flag, the seed and one
    row-major weight/bias array per layer.
    """
    path = Path(path)
    arrays = {
        "layer_dims": np.asarray(net.layer_dims, dtype=np.int64),
        "normalize": np.asarray(net.normalize),
        "seed": np.asarray(-1 if net.seed is None else net.seed, dtype=np.int64),
    }
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        arrays[f"weight_{i}"] = np.ascontiguousarray(w)
        arrays[f"bias_{i}"] = b
    with path.open("wb") as handle:
        np.savez(handle, **arrays)
    logger.info(f"Saved checkpoint {path} (layer_dims={net.layer_dims})")
    return path


def load_checkpoint(path: PathLike) -> EmbeddingNet:
    """Read a network written by save_checkpoint."""
    try:
        with np.load(Path(path), allow_pickle=False) as archive:
            layer_dims = [int(d) for d in archive["layer_dims"]]
            n_layers = len(layer_dims) - 1
            weights = [archive[f"weight_{i}"].astype(np.float64) for i in range(n_layers)]
            biases = [archive[f"bias_{i}"].astype(np.float64) for i in range(n_layers)]
            normalize = bool(archive["normalize"])
            seed = int(archive["seed"])
    except (KeyError, ValueError, OSError) as e:
        raise FormatError(f"Invalid checkpoint {path}: {str(e)}") from e
    return EmbeddingNet(layer_dims, weights, biases, normalize=normalize, seed=None if seed < 0 else seed)
