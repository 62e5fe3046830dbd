from dataclasses import dataclass, field
from typing import List, Sequence, Tuple, Union

import numpy as np

from app.learning.embedding_net import EmbeddingNet, Gradients
from app.utils.exceptions import InputShapeError, NumericError, ParameterError


@dataclass
class AdamState:
    """Moment accumulators of the Adam optimizer."""

    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step: int = 0
    first_moments: List[np.ndarray] = field(default_factory=list)
    second_moments: List[np.ndarray] = field(default_factory=list)

    def __post_init__(self) -> None:
        for name in ("learning_rate", "beta1", "beta2", "epsilon"):
            if getattr(self, name) <= 0:
                raise ParameterError(f"{name} must be positive")

    @classmethod
    def for_net(cls, net: EmbeddingNet, learning_rate: float = 0.001, **kwargs) -> "AdamState":
        params = net.parameters()
        return cls(
            learning_rate=learning_rate,
            first_moments=[np.zeros_like(p) for p in params],
            second_moments=[np.zeros_like(p) for p in params],
            **kwargs,
        )


def adam_step(
    net: EmbeddingNet,
    state: AdamState,
    grads: Union[Gradients, Sequence[np.ndarray]],
) -> Tuple[EmbeddingNet, AdamState]:
    """
    One bias-corrected Adam update.

    Args:
        net: Current network (left untouched)
        state: Current optimizer state (left untouched)
        grads: Gradients object or a [W0, b0, W1, b1, ...] list

    Returns:
        Updated network and optimizer state

    Raises:
        NumericError: If any gradient entry is NaN or infinite
        InputShapeError: If gradient shapes do not match the network
    """
    params = net.parameters()
    grad_list = grads.parameters() if isinstance(grads, Gradients) else list(grads)
    if len(grad_list) != len(params) or any(g.shape != p.shape for g, p in zip(grad_list, params)):
        raise InputShapeError("gradient shapes do not match the network parameters")
    if not all(np.all(np.isfinite(g)) for g in grad_list):
        raise NumericError("non-finite gradient passed to adam_step")

    first = state.first_moments or [np.zeros_like(p) for p in params]
    second = state.second_moments or [np.zeros_like(p) for p in params]
    step = state.step + 1
    correction1 = 1.0 - state.beta1**step
    correction2 = 1.0 - state.beta2**step

    new_params, new_first, new_second = [], [], []
    for p, g, m, v in zip(params, grad_list, first, second):
        m = state.beta1 * m + (1.0 - state.beta1) * g
        v = state.beta2 * v + (1.0 - state.beta2) * g * g
        m_hat = m / correction1
        v_hat = v / correction2
        new_params.append(p - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon))
        new_first.append(m)
        new_second.append(v)

    new_state = AdamState(
        learning_rate=state.learning_rate,
        beta1=state.beta1,
        beta2=state.beta2,
        epsilon=state.epsilon,
        step=step,
        first_moments=new_first,
        second_moments=new_second,
    )
    return net.with_parameters(new_params), new_state
