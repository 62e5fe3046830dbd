"""
The three triplet-loss variants and their (sub)gradients.

Inputs are embeddings of shape (d,) for one triplet or (B, d) for a batch.
Batches are reduced by the mean, so gradients carry a 1/B factor. A hinge
[z]+ is active only for z > 0; at the kink its derivative is 0.
"""
from dataclasses import dataclass
from typing import Callable, Dict

import numpy as np

from app.schemas.base import TripletMargins
from app.utils.constants import LossType
from app.utils.exceptions import InputShapeError, NumericError


@dataclass
class LossOutput:
    """Loss value and gradients with respect to the three embeddings."""

    value: float
    grad_anchor: np.ndarray
    grad_positive: np.ndarray
    grad_negative: np.ndarray


def _prepare(fa, fp, fn):
    arrays = [np.asarray(v, dtype=np.float64) for v in (fa, fp, fn)]
    if not (arrays[0].shape == arrays[1].shape == arrays[2].shape) or arrays[0].ndim not in (1, 2):
        raise InputShapeError(f"triplet embeddings must share one shape, got {[a.shape for a in arrays]}")
    if not all(np.all(np.isfinite(a)) for a in arrays):
        raise NumericError("non-finite embedding passed to a triplet loss")
    single = arrays[0].ndim == 1
    if single:
        arrays = [a[None, :] for a in arrays]
    return arrays[0], arrays[1], arrays[2], single


def _finish(values, ga, gp, gn, single) -> LossOutput:
    batch = values.shape[0]
    if single:
        return LossOutput(float(values[0]), ga[0], gp[0], gn[0])
    return LossOutput(float(values.mean()), ga / batch, gp / batch, gn / batch)


def _relative_term(a, p, n, alpha):
    """[|a-p|^2 - |a-n|^2 + alpha]+ per row, with its gradients."""
    d_pos = np.sum((a - p) ** 2, axis=1)
    d_neg = np.sum((a - n) ** 2, axis=1)
    z = d_pos - d_neg + alpha
    active = (z > 0.0)[:, None]
    ga = active * 2.0 * (n - p)
    gp = active * 2.0 * (p - a)
    gn = active * 2.0 * (a - n)
    return np.maximum(z, 0.0), ga, gp, gn


def _positive_term(a, p, beta):
    """[|a-p|^2 - beta]+ per row, with gradients for a and p."""
    z = np.sum((a - p) ** 2, axis=1) - beta
    active = (z > 0.0)[:, None]
    return np.maximum(z, 0.0), active * 2.0 * (a - p), active * 2.0 * (p - a)


def _negative_term(a, n, alpha):
    """[alpha - |a-n|^2]+ per row, with gradients for a and n."""
    z = alpha - np.sum((a - n) ** 2, axis=1)
    active = (z > 0.0)[:, None]
    return np.maximum(z, 0.0), active * -2.0 * (a - n), active * 2.0 * (a - n)


def loss1(fa, fp, fn, margins: TripletMargins) -> LossOutput:
    """Plain triplet loss: [|fa-fp|^2 - |fa-fn|^2 + alpha]+."""
    a, p, n, single = _prepare(fa, fp, fn)
    values, ga, gp, gn = _relative_term(a, p, n, margins.alpha)
    return _finish(values, ga, gp, gn, single)


def loss2(fa, fp, fn, margins: TripletMargins) -> LossOutput:
    """loss1 plus [|fa-fp|^2 - beta]+."""
    a, p, n, single = _prepare(fa, fp, fn)
    values, ga, gp, gn = _relative_term(a, p, n, margins.alpha)
    extra, ga_pos, gp_pos = _positive_term(a, p, margins.beta)
    return _finish(values + extra, ga + ga_pos, gp + gp_pos, gn, single)


def loss3(fa, fp, fn, margins: TripletMargins) -> LossOutput:
    """Absolute bounds: [alpha - |fa-fn|^2]+ + [|fa-fp|^2 - beta]+."""
    a, p, n, single = _prepare(fa, fp, fn)
    neg_values, ga_neg, gn = _negative_term(a, n, margins.alpha)
    pos_values, ga_pos, gp = _positive_term(a, p, margins.beta)
    return _finish(neg_values + pos_values, ga_neg + ga_pos, gp, gn, single)


LOSSES: Dict[LossType, Callable[..., LossOutput]] = {
    LossType.TRIPLET1: loss1,
    LossType.TRIPLET2: loss2,
    LossType.TRIPLET3: loss3,
}


def get_loss(loss: LossType) -> Callable[..., LossOutput]:
    """Look up a loss by its enumeration token."""
    return LOSSES[LossType(loss)]
