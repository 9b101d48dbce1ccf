"""Focal classification and objectness terms, with gradients w.r.t. logits."""

from typing import Tuple

import numpy as np

from ..common.config import FocalParams
from ..numcore import sigmoid

LOG_FLOOR = 1e-12


def _bce(p: np.ndarray, t: np.ndarray) -> np.ndarray:
    log_p = np.log(np.maximum(p, LOG_FLOOR))
    log_q = np.log(np.maximum(1.0 - p, LOG_FLOOR))
    return -(t * log_p + (1.0 - t) * log_q)


def _modulation(p: np.ndarray, t: np.ndarray, fp: FocalParams):
    """(alpha_t, (1 - p_t)^gamma) with p_t = p for targets above 0.5, else 1 - p."""
    positive = t > 0.5
    alpha_t = np.where(positive, fp.alpha, 1.0 - fp.alpha)
    one_minus_pt = np.where(positive, 1.0 - p, p)
    return positive, alpha_t, one_minus_pt**fp.gamma


def focal_from_probs(p, t, fp: FocalParams = FocalParams()) -> np.ndarray:
    """Elementwise alpha_t * (1 - p_t)^gamma * BCE(p, t); ``t`` may be continuous."""
    p = np.asarray(p, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    _, alpha_t, m = _modulation(p, t, fp)
    return alpha_t * m * _bce(p, t)


def focal_terms(logits, t, fp: FocalParams = FocalParams()) -> Tuple[np.ndarray, np.ndarray]:
    """Elementwise focal loss on sigmoid(logits) and its derivative w.r.t. the logits."""
    z = np.asarray(logits, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    p = sigmoid(z)
    positive, alpha_t, m = _modulation(p, t, fp)
    bce = _bce(p, t)
    # dm/dz written without negative powers so gamma < 1 stays finite.
    if fp.gamma == 0:
        dm_dz = np.zeros_like(p)
    else:
        dm_dz = np.where(
            positive,
            -fp.gamma * (1.0 - p) ** fp.gamma * p,
            fp.gamma * p**fp.gamma * (1.0 - p),
        )
    loss = alpha_t * m * bce
    grad = alpha_t * (dm_dz * bce + m * (p - t))
    return loss, grad


def bce_terms(logits, t) -> Tuple[np.ndarray, np.ndarray]:
    """Plain binary cross-entropy on sigmoid(logits) and its logit derivative."""
    z = np.asarray(logits, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    p = sigmoid(z)
    return _bce(p, t), p - t


def one_hot(classes, num_classes: int) -> np.ndarray:
    classes = np.asarray(classes, dtype=np.int64)
    return (classes[..., None] == np.arange(num_classes)).astype(np.float64)


def focal_loss(p, target_class, fp: FocalParams = FocalParams()) -> np.ndarray:
    """Mean over classes of the focal term, one row per positive anchor.

    ``p`` holds per-class sigmoid probabilities with classes on the last axis.
    """
    p = np.asarray(p, dtype=np.float64)
    t = one_hot(target_class, p.shape[-1])
    return focal_from_probs(p, t, fp).mean(axis=-1)


def obj_focal_loss(p, t, fp: FocalParams = FocalParams()) -> np.ndarray:
    """Objectness focal term; ``t`` is the (possibly continuous) alignment target."""
    return focal_from_probs(p, t, fp)
