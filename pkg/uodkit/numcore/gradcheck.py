"""Finite-difference gradient checking."""

from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Optional, Tuple

import numpy as np

from ..common.exceptions import NonFiniteError, PrecisionError
from .tensor import CHECK_DTYPE, ParamDict, Tensor, ensure_finite


@dataclass(frozen=True)
class DifferentiableOp:
    """A forward function paired with its analytic vector-Jacobian product.

    ``backward(x, dy)`` returns the gradient of ``sum(forward(x) * dy)`` w.r.t. ``x``.
    """

    name: str
    forward: Callable[[Tensor], Tensor]
    backward: Callable[[Tensor, Tensor], Tensor]


def max_relative_error(analytic: Tensor, numeric: Tensor) -> float:
    """max |a - n| / max(|a|, |n|, 1e-8) over all elements."""
    analytic = np.asarray(analytic, dtype=CHECK_DTYPE)
    numeric = np.asarray(numeric, dtype=CHECK_DTYPE)
    if analytic.shape != numeric.shape:
        raise ValueError(f"gradient shapes differ: {analytic.shape} vs {numeric.shape}")
    if analytic.size == 0:
        return 0.0
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-8)
    return float(np.max(np.abs(analytic - numeric) / denom))


def numeric_gradient(
    f: Callable[[], Tensor],
    x: Tensor,
    cotangent: Optional[Tensor] = None,
    eps: float = 1e-6,
    indices: Optional[Iterable[tuple]] = None,
) -> Tensor:
    """Central differences of ``sum(f() * cotangent)`` w.r.t. ``x``.

    ``x`` is perturbed in place, one element at a time, and restored, so ``f``
    may close over it (or over a parameter array that aliases it). The output
    difference is formed elementwise before the reduction so unaffected outputs
    cancel exactly. With ``indices`` only those entries are computed; the rest
    stay zero.
    """
    if x.dtype != CHECK_DTYPE:
        raise PrecisionError(f"gradient checks need {CHECK_DTYPE.__name__}, got {x.dtype}")
    grad = np.zeros_like(x)
    for idx in np.ndindex(x.shape) if indices is None else indices:
        old = x[idx]
        x[idx] = old + eps
        y_plus = np.asarray(f(), dtype=CHECK_DTYPE)
        x[idx] = old - eps
        y_minus = np.asarray(f(), dtype=CHECK_DTYPE)
        x[idx] = old
        diff = y_plus - y_minus
        if not np.all(np.isfinite(diff)):
            raise NonFiniteError(idx, "finite-difference output")
        if cotangent is not None:
            diff = diff * cotangent
        grad[idx] = diff.sum() / (2.0 * eps)
    return grad


def grad_check(
    op: DifferentiableOp,
    x: Tensor,
    eps: float = 1e-5,
    cotangent: Optional[Tensor] = None,
) -> float:
    """Max relative error between ``op.backward`` and central differences.

    The scalar being differentiated is ``sum(op.forward(x) * cotangent)``, with
    a cotangent of ones (the plain sum of outputs) unless one is given. ``x`` is
    promoted to float64 first.
    """
    x = np.array(x, dtype=CHECK_DTYPE, copy=True)
    y = op.forward(x)
    if not np.all(np.isfinite(y)):
        bad = np.argwhere(~np.isfinite(y))[0]
        raise NonFiniteError(tuple(int(i) for i in bad), f"{op.name} output")
    if cotangent is None:
        cotangent = np.ones_like(y, dtype=CHECK_DTYPE)
    analytic = op.backward(x, cotangent)
    numeric = numeric_gradient(lambda: op.forward(x), x, cotangent, eps)
    return max_relative_error(analytic, numeric)


def block_grad_errors(
    forward: Callable[[Tensor], Tensor],
    backward: Callable[[Tensor, Tensor], Tuple[Tensor, ParamDict]],
    x: Tensor,
    params: ParamDict,
    cotangent: Optional[Tensor] = None,
    eps: float = 1e-5,
) -> Dict[str, float]:
    """Per-tensor max relative error for a block with parameters.

    ``backward(x, dy)`` returns ``(dx, grads)`` with ``grads`` keyed like
    ``params``. Everything must already be float64; parameters are perturbed
    in place through the ``params`` arrays. The result maps ``"x"`` and every
    parameter name to its error.
    """
    y = ensure_finite(forward(x), "block output")
    if cotangent is None:
        cotangent = np.ones_like(y, dtype=CHECK_DTYPE)
    dx, grads = backward(x, cotangent)
    errors = {"x": max_relative_error(dx, numeric_gradient(lambda: forward(x), x, cotangent, eps))}
    for name, value in params.items():
        numeric = numeric_gradient(lambda: forward(x), value, cotangent, eps)
        errors[name] = max_relative_error(grads[name], numeric)
    return errors
