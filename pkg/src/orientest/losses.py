"""Training objectives with analytic gradients w.r.t. the prediction.

Three heads are supported:

* ``huber_loss``     -- per-component smooth-L1 on the unit-circle point,
* ``angular_loss``   -- 1 - cos(angular difference), scale invariant in
                        the prediction, with its closed-form gradient,
* ``multitask_softmax_loss`` -- sum of independent N-way cross entropies
                        over the M discretization tasks.

Each returns ``(value, gradient)`` where the gradient has the arity of
the prediction.
"""

import math

import numpy as np

from .circmath import EPS_NORM
from .errors import DegenerateVectorError, InvalidInputError, InvalidLabelError


def huber_loss(pred, target, delta=1.0):
    """Componentwise Huber (smooth L1) loss between two 2D points.

    h(r) = r^2/2 for |r| <= delta, else delta*(|r| - delta/2), summed over
    the two components. The gradient is continuous at |r| = delta.
    """
    if delta <= 0:
        raise InvalidInputError(f"delta must be positive, got {delta}")
    p = np.asarray(pred, dtype=float)
    t = np.asarray(target, dtype=float)
    r = p - t
    absr = np.abs(r)
    quad = absr <= delta
    value = float(np.sum(np.where(quad, 0.5 * r * r, delta * (absr - 0.5 * delta))))
    grad = np.where(quad, r, delta * np.sign(r))
    return value, grad


def angular_loss(pred, target):
    """Angular-difference loss 1 - (v_g . v) / |v|, with |v_g| = 1.

    The value equals 1 - cos of the angle between prediction and target,
    so it depends only on the prediction's direction and lies in [0, 2].
    The gradient for the x component is

        ((x_g*x + y_g*y) * x/|v| - x_g*|v|) / |v|^2

    and symmetrically for y. Its norm vanishes as the angular difference
    approaches 180 degrees, which is the known flat region of this loss.

    Raises
    ------
    DegenerateVectorError
        If the prediction's squared norm is at or below ``EPS_NORM``;
        training code catches this and skips the sample.
    """
    p = np.asarray(pred, dtype=float)
    t = np.asarray(target, dtype=float)
    x, y = float(p[0]), float(p[1])
    xg, yg = float(t[0]), float(t[1])
    norm_sq = x * x + y * y
    if norm_sq <= EPS_NORM:
        raise DegenerateVectorError(
            f"prediction {(x, y)} is too close to the origin for the angular loss"
        )
    norm = math.sqrt(norm_sq)
    dot = xg * x + yg * y
    value = 1.0 - dot / norm
    gx = (dot * x / norm - xg * norm) / norm_sq
    gy = (dot * y / norm - yg * norm) / norm_sq
    return value, np.array([gx, gy])


def _softmax_rows(logits):
    z = np.asarray(logits, dtype=float)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_votes(logits):
    """Per-task softmax probabilities with max-subtraction for stability.

    ``logits`` has shape (M, N); each returned row is nonnegative and sums
    to 1.
    """
    z = np.asarray(logits, dtype=float)
    if z.ndim != 2:
        raise InvalidInputError(f"expected (n_tasks, n_classes) logits, got shape {z.shape}")
    return _softmax_rows(z)


def multitask_softmax_loss(logits, labels):
    """Sum of per-task softmax cross entropies and its logit gradient.

    ``logits`` has shape (M, N) and ``labels`` is a length-M sequence of
    class indices. The gradient w.r.t. task m's logits is
    softmax(logits[m]) minus the one-hot label.
    """
    z = np.asarray(logits, dtype=float)
    if z.ndim != 2:
        raise InvalidInputError(f"expected (n_tasks, n_classes) logits, got shape {z.shape}")
    m, n = z.shape
    lab = np.asarray(labels, dtype=int)
    if lab.shape != (m,):
        raise InvalidLabelError(f"expected {m} labels, got shape {lab.shape}")
    if np.any(lab < 0) or np.any(lab >= n):
        raise InvalidLabelError(f"labels {labels!r} out of range [0, {n})")

    shifted = z - z.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    value = float(np.sum(log_norm - shifted[np.arange(m), lab]))

    grad = _softmax_rows(z)
    grad[np.arange(m), lab] -= 1.0
    return value, grad
