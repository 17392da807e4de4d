"""Evaluation measures: mean/median absolute angular error and the
fraction of samples within 22.5 and 45 degrees of the ground truth."""

from dataclasses import dataclass

import numpy as np

from .circmath import angular_distance, canonicalize
from .errors import InvalidInputError


@dataclass(frozen=True)
class EvalReport:
    mean_ae: float
    median_ae: float
    acc_22_5: float
    acc_45: float
    count: int

    def to_dict(self):
        return {
            "mean_ae": self.mean_ae,
            "median_ae": self.median_ae,
            "acc_22_5": self.acc_22_5,
            "acc_45": self.acc_45,
            "count": self.count,
        }

    def to_text(self):
        """Flat key-value block, one metric per line."""
        return (
            f"mean_ae: {self.mean_ae!r}\n"
            f"median_ae: {self.median_ae!r}\n"
            f"acc_22_5: {self.acc_22_5!r}\n"
            f"acc_45: {self.acc_45!r}\n"
            f"count: {self.count}\n"
        )


def angular_errors(predictions, truths):
    """Per-sample shortest-arc errors in degrees, wraparound respected."""
    preds = canonicalize(np.asarray(predictions, dtype=float))
    true = canonicalize(np.asarray(truths, dtype=float))
    if preds.shape != true.shape or preds.ndim != 1 or preds.size == 0:
        raise InvalidInputError(
            f"need equal nonempty 1D inputs, got {np.shape(predictions)} "
            f"and {np.shape(truths)}"
        )
    return angular_distance(preds, true)


def evaluate(predictions, truths):
    """Build an EvalReport from paired prediction/truth angles.

    The accuracy thresholds are boundary inclusive, and the even-count
    median is the midpoint of the two central order statistics.
    """
    errors = angular_errors(predictions, truths)
    return EvalReport(
        mean_ae=float(np.mean(errors)),
        median_ae=float(np.median(errors)),
        acc_22_5=float(np.mean(errors <= 22.5)),
        acc_45=float(np.mean(errors <= 45.0)),
        count=int(errors.size),
    )
