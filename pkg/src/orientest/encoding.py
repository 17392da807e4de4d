"""Orientation encoders: unit-circle targets and staggered class grids.

The regression heads train against the point (cos, sin) on the unit
circle. The discretization head trains against M independent N-way
classification tasks whose class grids are mutually offset so that the
union covers M*N uniformly spaced orientations.
"""

from dataclasses import dataclass

import numpy as np

from .circmath import angular_distance, canonicalize, to_unit_vector
from .errors import InvalidConfigError

# Cap on the total number of discrete orientations (0.1 degree resolution).
MAX_TOTAL_ORIENTATIONS = 3600


@dataclass(frozen=True)
class DiscretizationScheme:
    """Staggered class grids: task m's class k sits at m*G/M + k*G degrees.

    ``gap`` is G = 360/n_classes. Task offsets equally divide one gap, so
    the union of all task grids is uniformly spaced 360/(n_classes*n_tasks)
    apart.
    """

    n_classes: int
    n_tasks: int

    @property
    def gap(self):
        return 360.0 / self.n_classes

    @property
    def total_orientations(self):
        return self.n_classes * self.n_tasks

    def orientation(self, task, label):
        """Discrete orientation of class ``label`` in task ``task``, canonical."""
        return canonicalize(task * self.gap / self.n_tasks + label * self.gap)

    def task_orientations(self, task):
        """All n_classes orientations of one task, in class-index order."""
        ks = np.arange(self.n_classes, dtype=float)
        return canonicalize(task * self.gap / self.n_tasks + ks * self.gap)

    def all_orientations(self):
        """Flat (n_tasks*n_classes,) array, task-major: task 0's classes first.

        This ordering is the wire order used when flattening per-task
        softmax probabilities into a vote set.
        """
        return np.concatenate(
            [self.task_orientations(m) for m in range(self.n_tasks)]
        )


def build_scheme(n_classes, n_tasks):
    """Validate bounds and construct a DiscretizationScheme.

    Raises
    ------
    InvalidConfigError
        If n_classes < 2, n_tasks < 1, or n_classes*n_tasks exceeds
        MAX_TOTAL_ORIENTATIONS.
    """
    if int(n_classes) != n_classes or int(n_tasks) != n_tasks:
        raise InvalidConfigError("n_classes and n_tasks must be integers")
    n_classes, n_tasks = int(n_classes), int(n_tasks)
    if n_classes < 2:
        raise InvalidConfigError(f"need at least 2 classes, got {n_classes}")
    if n_tasks < 1:
        raise InvalidConfigError(f"need at least 1 task, got {n_tasks}")
    if n_classes * n_tasks > MAX_TOTAL_ORIENTATIONS:
        raise InvalidConfigError(
            f"{n_classes}*{n_tasks} orientations exceed the cap of "
            f"{MAX_TOTAL_ORIENTATIONS}"
        )
    return DiscretizationScheme(n_classes=n_classes, n_tasks=n_tasks)


def assign_labels(theta, scheme):
    """Nearest-orientation class label for each task.

    Returns a list of ``scheme.n_tasks`` ints. A tie between two equally
    near orientations goes to the smaller class index, making every cell
    half-open on its upper side; labels are therefore deterministic.
    """
    theta = canonicalize(theta)
    labels = []
    for m in range(scheme.n_tasks):
        dists = angular_distance(theta, scheme.task_orientations(m))
        # argmin keeps the first (smallest) index among exact ties
        labels.append(int(np.argmin(dists)))
    return labels


def encode_regression_target(theta):
    """Unit-circle training target (cos, sin) for a canonical angle."""
    return to_unit_vector(canonicalize(theta))
