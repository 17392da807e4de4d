"""Decoders from network outputs back to continuous angles.

The regression heads decode with atan2. The discretization head spreads
its per-task softmax probabilities as weighted votes over the scheme's
discrete orientations, defines a von Mises kernel density over the
circle, and returns the highest mode found by circular mean-shift.
"""

from dataclasses import dataclass

import numpy as np

from .circmath import (
    angular_distance,
    bessel_i0,
    canonicalize,
    from_vector,
    von_mises_kernel,
)
from .errors import ConvergenceError, EmptyVotesError, InvalidConfigError, InvalidInputError

# Kernel concentration used when none is configured. Chosen so the kernel
# rolls off over a few vote spacings of the default 8x9 scheme; swept in
# the test suite rather than trusted.
DEFAULT_NU = 4.0


@dataclass(frozen=True)
class MeanShiftConfig:
    """Mean-shift settings: kernel concentration, stop tolerance (degrees),
    and the per-start iteration cap."""

    nu: float = DEFAULT_NU
    tolerance: float = 1e-6
    max_iterations: int = 1000

    def __post_init__(self):
        if self.nu < 0:
            raise InvalidConfigError(f"nu must be >= 0, got {self.nu}")
        if self.tolerance <= 0:
            raise InvalidConfigError(f"tolerance must be positive, got {self.tolerance}")
        if self.max_iterations < 1:
            raise InvalidConfigError(
                f"max_iterations must be >= 1, got {self.max_iterations}"
            )


@dataclass
class VoteSet:
    """Discrete orientations (degrees) with their probability weights."""

    orientations: np.ndarray
    probabilities: np.ndarray

    def __post_init__(self):
        self.orientations = np.asarray(self.orientations, dtype=float)
        self.probabilities = np.asarray(self.probabilities, dtype=float)
        if self.orientations.shape != self.probabilities.shape:
            raise InvalidInputError(
                f"orientations {self.orientations.shape} and probabilities "
                f"{self.probabilities.shape} must have equal shape"
            )
        if self.orientations.ndim != 1 or self.orientations.size == 0:
            raise InvalidInputError("a vote set needs a nonempty 1D list of votes")
        if not np.all(np.isfinite(self.orientations)) or not np.all(
            np.isfinite(self.probabilities)
        ):
            raise InvalidInputError("votes must be finite")
        if np.any(self.probabilities < 0):
            raise InvalidInputError("vote probabilities must be nonnegative")
        self.orientations = canonicalize(self.orientations)


def decode_atan2(pred):
    """Canonical angle of a predicted 2D point; errors near the origin."""
    return from_vector(pred)


def votes_from_softmax(probabilities, scheme):
    """Flatten per-task softmax probabilities onto the scheme's orientations.

    ``probabilities`` has shape (n_tasks, n_classes); rows are laid out
    task-major to match ``scheme.all_orientations()``. Total mass equals
    the number of tasks, one unit per task.
    """
    p = np.asarray(probabilities, dtype=float)
    if p.shape != (scheme.n_tasks, scheme.n_classes):
        raise InvalidConfigError(
            f"probabilities shape {p.shape} does not match scheme "
            f"({scheme.n_tasks}, {scheme.n_classes})"
        )
    return VoteSet(orientations=scheme.all_orientations(), probabilities=p.ravel())


def density_at(theta, votes, nu):
    """Unnormalized vote density sum_i p_i * k_nu(theta - theta_i).

    ``theta`` may be a scalar or an array of query angles in degrees. The
    density is 360-periodic; its global argmax is the decoded orientation.
    """
    t = np.asarray(theta, dtype=float)
    diffs = t[..., None] - votes.orientations
    out = von_mises_kernel(diffs, nu) @ votes.probabilities
    if np.ndim(out) == 0:
        return float(out)
    return out


def decode_meanshift(votes, config=None):
    """Highest-density orientation of a vote set via circular mean-shift.

    Runs the update

        theta <- atan2(sum_i w_i sin(theta_i), sum_i w_i cos(theta_i)),
        w_i = p_i * k_nu(theta - theta_i)

    from every vote orientation until the move falls below the tolerance
    or the iteration cap is hit. Fixed points of this update are exactly
    the stationary points of the vote density, and each step ascends it.
    Among all converged modes the one with maximal density wins; exact
    density ties break toward the smallest canonical angle.

    Raises
    ------
    EmptyVotesError
        If every probability is zero.
    ConvergenceError
        If no start converged; carries the best iterate reached.
    """
    if config is None:
        config = MeanShiftConfig()
    p = votes.probabilities
    if not np.any(p > 0):
        raise EmptyVotesError("all vote probabilities are zero")

    nu = float(config.nu)
    centers = np.radians(votes.orientations)
    sin_c, cos_c = np.sin(centers), np.cos(centers)

    theta = centers.copy()  # one start per discrete orientation
    converged = np.zeros(theta.shape, dtype=bool)
    dead = np.zeros(theta.shape, dtype=bool)  # zero total weight, cannot move
    tol_rad = np.radians(config.tolerance)

    for _ in range(config.max_iterations):
        active = ~(converged | dead)
        if not active.any():
            break
        cur = theta[active]
        # exp(nu*(cos(d)-1)) is the kernel up to a constant factor, which
        # cancels in the weighted average and avoids large exponentials
        w = p * np.exp(nu * (np.cos(cur[:, None] - centers[None, :]) - 1.0))
        num = w @ sin_c
        den = w @ cos_c
        total = w.sum(axis=1)
        new = np.arctan2(num, den)
        move = np.abs(np.arctan2(np.sin(new - cur), np.cos(new - cur)))
        zero_weight = total <= 0.0

        idx = np.flatnonzero(active)
        dead[idx[zero_weight]] = True
        ok = ~zero_weight
        theta[idx[ok]] = new[ok]
        converged[idx[ok & (move < tol_rad)]] = True

    angles = canonicalize(np.degrees(theta))
    densities = density_at(angles, votes, nu)

    pool = np.flatnonzero(converged)
    if pool.size == 0:
        best = int(np.argmax(densities))
        raise ConvergenceError(
            f"mean-shift did not converge from any of {theta.size} starts "
            f"within {config.max_iterations} iterations",
            best_angle=float(angles[best]),
        )
    # maximal density, ties toward the smallest canonical angle
    best = min(pool, key=lambda i: (-densities[i], angles[i]))
    return float(angles[best])
