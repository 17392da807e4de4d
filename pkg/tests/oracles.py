"""Independent reference implementations used to freeze expected values.

Everything here is deliberately written from scratch (or delegated to
scipy) so it shares no code with the package under test.
"""

import math

import numpy as np
from scipy import special


def i0_power_series(nu, terms=50):
    """Plain 50-term even power series for the order-0 modified Bessel fn."""
    return sum((nu / 2.0) ** (2 * k) / math.factorial(k) ** 2 for k in range(terms))


def vm_kernel_ref(theta_deg, nu):
    """Reference von Mises kernel via scipy's Bessel function."""
    return np.exp(nu * np.cos(np.radians(theta_deg))) / (2 * np.pi * special.i0(nu))


def wrap_distance(a, b):
    d = abs((a - b) % 360.0)
    return min(d, 360.0 - d)


def grid_argmax_decode(orientations, probabilities, nu, step=0.01):
    """Exhaustive argmax of the vote density on a fixed-resolution grid.

    Returns (angle, density). Ties go to the smallest grid angle, matching
    np.argmax's first-hit behaviour.
    """
    grid = np.arange(0.0, 360.0, step)
    diffs = np.radians(grid[:, None] - np.asarray(orientations)[None, :])
    dens = np.exp(nu * np.cos(diffs)) @ np.asarray(probabilities)
    dens /= 2 * np.pi * special.i0(nu)
    k = int(np.argmax(dens))
    return float(grid[k]), float(dens[k])


def central_difference(f, x, step=1e-6):
    """Central finite-difference gradient of a scalar function of a vector."""
    x = np.asarray(x, dtype=float)
    grad = np.zeros_like(x)
    for i in range(x.size):
        hi = x.copy()
        lo = x.copy()
        hi.flat[i] += step
        lo.flat[i] -= step
        grad.flat[i] = (f(hi) - f(lo)) / (2 * step)
    return grad


def mlp_forward_ref(weights, biases, x):
    """Naive loop-based forward pass: affine + relu, last layer affine."""
    h = np.asarray(x, dtype=float)
    for i, (w, b) in enumerate(zip(weights, biases)):
        z = h @ w + b
        h = z if i == len(weights) - 1 else np.where(z > 0, z, 0.0)
    return h
