"""Synthetic oriented-shape datasets, mirror augmentation, and file I/O.

Rendering convention: an angle of 0 degrees points toward the top of the
image and angles grow clockwise (compass style). Under this convention a
left-right pixel flip corresponds exactly to the angle map
theta -> (360 - theta) mod 360, which is what mirror augmentation uses.

Dataset files are delimited text: a header line carrying the feature
dimensionality, then one sample per line as the angle in degrees followed
by the feature values. Floats are written with repr, so a save/load
roundtrip is exact.
"""

import math
from dataclasses import dataclass

import numpy as np

from .circmath import canonicalize
from .decoder import VoteSet
from .errors import (
    DatasetFormatError,
    EmptyDatasetError,
    InvalidConfigError,
    InvalidInputError,
)

DATASET_HEADER_PREFIX = "# orientest-dataset v1 features="
VOTES_HEADER_PREFIX = "# orientest-votes v1 count="

SHAPE_WEDGE = "wedge"
SHAPE_ELLIPSE_NOTCH = "ellipse-notch"
SHAPES = (SHAPE_WEDGE, SHAPE_ELLIPSE_NOTCH)

# Wedge outline in the shape frame (+x is the facing direction): a pointy
# apex in front, flat base behind, symmetric about its axis.
_WEDGE_APEX = (0.75, 0.0)
_WEDGE_BASE = 0.45
_WEDGE_HALF_WIDTH = 0.30


@dataclass
class Dataset:
    """Feature matrix (n, d) with one ground-truth angle per row."""

    features: np.ndarray
    angles: np.ndarray

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        self.angles = np.asarray(self.angles, dtype=float)
        if self.features.ndim != 2 or self.angles.shape != (self.features.shape[0],):
            raise InvalidInputError(
                f"features {self.features.shape} and angles {self.angles.shape} disagree"
            )
        if not np.all(np.isfinite(self.features)):
            raise InvalidInputError("features must be finite")
        self.angles = canonicalize(self.angles) if len(self.angles) else self.angles

    def __len__(self):
        return self.features.shape[0]

    @property
    def feature_dim(self):
        return self.features.shape[1]


@dataclass(frozen=True)
class SynthSpec:
    """Synthetic rendering settings; generation is deterministic per seed."""

    count: int
    seed: int
    image_side: int = 32
    shape: str = SHAPE_WEDGE
    noise_std: float = 0.0
    stratified: bool = False

    def __post_init__(self):
        if self.image_side < 8:
            raise InvalidConfigError(f"image_side must be >= 8, got {self.image_side}")
        if self.count < 1:
            raise InvalidConfigError(f"count must be >= 1, got {self.count}")
        if self.noise_std < 0:
            raise InvalidConfigError(f"noise_std must be >= 0, got {self.noise_std}")
        if self.shape not in SHAPES:
            raise InvalidConfigError(f"shape must be one of {SHAPES}, got {self.shape!r}")


def _membership(xs, ys, shape):
    """Point-in-shape test in the shape frame; symmetric in ys."""
    if shape == SHAPE_WEDGE:
        ax, ay = _WEDGE_APEX
        bx, by = -_WEDGE_BASE, _WEDGE_HALF_WIDTH
        cx, cy = -_WEDGE_BASE, -_WEDGE_HALF_WIDTH
        # inside the triangle A->B->C (counterclockwise): all edge crosses >= 0
        e1 = (bx - ax) * (ys - ay) - (by - ay) * (xs - ax)
        e2 = (cx - bx) * (ys - by) - (cy - by) * (xs - bx)
        e3 = (ax - cx) * (ys - cy) - (ay - cy) * (xs - cx)
        return (e1 >= 0) & (e2 >= 0) & (e3 >= 0)
    body = (xs / 0.70) ** 2 + (ys / 0.42) ** 2 <= 1.0
    notch = (xs - 0.55) ** 2 + ys ** 2 <= 0.25 ** 2
    return body & ~notch


def render_shape(theta, side, shape=SHAPE_WEDGE):
    """Rasterize the shape facing ``theta`` degrees into a (side, side) image.

    Pixel values are in [0, 1]; edges are anti-aliased by 3x3 supersampling.
    The shape's facing direction is front/back asymmetric, so theta and
    theta + 180 produce distinct images.
    """
    rad = math.radians(canonicalize(theta))
    # compass convention: facing direction in (x right, y up) world coords
    dx, dy = math.sin(rad), math.cos(rad)
    half = (side - 1) / 2.0
    scale = side / 2.0
    sub = (np.arange(3) - 1.0) / 3.0
    coords = (np.arange(side)[:, None] + sub).ravel()
    x = (coords - half) / scale
    y_up = (half - coords) / scale
    xw, yw = np.meshgrid(x, y_up)  # xw varies along columns, yw along rows
    xs = xw * dx + yw * dy
    ys = xw * dy - yw * dx
    mask = _membership(xs, ys, shape)
    return mask.reshape(side, 3, side, 3).mean(axis=(1, 3))


def generate_synthetic(spec):
    """Render ``spec.count`` oriented shapes with uniform random angles.

    Stratified mode places one angle uniformly inside each of ``count``
    equal bins, so 360 samples cover every 1-degree bin exactly once.
    Gaussian pixel noise is added per sample, then the dataset mean image
    is subtracted (the per-dataset feature mean is 0 afterwards).
    """
    rng = np.random.default_rng(spec.seed)
    if spec.stratified:
        jitter = rng.uniform(size=spec.count)
        angles = (np.arange(spec.count) + jitter) * (360.0 / spec.count)
    else:
        angles = rng.uniform(0.0, 360.0, size=spec.count)
    angles = canonicalize(angles)

    d = spec.image_side * spec.image_side
    features = np.empty((spec.count, d))
    for i, a in enumerate(angles):
        img = render_shape(a, spec.image_side, spec.shape)
        if spec.noise_std > 0:
            img = img + rng.normal(0.0, spec.noise_std, size=img.shape)
        features[i] = img.ravel()
    features -= features.mean(axis=0)
    return Dataset(features=features, angles=angles)


def mirror_samples(features, angles):
    """Left-right flip of image-shaped features with theta -> 360 - theta.

    This is the pure reflection: applying it twice returns the original
    pixels and angles.
    """
    feats = np.asarray(features, dtype=float)
    side = math.isqrt(feats.shape[1])
    if side * side != feats.shape[1]:
        raise InvalidInputError(
            f"feature length {feats.shape[1]} is not a square image"
        )
    flipped = feats.reshape(-1, side, side)[:, :, ::-1].reshape(feats.shape)
    return flipped, canonicalize(360.0 - np.asarray(angles, dtype=float))


def mirror_augment(dataset):
    """Append the mirrored copy of every sample; output is twice the input."""
    flipped, mirrored_angles = mirror_samples(dataset.features, dataset.angles)
    return Dataset(
        features=np.concatenate([dataset.features, flipped]),
        angles=np.concatenate([dataset.angles, mirrored_angles]),
    )


def save_dataset(dataset, path):
    """Write the delimited-text dataset format described in the module docs."""
    if len(dataset) == 0:
        raise EmptyDatasetError("refusing to write a dataset with no samples")
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"{DATASET_HEADER_PREFIX}{dataset.feature_dim}\n")
        for angle, row in zip(dataset.angles, dataset.features):
            f.write(repr(float(angle)))
            for v in row:
                f.write("\t")
                f.write(repr(float(v)))
            f.write("\n")


def load_dataset(path):
    """Read a dataset file; errors carry the offending 1-based line number."""
    with open(path, encoding="utf-8") as f:
        lines = f.read().splitlines()
    if not lines:
        raise EmptyDatasetError(f"{path} is empty")
    header = lines[0]
    if not header.startswith(DATASET_HEADER_PREFIX):
        raise DatasetFormatError(
            f"line 1: expected header starting with {DATASET_HEADER_PREFIX!r}", line=1
        )
    try:
        dim = int(header[len(DATASET_HEADER_PREFIX):])
    except ValueError:
        raise DatasetFormatError(f"line 1: bad dimensionality in header", line=1)

    angles = []
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != dim + 1:
            raise DatasetFormatError(
                f"line {lineno}: expected {dim + 1} values, got {len(parts)}",
                line=lineno,
            )
        try:
            values = [float(p) for p in parts]
        except ValueError:
            raise DatasetFormatError(
                f"line {lineno}: could not parse a value", line=lineno
            )
        angles.append(values[0])
        rows.append(values[1:])
    if not rows:
        raise EmptyDatasetError(f"{path} contains a header but no samples")
    return Dataset(features=np.array(rows), angles=np.array(angles))


def save_votes(votes, path):
    """Write a vote set as delimited text: header with the count, then one
    ``orientation<TAB>probability`` pair per line."""
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"{VOTES_HEADER_PREFIX}{len(votes.orientations)}\n")
        for theta, prob in zip(votes.orientations, votes.probabilities):
            f.write(f"{float(theta)!r}\t{float(prob)!r}\n")


def load_votes(path):
    """Read a votes file written by save_votes (or by hand)."""
    with open(path, encoding="utf-8") as f:
        lines = f.read().splitlines()
    if not lines:
        raise EmptyDatasetError(f"{path} is empty")
    header = lines[0]
    if not header.startswith(VOTES_HEADER_PREFIX):
        raise DatasetFormatError(
            f"line 1: expected header starting with {VOTES_HEADER_PREFIX!r}", line=1
        )
    try:
        count = int(header[len(VOTES_HEADER_PREFIX):])
    except ValueError:
        raise DatasetFormatError("line 1: bad count in header", line=1)
    orients = []
    probs = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 2:
            raise DatasetFormatError(
                f"line {lineno}: expected 2 values, got {len(parts)}", line=lineno
            )
        try:
            orients.append(float(parts[0]))
            probs.append(float(parts[1]))
        except ValueError:
            raise DatasetFormatError(f"line {lineno}: could not parse a value", line=lineno)
    if len(orients) != count:
        raise DatasetFormatError(
            f"header promises {count} votes but the file has {len(orients)}"
        )
    return VoteSet(orientations=np.array(orients), probabilities=np.array(probs))
