"""Small trainable MLP backbone with plain SGD.

The network is a chain of affine layers with ReLU between them and no
activation on the final layer. It consumes flattened images or
precomputed feature vectors, and its output layer is sized either 2 (the
unit-circle regression heads) or n_tasks*n_classes (the discretization
head). Training is deterministic given the seed.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .encoding import build_scheme, encode_regression_target, assign_labels
from .errors import (
    DegenerateVectorError,
    DivergenceError,
    InvalidConfigError,
    InvalidInputError,
)
from .losses import angular_loss, huber_loss, multitask_softmax_loss

HEAD_CIRCLE_HUBER = "circle-huber"
HEAD_CIRCLE_ANGULAR = "circle-angular"
HEAD_DISCRETE_MEANSHIFT = "discrete-meanshift"
HEADS = (HEAD_CIRCLE_HUBER, HEAD_CIRCLE_ANGULAR, HEAD_DISCRETE_MEANSHIFT)

CHECKPOINT_FORMAT = "orientest-checkpoint"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class NetworkSpec:
    """Layer widths from input to output, activation, and weight init scale."""

    layer_sizes: tuple
    activation: str = "relu"
    init_std: float = 0.0001

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        object.__setattr__(self, "layer_sizes", sizes)
        if len(sizes) < 2 or any(s < 1 for s in sizes):
            raise InvalidConfigError(f"need >= 2 layer sizes, all >= 1, got {sizes}")
        if self.activation != "relu":
            raise InvalidConfigError(f"unsupported activation {self.activation!r}")
        if self.init_std < 0:
            raise InvalidConfigError(f"init_std must be >= 0, got {self.init_std}")


@dataclass
class TrainConfig:
    """SGD settings. ``lr_drop`` is (at_iteration, factor): from that
    iteration on, the learning rate is divided by the factor."""

    learning_rate: float
    iterations: int
    batch_size: int = 32
    momentum: float = 0.9
    weight_decay: float = 0.0005
    lr_drop: tuple | None = None
    max_grad_norm: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise InvalidConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.iterations < 1:
            raise InvalidConfigError(f"iterations must be >= 1, got {self.iterations}")
        if self.batch_size < 1:
            raise InvalidConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if not 0 <= self.momentum < 1:
            raise InvalidConfigError(f"momentum must be in [0, 1), got {self.momentum}")
        if self.weight_decay < 0:
            raise InvalidConfigError(f"weight_decay must be >= 0, got {self.weight_decay}")
        if self.lr_drop is not None:
            at, factor = self.lr_drop
            if at < 0 or factor <= 0:
                raise InvalidConfigError(f"bad lr_drop {self.lr_drop!r}")

    def lr_at(self, iteration):
        if self.lr_drop is not None and iteration >= self.lr_drop[0]:
            return self.learning_rate / self.lr_drop[1]
        return self.learning_rate


@dataclass
class ModelState:
    """Parameters plus momentum buffers; shapes fixed at construction."""

    spec: NetworkSpec
    seed: int
    weights: list
    biases: list
    velocity_w: list
    velocity_b: list


@dataclass
class TrainingLog:
    """Per-iteration loss/lr trace plus the degenerate-sample counter."""

    iterations: list = field(default_factory=list)
    losses: list = field(default_factory=list)
    lrs: list = field(default_factory=list)
    skipped_samples: int = 0

    def append(self, iteration, loss, lr):
        self.iterations.append(int(iteration))
        self.losses.append(float(loss))
        self.lrs.append(float(lr))


def init_model(spec, seed):
    """Gaussian weights N(0, init_std^2) from a seeded generator, zero biases.

    Identical seeds produce bit-identical parameters.
    """
    rng = np.random.default_rng(seed)
    sizes = spec.layer_sizes
    weights = [rng.normal(0.0, spec.init_std, size=(sizes[i], sizes[i + 1]))
               for i in range(len(sizes) - 1)]
    biases = [np.zeros(sizes[i + 1]) for i in range(len(sizes) - 1)]
    return ModelState(
        spec=spec,
        seed=int(seed),
        weights=weights,
        biases=biases,
        velocity_w=[np.zeros_like(w) for w in weights],
        velocity_b=[np.zeros_like(b) for b in biases],
    )


def _check_input(model, x):
    arr = np.asarray(x, dtype=float)
    d = model.spec.layer_sizes[0]
    if arr.ndim == 1:
        if arr.shape[0] != d:
            raise InvalidInputError(f"input length {arr.shape[0]} != first layer size {d}")
    elif arr.ndim == 2:
        if arr.shape[1] != d:
            raise InvalidInputError(f"input width {arr.shape[1]} != first layer size {d}")
    else:
        raise InvalidInputError(f"input must be 1D or 2D, got shape {arr.shape}")
    return arr


def _forward_trace(model, x):
    """Returns (pre-activation list, post-activation list incl. input)."""
    acts = [x]
    pres = []
    h = x
    last = len(model.weights) - 1
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = h @ w + b
        pres.append(z)
        h = z if i == last else np.maximum(z, 0.0)
        acts.append(h)
    return pres, acts


def forward(model, x):
    """Affine + ReLU chain; the final layer is affine with no activation.

    Accepts a single vector or a (batch, features) matrix.
    """
    arr = _check_input(model, x)
    _, acts = _forward_trace(model, arr)
    return acts[-1]


def _backprop(model, pres, acts, output_gradient):
    """Reverse-mode gradients given a forward trace; batch rows are summed."""
    g = output_gradient
    grads_w = [None] * len(model.weights)
    grads_b = [None] * len(model.weights)
    for i in range(len(model.weights) - 1, -1, -1):
        if i < len(model.weights) - 1:
            g = g * (pres[i] > 0)
        a = acts[i]
        if a.ndim == 1:
            grads_w[i] = np.outer(a, g)
            grads_b[i] = g.copy()
        else:
            grads_w[i] = a.T @ g
            grads_b[i] = g.sum(axis=0)
        g = g @ model.weights[i].T
    return grads_w, grads_b


def backward(model, x, output_gradient):
    """Exact gradients of (loss o forward) given the loss gradient at the output.

    For batched input the per-sample parameter gradients are summed; scale
    the output gradient rows beforehand to obtain a mean.
    """
    arr = _check_input(model, x)
    g = np.asarray(output_gradient, dtype=float)
    out = model.spec.layer_sizes[-1]
    expected = (out,) if arr.ndim == 1 else (arr.shape[0], out)
    if g.shape != expected:
        raise InvalidInputError(f"output gradient shape {g.shape}, expected {expected}")
    pres, acts = _forward_trace(model, arr)
    return _backprop(model, pres, acts, g)


def sgd_step(model, grads_w, grads_b, config, lr=None):
    """Momentum SGD with decoupled-from-nothing weight decay folded into the
    gradient: v <- mu*v + g + wd*p; p <- p - lr*v. Updates in place and
    returns the model."""
    if lr is None:
        lr = config.learning_rate
    mu, wd = config.momentum, config.weight_decay
    for i in range(len(model.weights)):
        model.velocity_w[i] = mu * model.velocity_w[i] + grads_w[i] + wd * model.weights[i]
        model.weights[i] = model.weights[i] - lr * model.velocity_w[i]
        model.velocity_b[i] = mu * model.velocity_b[i] + grads_b[i] + wd * model.biases[i]
        model.biases[i] = model.biases[i] - lr * model.velocity_b[i]
    return model


def _clip_gradients(grads_w, grads_b, max_norm):
    total = 0.0
    for g in grads_w:
        total += float(np.sum(g * g))
    for g in grads_b:
        total += float(np.sum(g * g))
    norm = np.sqrt(total)
    if norm > max_norm and norm > 0:
        scale = max_norm / norm
        grads_w = [g * scale for g in grads_w]
        grads_b = [g * scale for g in grads_b]
    return grads_w, grads_b


def _batch_loss(head, preds, targets, labels, log):
    """Mean loss over a batch and the matching output-gradient rows.

    Samples that trip the angular loss's origin guard are skipped and
    counted on the log.
    """
    batch = preds.shape[0]
    gout = np.zeros_like(preds)
    values = []
    valid_rows = []
    for i in range(batch):
        if head == HEAD_CIRCLE_HUBER:
            v, g = huber_loss(preds[i], targets[i])
        elif head == HEAD_CIRCLE_ANGULAR:
            try:
                v, g = angular_loss(preds[i], targets[i])
            except DegenerateVectorError:
                log.skipped_samples += 1
                continue
        else:
            m, n = labels.shape[1], preds.shape[1] // labels.shape[1]
            v, g = multitask_softmax_loss(preds[i].reshape(m, n), labels[i])
            g = g.ravel()
        values.append(v)
        valid_rows.append(i)
        gout[i] = g
    if not valid_rows:
        return None, None
    gout /= len(valid_rows)
    return float(np.mean(values)), gout


def train(model, dataset, head, config, scheme=None):
    """Minibatch SGD over a dataset with seeded epoch shuffling.

    Returns ``(model, TrainingLog)``. The log records the mean batch loss
    and learning rate of every iteration. Raises DivergenceError when the
    loss goes non-finite (or a whole batch collapses onto the angular
    loss's degenerate origin), naming the iteration.
    """
    if head not in HEADS:
        raise InvalidConfigError(f"unknown head {head!r}, expected one of {HEADS}")
    n = len(dataset.angles)
    if n == 0:
        raise InvalidInputError("cannot train on an empty dataset")
    out_dim = model.spec.layer_sizes[-1]
    if head == HEAD_DISCRETE_MEANSHIFT:
        if scheme is None:
            raise InvalidConfigError("the discretization head needs a scheme")
        if out_dim != scheme.total_orientations:
            raise InvalidConfigError(
                f"output size {out_dim} != n_tasks*n_classes = {scheme.total_orientations}"
            )
        labels = np.array([assign_labels(a, scheme) for a in dataset.angles])
        targets = None
    else:
        if out_dim != 2:
            raise InvalidConfigError(f"regression heads need output size 2, got {out_dim}")
        targets = np.array([encode_regression_target(a) for a in dataset.angles])
        labels = None

    features = np.asarray(dataset.features, dtype=float)
    rng = np.random.default_rng(config.seed)
    log = TrainingLog()

    order = rng.permutation(n) if n >= config.batch_size else None
    pos = 0
    for it in range(config.iterations):
        if order is not None:
            if pos + config.batch_size > n:
                order = rng.permutation(n)
                pos = 0
            idx = order[pos:pos + config.batch_size]
            pos += config.batch_size
        else:
            idx = rng.integers(0, n, size=config.batch_size)

        x = features[idx]
        pres, acts = _forward_trace(model, x)
        preds = acts[-1]
        loss, gout = _batch_loss(
            head,
            preds,
            targets[idx] if targets is not None else None,
            labels[idx] if labels is not None else None,
            log,
        )
        if loss is None:
            raise DivergenceError(
                f"every sample in the batch at iteration {it} had a degenerate "
                f"prediction; the model has collapsed to the origin",
                iteration=it,
            )
        if not np.isfinite(loss):
            raise DivergenceError(f"non-finite loss at iteration {it}", iteration=it)

        grads_w, grads_b = _backprop(model, pres, acts, gout)
        if config.max_grad_norm is not None:
            grads_w, grads_b = _clip_gradients(grads_w, grads_b, config.max_grad_norm)
        lr = config.lr_at(it)
        sgd_step(model, grads_w, grads_b, config, lr=lr)
        log.append(it, loss, lr)
    return model, log


def save_checkpoint(model, path, head=None, scheme=None):
    """Write the model as a versioned JSON container.

    The layout is stable: format tag, version, network spec, seed, the
    head/scheme the model was trained for, and parameter arrays as nested
    lists (exact float64 roundtrip via repr). Writing is deterministic,
    so identical models produce byte-identical files.
    """
    doc = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "layer_sizes": list(model.spec.layer_sizes),
        "activation": model.spec.activation,
        "init_std": model.spec.init_std,
        "seed": model.seed,
        "head": head,
        "scheme": (
            {"n_classes": scheme.n_classes, "n_tasks": scheme.n_tasks}
            if scheme is not None
            else None
        ),
        "weights": [w.tolist() for w in model.weights],
        "biases": [b.tolist() for b in model.biases],
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, sort_keys=True, indent=1)
        f.write("\n")


def load_checkpoint(path):
    """Read a checkpoint; returns (model, meta) with meta = {head, scheme}."""
    with open(path, encoding="utf-8") as f:
        doc = json.load(f)
    if doc.get("format") != CHECKPOINT_FORMAT:
        raise InvalidInputError(f"{path} is not a checkpoint file")
    if doc.get("version") != CHECKPOINT_VERSION:
        raise InvalidInputError(f"unsupported checkpoint version {doc.get('version')!r}")
    spec = NetworkSpec(
        layer_sizes=tuple(doc["layer_sizes"]),
        activation=doc["activation"],
        init_std=doc["init_std"],
    )
    weights = [np.array(w, dtype=float) for w in doc["weights"]]
    biases = [np.array(b, dtype=float) for b in doc["biases"]]
    model = ModelState(
        spec=spec,
        seed=int(doc["seed"]),
        weights=weights,
        biases=biases,
        velocity_w=[np.zeros_like(w) for w in weights],
        velocity_b=[np.zeros_like(b) for b in biases],
    )
    scheme = None
    if doc.get("scheme"):
        scheme = build_scheme(doc["scheme"]["n_classes"], doc["scheme"]["n_tasks"])
    return model, {"head": doc.get("head"), "scheme": scheme}
