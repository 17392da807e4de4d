"""Continuous object-orientation estimation.

Three interchangeable prediction heads over a small trainable backbone:
unit-circle regression with a Huber loss, unit-circle regression with an
angular-difference loss, and staggered multi-task discretization decoded
by von Mises kernel density estimation with circular mean-shift.
"""

from .circmath import (
    angular_distance,
    bessel_i0,
    canonicalize,
    from_vector,
    to_unit_vector,
    von_mises_kernel,
)
from .encoding import DiscretizationScheme, assign_labels, build_scheme, encode_regression_target
from .losses import angular_loss, huber_loss, multitask_softmax_loss, softmax_votes
from .decoder import (
    DEFAULT_NU,
    MeanShiftConfig,
    VoteSet,
    decode_atan2,
    decode_meanshift,
    density_at,
    votes_from_softmax,
)
from .backbone import (
    HEAD_CIRCLE_ANGULAR,
    HEAD_CIRCLE_HUBER,
    HEAD_DISCRETE_MEANSHIFT,
    ModelState,
    NetworkSpec,
    TrainConfig,
    backward,
    forward,
    init_model,
    load_checkpoint,
    save_checkpoint,
    sgd_step,
    train,
)
from .data import (
    Dataset,
    SynthSpec,
    generate_synthetic,
    load_dataset,
    mirror_augment,
    render_shape,
    save_dataset,
)
from .metrics import EvalReport, angular_errors, evaluate

__version__ = "0.1.0"
