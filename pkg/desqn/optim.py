# This module is part of desqn and is released under the
# 3-Clause BSD License: https://opensource.org/license/bsd-3-clause/

"""First-order optimizers updating readout parameters in place.

The update rules, for gradient ``g`` at step ``t`` (counting from 1):

* ``sgd`` - classical (not Nesterov) momentum::

    v <- beta1 * v - lr * g
    p <- p + v

* ``adam`` - bias-corrected moments::

    m <- beta1 * m + (1 - beta1) * g
    v <- beta2 * v + (1 - beta2) * g**2
    p <- p - lr * (m / (1 - beta1**t)) / (sqrt(v / (1 - beta2**t)) + eps)

* ``amsgrad`` - Adam's first moment, with the running maximum of the *uncorrected*
  second moment in the denominator::

    v_max <- max(v_max, v)
    p <- p - lr * (m / (1 - beta1**t)) / (sqrt(v_max) + eps)
"""

__all__ = ["OptimConfig", "OptimState", "Optimizer", "apply_gradients"]

from dataclasses import dataclass

import numpy as np

from desqn.exc import InvalidConfigError, NonFiniteGradientError, ShapeMismatchError
from desqn.types import OPTIMIZER_KINDS, assert_never

# typing ----------------------------------------------------------------

from typing import Dict, Mapping, Optional

from desqn.readout import GradientSet, Readout
from desqn.types import OptimizerKind

# ------------------------------------------------------------------------


@dataclass(frozen=True)
class OptimConfig:
    kind: OptimizerKind = "amsgrad"
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self) -> None:
        if self.kind not in OPTIMIZER_KINDS:
            raise InvalidConfigError("Unknown optimizer %r, expected one of %s" % (self.kind, OPTIMIZER_KINDS))
        if not self.lr > 0.0:
            raise InvalidConfigError("Learning rate must be positive, got %r" % self.lr)
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise InvalidConfigError("beta1 and beta2 must lie in [0, 1), got %r, %r" % (self.beta1, self.beta2))
        if not self.eps > 0.0:
            raise InvalidConfigError("eps must be positive, got %r" % self.eps)


class OptimState:
    """Moment buffers of one parameter set.

    :attr:`first` holds Adam's first moment, or the SGD velocity. :attr:`v_max` is only
    populated for AMSGrad.
    """

    __slots__ = ("kind", "step_count", "first", "second", "v_max")

    def __init__(self, kind: OptimizerKind, params: Mapping[str, np.ndarray]) -> None:
        self.kind = kind
        self.step_count = 0
        self.first: Dict[str, np.ndarray] = {k: np.zeros_like(p) for k, p in params.items()}
        self.second: Dict[str, np.ndarray] = {}
        self.v_max: Dict[str, np.ndarray] = {}
        if kind != "sgd":
            self.second = {k: np.zeros_like(p) for k, p in params.items()}
        if kind == "amsgrad":
            self.v_max = {k: np.zeros_like(p) for k, p in params.items()}

    def __repr__(self) -> str:
        return "<%s kind=%s step_count=%i>" % (type(self).__name__, self.kind, self.step_count)


def _check(state: OptimState, params: Mapping[str, np.ndarray], grads: GradientSet) -> None:
    grads.check_shapes(params)
    for name, p in params.items():
        if name not in state.first or state.first[name].shape != p.shape:
            raise ShapeMismatchError("Optimizer state does not match parameter %r of shape %s" % (name, p.shape))
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradientError(name)
    # END for each gradient


def apply_gradients(
    cfg: OptimConfig,
    state: OptimState,
    params: Mapping[str, np.ndarray],
    grads: GradientSet,
) -> None:
    """Update `params` in place by one step of the rule selected in `cfg`.

    All checks run before any parameter is touched, so a failing call leaves
    parameters and state unchanged.

    :raise ShapeMismatchError:
        If parameters, gradients and state buffers disagree.

    :raise NonFiniteGradientError:
        If any gradient entry is NaN or infinite.
    """
    if cfg.kind != state.kind:
        raise ShapeMismatchError("Optimizer state is for %r, config is for %r" % (state.kind, cfg.kind))
    _check(state, params, grads)

    state.step_count += 1
    t = state.step_count
    b1, b2 = cfg.beta1, cfg.beta2

    for name, p in params.items():
        g = grads[name]
        m = state.first[name]
        if cfg.kind == "sgd":
            m *= b1
            m -= cfg.lr * g
            p += m
            continue

        m *= b1
        m += (1.0 - b1) * g
        v = state.second[name]
        v *= b2
        v += (1.0 - b2) * g * g
        m_hat = m / (1.0 - b1**t)
        if cfg.kind == "adam":
            denom = np.sqrt(v / (1.0 - b2**t)) + cfg.eps
        elif cfg.kind == "amsgrad":
            v_max = state.v_max[name]
            np.maximum(v_max, v, out=v_max)
            denom = np.sqrt(v_max) + cfg.eps
        else:
            assert_never(cfg.kind)
        p -= cfg.lr * m_hat / denom
    # END for each parameter


class Optimizer:
    """Binds an :class:`OptimConfig` and its :class:`OptimState` to one readout."""

    __slots__ = ("cfg", "state", "net")

    def __init__(self, cfg: OptimConfig, net: Readout, state: Optional[OptimState] = None) -> None:
        self.cfg = cfg
        self.net = net
        self.state = state if state is not None else OptimState(cfg.kind, net.parameters())

    def step(self, grads: GradientSet) -> None:
        apply_gradients(self.cfg, self.state, self.net.parameters(), grads)
