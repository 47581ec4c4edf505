# This module is part of desqn and is released under the
# 3-Clause BSD License: https://opensource.org/license/bsd-3-clause/

"""Trainable Q-value heads over the concatenated (observation, reservoir state) input.

Two architectures exist:

* :class:`MlpReadout` - one hidden ReLU layer, ``q = W2 relu(W1 z + b1) + b2``.
* :class:`LinearReadout` - the classic reservoir readout, ``q = W z + b``.

Both compute exact gradients of the mean squared error on the selected action's
Q-value. Parameters are float64 arrays owned by the readout and updated in place by
:mod:`desqn.optim`.
"""

__all__ = [
    "GradientSet",
    "Readout",
    "MlpReadout",
    "LinearReadout",
    "init_readout",
    "forward",
    "backward_mse",
    "copy_parameters",
    "parameter_count",
    "to_flat",
    "from_flat",
    "save_parameters",
    "load_parameters",
]

import abc

import numpy as np

from desqn.exc import (
    ArchitectureMismatchError,
    DimensionMismatchError,
    EmptyBatchError,
    InvalidDimensionError,
    ShapeMismatchError,
)
from desqn.types import assert_never

# typing ----------------------------------------------------------------

from typing import ClassVar, Dict, Iterator, Mapping, Sequence, Tuple, Type, TypeVar

from desqn.types import Matrix, PathLike, ReadoutKind, SeededRng, Vector

T_Readout = TypeVar("T_Readout", bound="Readout")

# ------------------------------------------------------------------------


class GradientSet(Dict[str, np.ndarray]):
    """One gradient array per parameter tensor, keyed and ordered like
    :meth:`Readout.parameters`."""

    def check_shapes(self, params: Mapping[str, np.ndarray]) -> None:
        """:raise ShapeMismatchError: If names or shapes differ from `params`"""
        if list(self) != list(params):
            raise ShapeMismatchError("Gradient names %s do not match parameters %s" % (list(self), list(params)))
        for name, grad in self.items():
            if grad.shape != params[name].shape:
                raise ShapeMismatchError(
                    "Gradient %r has shape %s, parameter has %s" % (name, grad.shape, params[name].shape)
                )
        # END for each gradient

    def flat(self) -> Vector:
        return np.concatenate([g.ravel() for g in self.values()])


def _glorot(rows: int, cols: int, rng: SeededRng) -> Matrix:
    limit = np.sqrt(6.0 / (rows + cols))
    return rng.uniform(-limit, limit, size=(rows, cols))


def _batch_arrays(
    batch: Sequence[Tuple[Vector, int, float]],
) -> Tuple[Matrix, np.ndarray, Vector]:
    if len(batch) == 0:
        raise EmptyBatchError("A training batch needs at least one sample")
    inputs = np.stack([np.asarray(s[0], dtype=np.float64) for s in batch])
    actions = np.fromiter((s[1] for s in batch), dtype=np.intp, count=len(batch))
    targets = np.fromiter((s[2] for s in batch), dtype=np.float64, count=len(batch))
    return inputs, actions, targets


class Readout(abc.ABC):
    """Base for Q-value heads.

    Subclasses declare their parameter tensors in :attr:`param_names`, in the order
    used for serialization.
    """

    __slots__ = ()

    kind: ClassVar[ReadoutKind]
    param_names: ClassVar[Tuple[str, ...]]

    # { Interface

    @property
    @abc.abstractmethod
    def d_in(self) -> int:
        ...

    @property
    @abc.abstractmethod
    def n_actions(self) -> int:
        ...

    @abc.abstractmethod
    def _forward_batch(self, inputs: Matrix) -> Matrix:
        ...

    @abc.abstractmethod
    def _backward_batch(self, inputs: Matrix, dq: Matrix) -> GradientSet:
        """:return: Gradients given ``dq``, the loss derivative w.r.t. the outputs"""

    # } END interface

    def parameters(self) -> Dict[str, np.ndarray]:
        """:return: The live parameter arrays, which may be updated in place"""
        return {name: getattr(self, name) for name in self.param_names}

    def __iter__(self) -> Iterator[np.ndarray]:
        return iter(self.parameters().values())

    def __repr__(self) -> str:
        shapes = ", ".join("%s=%s" % (k, v.shape) for k, v in self.parameters().items())
        return "<%s %s>" % (type(self).__name__, shapes)

    def _check_inputs(self, inputs: Matrix) -> Matrix:
        inputs = np.asarray(inputs, dtype=np.float64)
        if inputs.shape[-1:] != (self.d_in,) or inputs.ndim > 2:
            raise DimensionMismatchError("readout input", self.d_in, inputs.shape)
        return inputs

    def forward(self, inputs: Matrix) -> Matrix:
        """Q-values for a single input vector, or for each row of a batch.

        :return:
            A vector of ``n_actions`` values for a vector input, a
            ``(batch, n_actions)`` matrix for a matrix input.
        """
        inputs = self._check_inputs(inputs)
        if inputs.ndim == 1:
            return self._forward_batch(inputs[np.newaxis, :])[0]
        return self._forward_batch(inputs)

    def loss_and_grads(self, inputs: Matrix, actions: np.ndarray, targets: Vector) -> Tuple[float, GradientSet]:
        """Mean squared error of the selected actions' Q-values against `targets`,
        and its exact gradient.

        Only the chosen action's output contributes per sample. Gradients are averaged
        over the batch.
        """
        inputs = self._check_inputs(inputs)
        if inputs.ndim != 2 or inputs.shape[0] == 0:
            raise EmptyBatchError("A training batch needs at least one sample")
        actions = np.asarray(actions, dtype=np.intp)
        targets = np.asarray(targets, dtype=np.float64)
        n = inputs.shape[0]
        if actions.shape != (n,) or targets.shape != (n,):
            raise DimensionMismatchError("actions/targets", n, actions.shape)
        if actions.min() < 0 or actions.max() >= self.n_actions:
            raise DimensionMismatchError("action index bound", self.n_actions, int(actions.max()) + 1)

        rows = np.arange(n)
        diff = self._forward_batch(inputs)[rows, actions] - targets
        loss = float(np.mean(diff * diff))
        dq = np.zeros((n, self.n_actions))
        dq[rows, actions] = 2.0 * diff / n
        return loss, self._backward_batch(inputs, dq)

    def copy_to(self, dst: "Readout") -> None:
        """Copy our parameters into `dst`; afterwards both are independent."""
        if type(dst) is not type(self):
            raise ArchitectureMismatchError("Cannot copy %s into %s" % (type(self).__name__, type(dst).__name__))
        dst_params = dst.parameters()
        for name, value in self.parameters().items():
            if dst_params[name].shape != value.shape:
                raise ArchitectureMismatchError(
                    "Parameter %r has shape %s in source but %s in destination"
                    % (name, value.shape, dst_params[name].shape)
                )
        for name, value in self.parameters().items():
            np.copyto(dst_params[name], value)

    def clone(self: T_Readout) -> T_Readout:
        """:return: An independent readout with equal parameters"""
        return type(self)(**{k: v.copy() for k, v in self.parameters().items()})  # type: ignore[arg-type]


class MlpReadout(Readout):
    """Two-layer network with ReLU hidden units."""

    __slots__ = ("w1", "b1", "w2", "b2")

    kind = "mlp"
    param_names = ("w1", "b1", "w2", "b2")

    def __init__(self, w1: Matrix, b1: Vector, w2: Matrix, b2: Vector) -> None:
        n_hidden, _ = w1.shape
        if b1.shape != (n_hidden,) or w2.shape[1:] != (n_hidden,) or b2.shape != (w2.shape[0],):
            raise InvalidDimensionError(
                "Inconsistent layer shapes w1=%s b1=%s w2=%s b2=%s" % (w1.shape, b1.shape, w2.shape, b2.shape)
            )
        self.w1 = np.array(w1, dtype=np.float64)
        self.b1 = np.array(b1, dtype=np.float64)
        self.w2 = np.array(w2, dtype=np.float64)
        self.b2 = np.array(b2, dtype=np.float64)

    @property
    def d_in(self) -> int:
        return self.w1.shape[1]

    @property
    def n_hidden(self) -> int:
        return self.w1.shape[0]

    @property
    def n_actions(self) -> int:
        return self.w2.shape[0]

    def _forward_batch(self, inputs: Matrix) -> Matrix:
        hidden = np.maximum(inputs @ self.w1.T + self.b1, 0.0)
        return hidden @ self.w2.T + self.b2

    def _backward_batch(self, inputs: Matrix, dq: Matrix) -> GradientSet:
        pre = inputs @ self.w1.T + self.b1
        hidden = np.maximum(pre, 0.0)
        # Units with non-positive pre-activation pass no gradient.
        dpre = (dq @ self.w2) * (pre > 0.0)
        return GradientSet(
            w1=dpre.T @ inputs,
            b1=dpre.sum(axis=0),
            w2=dq.T @ hidden,
            b2=dq.sum(axis=0),
        )


class LinearReadout(Readout):
    """Single linear layer."""

    __slots__ = ("w", "b")

    kind = "linear"
    param_names = ("w", "b")

    def __init__(self, w: Matrix, b: Vector) -> None:
        if b.shape != (w.shape[0],):
            raise InvalidDimensionError("Bias shape %s does not match weight shape %s" % (b.shape, w.shape))
        self.w = np.array(w, dtype=np.float64)
        self.b = np.array(b, dtype=np.float64)

    @property
    def d_in(self) -> int:
        return self.w.shape[1]

    @property
    def n_actions(self) -> int:
        return self.w.shape[0]

    def _forward_batch(self, inputs: Matrix) -> Matrix:
        return inputs @ self.w.T + self.b

    def _backward_batch(self, inputs: Matrix, dq: Matrix) -> GradientSet:
        return GradientSet(w=dq.T @ inputs, b=dq.sum(axis=0))


READOUT_TYPES: Dict[str, Type[Readout]] = {"mlp": MlpReadout, "linear": LinearReadout}


# { Functional interface


def init_readout(kind: ReadoutKind, d_in: int, n_hidden: int, n_actions: int, rng: SeededRng) -> Readout:
    """Create a readout with Glorot-uniform weights and zero biases.

    `n_hidden` is ignored for the linear readout.

    :raise InvalidDimensionError:
        If a layer size is smaller than 1.
    """
    if d_in < 1 or n_actions < 1 or (kind == "mlp" and n_hidden < 1):
        raise InvalidDimensionError(
            "Readout dimensions must be at least 1, got d_in=%r n_hidden=%r n_actions=%r" % (d_in, n_hidden, n_actions)
        )
    if kind == "mlp":
        w1 = _glorot(n_hidden, d_in, rng)
        w2 = _glorot(n_actions, n_hidden, rng)
        return MlpReadout(w1, np.zeros(n_hidden), w2, np.zeros(n_actions))
    elif kind == "linear":
        return LinearReadout(_glorot(n_actions, d_in, rng), np.zeros(n_actions))
    else:
        assert_never(kind, exc=ValueError("Unknown readout kind %r" % kind))
        raise AssertionError("unreachable")


def forward(net: Readout, inputs: Vector) -> Vector:
    return net.forward(inputs)


def backward_mse(net: Readout, batch: Sequence[Tuple[Vector, int, float]]) -> Tuple[float, GradientSet]:
    """Loss and gradients for a batch of ``(input, action, target)`` samples.

    :raise EmptyBatchError:
        If `batch` is empty.
    """
    inputs, actions, targets = _batch_arrays(batch)
    return net.loss_and_grads(inputs, actions, targets)


def copy_parameters(src: Readout, dst: Readout) -> None:
    """Copy `src` parameters into `dst` bitwise.

    :raise ArchitectureMismatchError:
        If the readouts differ in kind or shape.
    """
    src.copy_to(dst)


def parameter_count(net: Readout) -> int:
    return sum(p.size for p in net)


def to_flat(net: Readout) -> Vector:
    """:return: All parameters concatenated in declaration order, each row-major"""
    return np.concatenate([p.ravel() for p in net])


def from_flat(net: Readout, flat: Vector) -> None:
    """Overwrite the parameters of `net` from a vector made by :func:`to_flat`."""
    flat = np.asarray(flat, dtype=np.float64)
    if flat.shape != (parameter_count(net),):
        raise ArchitectureMismatchError(
            "Flat parameter vector has shape %s, %s needs (%i,)" % (flat.shape, net, parameter_count(net))
        )
    offset = 0
    for p in net:
        p[...] = flat[offset : offset + p.size].reshape(p.shape)
        offset += p.size
    # END for each parameter


def save_parameters(net: Readout, path: PathLike) -> None:
    """Write the parameters as a little-endian float64 ``.npy`` vector."""
    np.save(path, to_flat(net).astype("<f8"), allow_pickle=False)


def load_parameters(net: Readout, path: PathLike) -> None:
    from_flat(net, np.load(path, allow_pickle=False))


# } END functional interface
