# This module is part of desqn and is released under the
# 3-Clause BSD License: https://opensource.org/license/bsd-3-clause/

"""Dense numerics used by every other module: seeded random streams, random matrix
construction, spectral radius estimation and a finite-difference gradient checker.

All arrays are float64. Matrices are plain :class:`numpy.ndarray` objects, see
:data:`desqn.types.Matrix`.
"""

__all__ = [
    "RNG_COMPONENTS",
    "RunStreams",
    "SpectralEstimate",
    "finite_diff_grad",
    "make_rng",
    "power_iterate",
    "rng_streams",
    "sparsify",
    "spectral_radius",
    "stable_seed",
    "uniform_matrix",
]

import hashlib
import logging

import numpy as np

from desqn.exc import (
    InvalidProbabilityError,
    InvalidRangeError,
    NoConvergenceError,
    NonSquareMatrixError,
)

# typing ----------------------------------------------------------------

from typing import Callable, NamedTuple, Tuple

from desqn.types import Matrix, SeededRng, Vector

# ------------------------------------------------------------------------

_logger = logging.getLogger(__name__)

# { Invariants

RNG_COMPONENTS: Tuple[str, ...] = ("reservoir", "readout", "policy", "replay", "env")
"""Run components owning one independent random stream each. The position in this
tuple is the stream's spawn key and must never change."""

_BLOCK_SIZE = 8
_COLLAPSE_NORM = 1e-300
_MAX_RESTARTS = 3

# } END invariants


# { Random streams


def make_rng(seed: int, *spawn_key: int) -> SeededRng:
    """Create a PCG64 generator for `seed`, optionally on a sub-stream.

    Identical arguments always produce identical draw sequences, on every platform.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=spawn_key)))


class RunStreams(NamedTuple):
    """The independent random streams of one training run.

    Keeping one stream per component means changing the number of draws one component
    makes (say a different replay batch size) leaves all others untouched.
    """

    reservoir: SeededRng
    readout: SeededRng
    policy: SeededRng
    replay: SeededRng
    env: SeededRng


def rng_streams(seed: int) -> RunStreams:
    """:return: :class:`RunStreams` derived from a master `seed`"""
    return RunStreams(*(make_rng(seed, i) for i in range(len(RNG_COMPONENTS))))


def stable_seed(*parts: object) -> int:
    """Derive a 64-bit seed from `parts`.

    The text form of each part is hashed with BLAKE2b, so the result is stable across
    interpreter runs (unlike :func:`hash`) and platforms. Floats should be rounded by
    the caller if they come out of arithmetic.
    """
    text = "\x1f".join(repr(p) for p in parts)
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


# } END random streams

# { Construction


def uniform_matrix(rows: int, cols: int, lo: float, hi: float, rng: SeededRng) -> Matrix:
    """Draw a ``rows x cols`` matrix with entries independently uniform on ``[lo, hi)``.

    :raise InvalidRangeError:
        If ``lo >= hi``.
    """
    if not lo < hi:
        raise InvalidRangeError(lo, hi)
    if rows < 1 or cols < 1:
        raise ValueError("Matrix needs at least one row and column, got %i x %i" % (rows, cols))
    return rng.uniform(lo, hi, size=(rows, cols))


def sparsify(m: Matrix, keep_prob: float, rng: SeededRng) -> Matrix:
    """Zero each entry of `m` independently with probability ``1 - keep_prob``.

    Retained entries keep their exact value. A new matrix is returned; `m` is left
    untouched. One uniform draw is consumed per entry, whatever `keep_prob` is.

    :raise InvalidProbabilityError:
        If `keep_prob` lies outside of ``[0, 1]``.
    """
    if not 0.0 <= keep_prob <= 1.0:
        raise InvalidProbabilityError("keep_prob", keep_prob)
    mask = rng.random(size=m.shape) < keep_prob
    return np.where(mask, m, 0.0)


# } END construction

# { Spectral radius


class SpectralEstimate(NamedTuple):
    radius: float
    iterations: int
    converged: bool


def _orthonormal_block(a: Matrix) -> Tuple[Matrix, float]:
    q, r = np.linalg.qr(a)
    return q, float(np.abs(np.diag(r)).max(initial=0.0))


def power_iterate(m: Matrix, tol: float = 1e-10, max_iter: int = 10000, seed: int = 0) -> SpectralEstimate:
    """Estimate the largest eigenvalue magnitude of a square matrix.

    Runs block power (subspace) iteration on a few vectors at once, and reads the
    estimate off the Rayleigh-Ritz projection ``Q^T M Q``. Unlike single-vector power
    iteration, this converges when the dominant eigenvalues are a complex conjugate
    pair, which is the common case for random non-symmetric matrices.

    The iteration stops once the estimate changes by less than
    ``tol * (1 - ratio)`` between sweeps, where ``ratio`` is the observed
    convergence factor, bounding the remaining error by about `tol`. If the iterate
    collapses (a nilpotent block), it restarts from a fresh random block; repeated
    collapse means the spectrum seen is zero.

    :return:
        A :class:`SpectralEstimate`; ``converged`` is ``False`` if `max_iter` ran out.

    :raise NonSquareMatrixError:
        If `m` is not square.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NonSquareMatrixError(m.shape)
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1, got %r" % max_iter)

    n = m.shape[0]
    k = min(n, _BLOCK_SIZE)
    rng = make_rng(seed)
    q, _ = _orthonormal_block(rng.standard_normal((n, k)))

    estimate = 0.0
    restarts = 0
    for it in range(1, max_iter + 1):
        z = m @ q
        q_next, scale = _orthonormal_block(z)
        if scale < _COLLAPSE_NORM:
            restarts += 1
            if restarts > _MAX_RESTARTS:
                return SpectralEstimate(0.0, it, True)
            _logger.debug("Power iteration collapsed at iteration %i, restarting", it)
            q, _ = _orthonormal_block(rng.standard_normal((n, k)))
            continue
        # END handle collapse

        ritz = np.abs(np.linalg.eigvals(q.T @ z))
        new_estimate = float(ritz.max())
        if it > 1:
            ratio = float(ritz.min() / new_estimate) if new_estimate > 0.0 else 0.0
            threshold = tol * max(1.0 - ratio, 1e-3) * max(new_estimate, 1.0)
            if k == n or abs(new_estimate - estimate) <= threshold:
                return SpectralEstimate(new_estimate, it, True)
        estimate = new_estimate
        q = q_next
    # END for each sweep
    return SpectralEstimate(estimate, max_iter, False)


def spectral_radius(m: Matrix, tol: float = 1e-10, max_iter: int = 10000) -> float:
    """:return: The spectral radius of the square matrix `m`, to within about `tol`

    :raise NonSquareMatrixError:
        If `m` is not square.

    :raise NoConvergenceError:
        If `max_iter` sweeps did not suffice; the exception carries the best estimate.
    """
    est = power_iterate(m, tol, max_iter)
    if not est.converged:
        raise NoConvergenceError(est.radius, est.iterations, tol)
    return est.radius


# } END spectral radius


def finite_diff_grad(f: Callable[[Vector], float], v: Vector, h: float = 1e-5) -> Vector:
    """Central-difference gradient of the scalar function `f` at `v`.

    Each coordinate is ``(f(v + h e_i) - f(v - h e_i)) / 2h``. `v` itself is not
    modified; `f` receives fresh copies.
    """
    if not h > 0:
        raise ValueError("Step h must be positive, got %r" % h)
    v = np.asarray(v, dtype=np.float64)
    grad = np.empty_like(v)
    for i in range(v.size):
        plus = v.copy()
        minus = v.copy()
        plus.flat[i] += h
        minus.flat[i] -= h
        grad.flat[i] = (f(plus) - f(minus)) / (2.0 * h)
    return grad
