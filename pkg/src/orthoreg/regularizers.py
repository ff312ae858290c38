"""Orthogonality penalties with analytic value-and-gradient evaluation.

Every regularizer maps a weight matrix W (m x n) to a scalar penalty and a
gradient of W's shape, with the coefficient lambda already folded in so
scheduler output plugs straight into the training step:

  SO            lambda * ||W^T W - I||_F^2           grad 4 lambda W (W^T W - I)
  DSO           SO plus the row-Gram term            grad adds 4 lambda (W W^T - I) W
  SELECTIVE_SO  column-Gram branch if rows > cols, else row-Gram branch
  MC            lambda * max_ij |(W^T W - I)_ij|     subgradient at the active entry
  SRIP          lambda * sigma(W^T W - I)            via exact eigensolver or the
                                                     two-round power estimator
  SR            (lambda/2) * sigma(W)^2              top singular direction of W

MC and SRIP are nonsmooth; at an argmax or dominant-eigenvalue tie the
returned gradient is one member of the subdifferential (MC breaks ties at
the first entry in row-major order).
"""

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ZeroIterate
from .linalg import (as_matrix, frob_norm_sq, gram, power_iter_direction,
                     sym_eig_dominant)


class RegKind(enum.Enum):
    SO = "so"
    DSO = "dso"
    SELECTIVE_SO = "selective_so"
    MC = "mc"
    SRIP = "srip"
    SR = "sr"
    NONE = "none"

    @classmethod
    def from_string(cls, text):
        try:
            return cls(text.strip().lower())
        except ValueError:
            names = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown regularizer {text!r} (expected one of {names})")


class SripMode(enum.Enum):
    EXACT = "exact"
    POWER = "power"


class RegOutput(NamedTuple):
    value: float
    grad: np.ndarray


@dataclass(frozen=True)
class RegOptions:
    """Evaluation knobs consumed by ``evaluate``.

    ``srip_seed`` seeds the power-iteration start vector; callers that need
    reproducible training derive it deterministically per step and layer.
    """
    srip_mode: SripMode = SripMode.POWER
    srip_iters: int = 2
    srip_seed: int = 0
    mc_off_diagonal_only: bool = False


def _check_lambda(lam):
    lam = float(lam)
    if lam < 0.0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    return lam


def so(w, lam):
    """Soft orthogonality: push the column Gram matrix toward identity."""
    w = as_matrix(w, "w")
    lam = _check_lambda(lam)
    d = gram(w) - np.eye(w.shape[1])
    return RegOutput(lam * frob_norm_sq(d), 4.0 * lam * (w @ d))


def dso(w, lam):
    """Double soft orthogonality: column and row Gram terms together."""
    w = as_matrix(w, "w")
    lam = _check_lambda(lam)
    d_col = gram(w) - np.eye(w.shape[1])
    d_row = gram(w.T) - np.eye(w.shape[0])
    value = lam * (frob_norm_sq(d_col) + frob_norm_sq(d_row))
    grad = 4.0 * lam * (w @ d_col + d_row @ w)
    return RegOutput(value, grad)


def selective_so(w, lam):
    """Soft orthogonality on whichever Gram product can reach identity.

    Tall matrices (rows > cols) get the column-Gram penalty; square and wide
    ones get the row-Gram penalty.
    """
    w = as_matrix(w, "w")
    lam = _check_lambda(lam)
    if w.shape[0] > w.shape[1]:
        return so(w, lam)
    d_row = gram(w.T) - np.eye(w.shape[0])
    return RegOutput(lam * frob_norm_sq(d_row), 4.0 * lam * (d_row @ w))


def mc(w, lam, off_diagonal_only=False):
    """Coherence surrogate: largest |entry| of W^T W - I.

    The diagonal is included by default, which also presses column norms
    toward one; ``off_diagonal_only`` restricts the max to distinct-column
    correlations. The subgradient routes through the active entry (i*, j*):
    column j* receives sign * w_i* and column i* receives sign * w_j*,
    accumulated once (doubled) when i* == j*.
    """
    w = as_matrix(w, "w")
    lam = _check_lambda(lam)
    n = w.shape[1]
    d = gram(w) - np.eye(n)
    mag = np.abs(d)
    if off_diagonal_only:
        if n < 2:
            return RegOutput(0.0, np.zeros_like(w))
        np.fill_diagonal(mag, -1.0)
    flat = int(np.argmax(mag))  # first max in row-major order
    i, j = divmod(flat, n)
    value = float(mag[i, j])
    sign = float(np.sign(d[i, j]))
    grad = np.zeros_like(w)
    grad[:, j] += sign * w[:, i]
    grad[:, i] += sign * w[:, j]
    return RegOutput(lam * value, lam * grad)


def srip(w, lam, mode=SripMode.EXACT, iters=2, seed=0):
    """Spectral-norm penalty on W^T W - I (the full-order isometry defect).

    EXACT mode uses the Jacobi eigensolver; POWER mode uses the seeded
    power-iteration estimate (2 rounds by default) and its final direction
    in place of the exact eigenvector. Either way the gradient is
    2 lambda sign * W v v^T for unit direction v.
    """
    w = as_matrix(w, "w")
    lam = _check_lambda(lam)
    mode = SripMode(mode)
    d = gram(w) - np.eye(w.shape[1])
    if mode is SripMode.EXACT:
        pair = sym_eig_dominant(d)
        sigma = abs(pair.value)
        sign = float(np.sign(pair.value))
        v = pair.vector
    else:
        try:
            sigma, v = power_iter_direction(d, iters=iters, seed=seed)
        except ZeroIterate:
            return RegOutput(0.0, np.zeros_like(w))
        sign = float(np.sign(v @ (d @ v)))
    if sign == 0.0:
        return RegOutput(lam * sigma, np.zeros_like(w))
    grad = (2.0 * lam * sign) * (w @ np.outer(v, v))
    return RegOutput(lam * sigma, grad)


def sr(w, lambda_s):
    """Half-squared spectral norm of W (comparison regularizer)."""
    w = as_matrix(w, "w")
    lam = _check_lambda(lambda_s)
    pair = sym_eig_dominant(gram(w))
    top = max(pair.value, 0.0)  # Gram spectrum is nonnegative up to roundoff
    grad = lam * (w @ np.outer(pair.vector, pair.vector))
    return RegOutput(0.5 * lam * top, grad)


def evaluate(kind, w, lam, options=None):
    """Uniform dispatch used by the trainer and the CLI."""
    kind = RegKind(kind)
    opts = options or RegOptions()
    if kind is RegKind.NONE:
        w = as_matrix(w, "w")
        return RegOutput(0.0, np.zeros_like(w))
    if kind is RegKind.SO:
        return so(w, lam)
    if kind is RegKind.DSO:
        return dso(w, lam)
    if kind is RegKind.SELECTIVE_SO:
        return selective_so(w, lam)
    if kind is RegKind.MC:
        return mc(w, lam, off_diagonal_only=opts.mc_off_diagonal_only)
    if kind is RegKind.SRIP:
        return srip(w, lam, mode=opts.srip_mode, iters=opts.srip_iters,
                    seed=opts.srip_seed)
    if kind is RegKind.SR:
        return sr(w, lam)
    raise ValueError(f"unhandled regularizer kind {kind}")
