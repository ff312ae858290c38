"""Finite-difference validation of the analytic regularizer gradients.

Central differences with step h on every entry of W, compared against the
analytic gradient in relative Frobenius norm. The nonsmooth penalties (the
coherence max and the spectral norms) are checked away from their kink
points: a trial is skipped when the two leading candidate values (Gram
entries, |eigenvalues|, or Gram eigenvalues) are closer than a threshold
chosen so an h-sized parameter step cannot swap the active branch.
"""

from typing import NamedTuple

import numpy as np

from .linalg import gram, jacobi_spectrum
from .regularizers import RegKind, RegOptions, SripMode, evaluate

FD_STEP = 1e-6
# An h-step moves Gram entries / eigenvalues by up to ~2 h max|W|; ties
# closer than this could cross over inside the stencil and are skipped.
TIE_GAP = 2e-5


class CheckResult(NamedTuple):
    seed: int
    rel_err: float
    skipped: bool


def fd_gradient(func, w, h=FD_STEP):
    """Central-difference gradient of ``func`` at matrix ``w``."""
    grad = np.zeros_like(w)
    for r in range(w.shape[0]):
        for c in range(w.shape[1]):
            orig = w[r, c]
            w[r, c] = orig + h
            f_plus = func(w)
            w[r, c] = orig - h
            f_minus = func(w)
            w[r, c] = orig
            grad[r, c] = (f_plus - f_minus) / (2.0 * h)
    return grad


def relative_error(analytic, fd):
    denom = max(float(np.linalg.norm(fd)), 1e-8)
    return float(np.linalg.norm(analytic - fd)) / denom


def _near_tie(kind, w):
    """True when the penalty's active branch is ambiguous at this W."""
    kind = RegKind(kind)
    if kind in (RegKind.SO, RegKind.DSO, RegKind.SELECTIVE_SO, RegKind.NONE):
        return False
    g = gram(w)
    if kind is RegKind.MC:
        d = np.abs(g - np.eye(w.shape[1]))
        vals = d[np.triu_indices_from(d)]  # one value per unordered pair
        top2 = np.sort(vals)[-2:]
        return len(vals) >= 2 and top2[1] - top2[0] < TIE_GAP
    if kind is RegKind.SRIP:
        vals, _ = jacobi_spectrum(g - np.eye(w.shape[1]), want_vectors=False)
        mags = np.sort(np.abs(vals))[::-1]
        return len(mags) >= 2 and mags[0] - mags[1] < TIE_GAP
    if kind is RegKind.SR:
        vals, _ = jacobi_spectrum(g, want_vectors=False)
        return len(vals) >= 2 and vals[0] - vals[1] < TIE_GAP
    return False


def check_regularizer(kind, shape, seed, lam=1.0, h=FD_STEP,
                      options=None):
    """One seeded trial; returns (relative error, skipped flag)."""
    kind = RegKind(kind)
    opts = options or RegOptions(srip_mode=SripMode.EXACT)
    rng = np.random.default_rng(seed)
    w = rng.standard_normal(shape)
    if _near_tie(kind, w):
        return CheckResult(seed, float("nan"), True)
    analytic = evaluate(kind, w, lam, opts).grad
    fd = fd_gradient(lambda m: evaluate(kind, m, lam, opts).value, w, h=h)
    return CheckResult(seed, relative_error(analytic, fd), False)


def run_checks(kind, shape, seeds, lam=1.0, h=FD_STEP, options=None):
    """Seeded trial batch; returns the list of CheckResult."""
    return [check_regularizer(kind, shape, s, lam=lam, h=h, options=options)
            for s in range(seeds)]
