"""Dense linear-algebra primitives.

Matrices are 2-D float64 numpy arrays, row-major, with every entry finite;
``as_matrix`` is the validating constructor used at API boundaries. A
"column vector" is a 1-D array. Convolution kernels are 4-D arrays indexed
(filter width, filter height, input channels, output channels), the last
axis fastest-varying.

The exact symmetric eigensolver is a cyclic Jacobi iteration (off-diagonal
Frobenius norm driven to <= 1e-12, at most 100 sweeps), dispatched to the
active kernel backend. The spectral estimator performs rounds of

    u <- A v,  v <- A u,  sigma <- ||v|| / ||u||

from a seeded random unit start, which never overshoots the true spectral
norm.
"""

from typing import NamedTuple, Optional

import numpy as np

from .backend import kernels
from .errors import NoConvergence, NotSymmetric, ZeroIterate

JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
SYMMETRY_TOL = 1e-12
ZERO_NORM = 1e-300


class EigPair(NamedTuple):
    value: float
    vector: np.ndarray


def as_matrix(a, name="matrix"):
    """Validate and return ``a`` as a 2-D float64 C-contiguous array."""
    m = np.ascontiguousarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got ndim={m.ndim}")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"{name} must have positive dimensions, got {m.shape}")
    if not np.isfinite(m).all():
        raise ValueError(f"{name} contains non-finite entries")
    return m


def as_conv_tensor(c, name="conv tensor"):
    """Validate and return ``c`` as a 4-D float64 C-contiguous array."""
    t = np.ascontiguousarray(c, dtype=np.float64)
    if t.ndim != 4:
        raise ValueError(f"{name} must be 4-D (S, H, C, M), got ndim={t.ndim}")
    if min(t.shape) < 1:
        raise ValueError(f"{name} must have positive dimensions, got {t.shape}")
    if not np.isfinite(t).all():
        raise ValueError(f"{name} contains non-finite entries")
    return t


def gram(w):
    """W^T W with exact symmetry: the upper triangle is mirrored down."""
    w = as_matrix(w, "w")
    g = w.T @ w
    return np.triu(g) + np.triu(g, 1).T


def reshape_conv(c):
    """Flatten a (S, H, C, M) kernel into a (S*H*C) x M matrix.

    Row r corresponds to the (s, h, c) index with c fastest-varying, so
    column j collects the j-th filter; element multiset and Frobenius norm
    are preserved exactly.
    """
    t = as_conv_tensor(c)
    s, h, ch, m = t.shape
    return t.reshape(s * h * ch, m)


def frob_norm_sq(a):
    """Sum of squared entries."""
    a = np.asarray(a, dtype=np.float64)
    return float(np.sum(a * a))


def _check_symmetric(a):
    a = as_matrix(a, "a")
    if a.shape[0] != a.shape[1]:
        raise NotSymmetric(f"matrix is {a.shape[0]}x{a.shape[1]}, not square")
    dev = float(np.max(np.abs(a - a.T))) if a.shape[0] > 1 else 0.0
    if dev > SYMMETRY_TOL:
        raise NotSymmetric(f"asymmetry {dev:.3e} exceeds {SYMMETRY_TOL:.0e}")
    return a


def jacobi_spectrum(a, want_vectors=True):
    """Full spectrum of a symmetric matrix by cyclic Jacobi.

    Returns (values, vectors) with eigenvalues in descending order and
    eigenvectors as matching columns (or None). Raises NoConvergence if the
    sweep cap is hit before the off-diagonal tolerance.
    """
    a = _check_symmetric(a)
    values, vectors, off, sweeps = kernels.jacobi_eigh(
        a, JACOBI_TOL, JACOBI_MAX_SWEEPS, want_vectors)
    if off > JACOBI_TOL:
        raise NoConvergence(
            f"off-diagonal norm {off:.3e} after {sweeps} sweeps")
    order = np.argsort(-values, kind="stable")
    values = values[order]
    if want_vectors:
        vectors = vectors[:, order]
    return values, vectors


def sym_eig_dominant(a):
    """Eigenpair of largest |eigenvalue| of a symmetric matrix.

    The eigenvector is unit-norm with its largest-magnitude component made
    positive, so repeated calls agree bit for bit.
    """
    a = _check_symmetric(a)
    values, vectors, off, sweeps = kernels.jacobi_eigh(
        a, JACOBI_TOL, JACOBI_MAX_SWEEPS, True)
    if off > JACOBI_TOL:
        raise NoConvergence(
            f"off-diagonal norm {off:.3e} after {sweeps} sweeps")
    idx = int(np.argmax(np.abs(values)))
    vec = vectors[:, idx].copy()
    peak = int(np.argmax(np.abs(vec)))
    if vec[peak] < 0.0:
        vec = -vec
    return EigPair(float(values[idx]), vec)


def singular_values(w):
    """Descending singular values of ``w`` via the Gram-matrix spectrum."""
    values, _ = jacobi_spectrum(gram(w), want_vectors=False)
    return np.sqrt(np.maximum(values, 0.0))


def start_vector(n, seed):
    """Seeded random unit vector, uniform on the sphere."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    norm = float(np.linalg.norm(v))
    while norm < ZERO_NORM:  # astronomically unlikely
        v = rng.standard_normal(n)
        norm = float(np.linalg.norm(v))
    return v / norm


def power_iter_direction(a, iters=2, seed=0, start=None):
    """Spectral-norm estimate of a symmetric matrix with its final iterate.

    Runs ``iters`` rounds of u <- A v, v <- A u; the estimate ||v|| / ||u||
    comes from the last round and the returned direction is the final v,
    unit-normalized. The ratio is invariant to the iterate's scale, so u is
    normalized before the second multiply; this leaves the estimate
    unchanged while keeping huge spectra clear of overflow.

    ``start`` warm-starts the iteration in place of the seeded random unit
    vector. Raises ZeroIterate when the iterate collapses (A is numerically
    zero along it); callers treat that as sigma == 0.
    """
    a = _check_symmetric(a)
    n = a.shape[0]
    if iters < 1:
        raise ValueError("iters must be >= 1")
    if start is not None:
        v = np.asarray(start, dtype=np.float64).reshape(n).copy()
        norm = float(np.linalg.norm(v))
        if norm < ZERO_NORM:
            raise ValueError("start vector has zero norm")
        v /= norm
    else:
        v = start_vector(n, seed)
    sigma = 0.0
    for _ in range(iters):
        u = a @ v
        nu = float(np.linalg.norm(u))
        if nu < ZERO_NORM:
            raise ZeroIterate("iterate vanished; matrix is numerically zero")
        u = u / nu
        v = a @ u
        sigma = float(np.linalg.norm(v))  # == ||v|| / ||u|| for unit u
        if sigma < ZERO_NORM:
            raise ZeroIterate("iterate vanished; matrix is numerically zero")
        v = v / sigma
    return sigma, v


def power_iter_sigma(a, iters=2, seed=0, start=None):
    """Power-iteration estimate of sigma(A) for symmetric A.

    Always a lower bound on the true spectral norm (up to roundoff). Raises
    ZeroIterate for numerically zero matrices; callers treat sigma as 0.
    """
    sigma, _ = power_iter_direction(a, iters=iters, seed=seed, start=start)
    return sigma
