"""Pure-Python (numpy) kernels: cyclic Jacobi eigensolver and subset scan.

This is the fallback twin of the compiled ``orthoreg._kernels`` extension.
Both implement the same arithmetic, rotation for rotation (the build passes
-ffp-contract=off so the C side cannot fuse multiply-adds); results agree to
machine precision, differing at most in the last bits of the sweep
termination test, whose summation order is backend-specific.
"""

import math

import numpy as np

BACKEND_NAME = "python"


def _rotate(a, v, p, q):
    """Apply one Jacobi rotation annihilating a[p, q] in place."""
    apq = a[p, q]
    app = a[p, p]
    aqq = a[q, q]
    theta = 0.5 * (aqq - app) / apq
    if abs(theta) > 1e100:
        t = 0.5 / theta
    else:
        t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
        if theta < 0.0:
            t = -t
    c = 1.0 / math.sqrt(t * t + 1.0)
    s = t * c

    col_p = a[:, p].copy()
    col_q = a[:, q].copy()
    new_p = c * col_p - s * col_q
    new_q = s * col_p + c * col_q
    a[:, p] = new_p
    a[p, :] = new_p
    a[:, q] = new_q
    a[q, :] = new_q
    a[p, p] = app - t * apq
    a[q, q] = aqq + t * apq
    a[p, q] = 0.0
    a[q, p] = 0.0

    if v is not None:
        vip = v[:, p].copy()
        viq = v[:, q].copy()
        v[:, p] = c * vip - s * viq
        v[:, q] = s * vip + c * viq


def _off_norm(a, n):
    """Frobenius norm of the off-diagonal part, summed in fixed row order."""
    total = 0.0
    for i in range(n - 1):
        row = a[i, i + 1:]
        total += float(row @ row)
    return math.sqrt(2.0 * total)


def jacobi_eigh(a, tol, max_sweeps, want_vectors):
    """Cyclic Jacobi diagonalization of a symmetric matrix.

    Returns (eigenvalues, eigenvectors-or-None, final off-diagonal Frobenius
    norm, sweeps used). Convergence means off-norm <= tol; the caller decides
    what to do when the sweep cap is hit first.
    """
    n = a.shape[0]
    work = np.array(a, dtype=np.float64, copy=True, order="C")
    vecs = np.eye(n) if want_vectors else None
    sweeps = 0
    off = _off_norm(work, n)
    while off > tol and sweeps < max_sweeps:
        for p in range(n - 1):
            for q in range(p + 1, n):
                if work[p, q] != 0.0:
                    _rotate(work, vecs, p, q)
        sweeps += 1
        off = _off_norm(work, n)
    return np.diag(work).copy(), vecs, off, sweeps


def _dominant_abs(sub, tol, max_sweeps):
    """Largest |eigenvalue| of a small symmetric matrix; (value, converged)."""
    vals, _, off, _ = jacobi_eigh(sub, tol, max_sweeps, False)
    return float(np.max(np.abs(vals))), off <= tol


def rip_enumerate(g, k, max_subsets, tol, max_sweeps):
    """Scan column subsets of size 1..k for the worst isometry defect.

    ``g`` is the Gram matrix W^T W. For every index subset S the score is the
    largest |eigenvalue| of g[S, S] - I. Subsets are visited by increasing
    cardinality, lexicographically within each size, stopping after
    ``max_subsets`` evaluations.

    Returns (delta, evaluated, complete, all_converged).
    """
    n = g.shape[0]
    delta = 0.0
    evaluated = 0
    all_converged = True
    for size in range(1, k + 1):
        if size == 1:
            # 1-subsets: |‖w_i‖² − 1| directly.
            for i in range(n):
                if evaluated >= max_subsets:
                    return delta, evaluated, False, all_converged
                score = abs(g[i, i] - 1.0)
                if score > delta:
                    delta = score
                evaluated += 1
            continue
        eye = np.eye(size)
        for subset in _combinations(n, size):
            if evaluated >= max_subsets:
                return delta, evaluated, False, all_converged
            sub = g[np.ix_(subset, subset)] - eye
            score, ok = _dominant_abs(sub, tol, max_sweeps)
            if not ok:
                all_converged = False
            if score > delta:
                delta = score
            evaluated += 1
    return delta, evaluated, True, all_converged


def _combinations(n, size):
    """Lexicographic size-subsets of range(n), as index lists."""
    idx = list(range(size))
    while True:
        yield idx
        # advance odometer
        j = size - 1
        while j >= 0 and idx[j] == n - size + j:
            j -= 1
        if j < 0:
            return
        idx[j] += 1
        for m in range(j + 1, size):
            idx[m] = idx[m - 1] + 1
