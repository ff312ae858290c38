# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: cyclic Jacobi eigensolver and subset scan.

Hot-loop twin of orthoreg._kernels_py; see that module for the contract.
The rotation arithmetic matches the Python fallback operation for
operation (built with -ffp-contract=off, so no FMA contraction).
"""

from libc.math cimport sqrt, fabs

import numpy as np
cimport numpy as cnp

cnp.import_array()

BACKEND_NAME = "compiled"


cdef void _rotate(double[:, ::1] a, double[:, ::1] v, Py_ssize_t n,
                  Py_ssize_t p, Py_ssize_t q, bint want_vectors) noexcept nogil:
    cdef double apq = a[p, q]
    cdef double app = a[p, p]
    cdef double aqq = a[q, q]
    cdef double theta = 0.5 * (aqq - app) / apq
    cdef double t, c, s, aip, aiq, vip, viq
    cdef Py_ssize_t i
    if fabs(theta) > 1e100:
        t = 0.5 / theta
    else:
        t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
        if theta < 0.0:
            t = -t
    c = 1.0 / sqrt(t * t + 1.0)
    s = t * c

    for i in range(n):
        if i == p or i == q:
            continue
        aip = a[i, p]
        aiq = a[i, q]
        a[i, p] = c * aip - s * aiq
        a[p, i] = a[i, p]
        a[i, q] = s * aip + c * aiq
        a[q, i] = a[i, q]
    a[p, p] = app - t * apq
    a[q, q] = aqq + t * apq
    a[p, q] = 0.0
    a[q, p] = 0.0

    if want_vectors:
        for i in range(n):
            vip = v[i, p]
            viq = v[i, q]
            v[i, p] = c * vip - s * viq
            v[i, q] = s * vip + c * viq


cdef double _off_norm(double[:, ::1] a, Py_ssize_t n) noexcept nogil:
    cdef double total = 0.0, row
    cdef Py_ssize_t i, j
    for i in range(n - 1):
        row = 0.0
        for j in range(i + 1, n):
            row += a[i, j] * a[i, j]
        total += row
    return sqrt(2.0 * total)


cdef int _jacobi_core(double[:, ::1] work, double[:, ::1] vecs, Py_ssize_t n,
                      double tol, int max_sweeps, bint want_vectors,
                      double* off_out) noexcept nogil:
    cdef int sweeps = 0
    cdef Py_ssize_t p, q
    cdef double off = _off_norm(work, n)
    while off > tol and sweeps < max_sweeps:
        for p in range(n - 1):
            for q in range(p + 1, n):
                if work[p, q] != 0.0:
                    _rotate(work, vecs, n, p, q, want_vectors)
        sweeps += 1
        off = _off_norm(work, n)
    off_out[0] = off
    return sweeps


def jacobi_eigh(a, double tol, int max_sweeps, bint want_vectors):
    """Cyclic Jacobi diagonalization; see _kernels_py.jacobi_eigh."""
    work = np.array(a, dtype=np.float64, copy=True, order="C")
    cdef Py_ssize_t n = work.shape[0]
    vecs = np.eye(n)
    cdef double[:, ::1] workv = work
    cdef double[:, ::1] vecsv = vecs
    cdef double off = 0.0
    cdef int sweeps
    with nogil:
        sweeps = _jacobi_core(workv, vecsv, n, tol, max_sweeps,
                              want_vectors, &off)
    values = np.diag(work).copy()
    return values, (vecs if want_vectors else None), off, sweeps


def rip_enumerate(g, int k, long long max_subsets, double tol, int max_sweeps):
    """Worst isometry defect over column subsets; see _kernels_py.rip_enumerate."""
    cdef cnp.ndarray[double, ndim=2] gram = np.ascontiguousarray(g, dtype=np.float64)
    cdef Py_ssize_t n = gram.shape[0]
    cdef double[:, ::1] gv = gram
    cdef double[:, ::1] subv
    cdef long long[::1] iv = np.zeros(max(k, 1), dtype=np.int64)
    cdef double delta = 0.0, score, off
    cdef long long evaluated = 0
    cdef bint all_converged = True
    cdef Py_ssize_t size, i, j, m, jj

    for size in range(1, k + 1):
        if size == 1:
            for i in range(n):
                if evaluated >= max_subsets:
                    return delta, evaluated, False, all_converged
                score = fabs(gv[i, i] - 1.0)
                if score > delta:
                    delta = score
                evaluated += 1
            continue
        subv = np.zeros((size, size))
        # lexicographic odometer over size-subsets of range(n)
        for i in range(size):
            iv[i] = i
        while True:
            if evaluated >= max_subsets:
                return delta, evaluated, False, all_converged
            for i in range(size):
                for j in range(size):
                    subv[i, j] = gv[iv[i], iv[j]]
                subv[i, i] = subv[i, i] - 1.0
            with nogil:
                _jacobi_core(subv, subv, size, tol, max_sweeps, False, &off)
            if off > tol:
                all_converged = False
            score = 0.0
            for i in range(size):
                if fabs(subv[i, i]) > score:
                    score = fabs(subv[i, i])
            if score > delta:
                delta = score
            evaluated += 1
            # advance odometer
            jj = size - 1
            while jj >= 0 and iv[jj] == n - size + jj:
                jj -= 1
            if jj < 0:
                break
            iv[jj] += 1
            for m in range(jj + 1, size):
                iv[m] = iv[m - 1] + 1
    return delta, evaluated, True, all_converged
