"""Orthogonality diagnostics for a weight matrix.

``mutual_coherence`` is the exact worst normalized correlation between
distinct columns. ``rip_constant`` measures how far every set of at most k
columns is from an orthogonal system, by exhaustive subset enumeration
(definitionally exact, with an explicit combinatorial budget). ``report``
bundles the diagnostics with the singular-value spread and column-norm
statistics, and serializes to CSV or key: value text.
"""

import math
from dataclasses import dataclass

import numpy as np

from .backend import kernels
from .errors import BudgetExceeded, NoConvergence, ZeroColumn
from .linalg import (JACOBI_MAX_SWEEPS, JACOBI_TOL, as_matrix, gram,
                     singular_values, sym_eig_dominant)

RIP_BUDGET = 10 ** 6


@dataclass(frozen=True)
class OrthoReport:
    mutual_coherence: float
    srip_sigma: float
    singular_values: np.ndarray
    col_norm_min: float
    col_norm_max: float
    col_norm_mean: float
    rip_constants: dict
    partial: bool = False


def mutual_coherence(w):
    """Largest |<w_i, w_j>| / (||w_i|| ||w_j||) over distinct columns."""
    w = as_matrix(w, "w")
    n = w.shape[1]
    if n < 2:
        raise ValueError("mutual coherence needs at least 2 columns")
    norms = np.sqrt(np.sum(w * w, axis=0))
    if np.min(norms) <= 1e-300:
        raise ZeroColumn(f"column {int(np.argmin(norms))} has zero norm")
    g = np.abs(gram(w)) / np.outer(norms, norms)
    np.fill_diagonal(g, 0.0)
    # clamp Cauchy-Schwarz roundoff so the value stays in [0, 1]
    return float(min(1.0, np.max(g)))


def subset_count(n, k):
    """Number of column subsets of size 1..k."""
    return sum(math.comb(n, j) for j in range(1, k + 1))


def rip_constant(w, k, budget=RIP_BUDGET):
    """Isometry constant over all column subsets of size at most k.

    Exhaustive: for each subset S the score is the largest |eigenvalue| of
    W_S^T W_S - I, and the constant is the max over subsets. Subsets are
    scanned by increasing cardinality, so when the combinatorial budget is
    exceeded the raised BudgetExceeded still carries the best lower bound
    found so far.
    """
    w = as_matrix(w, "w")
    n = w.shape[1]
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    g = gram(w)
    total = subset_count(n, k)
    delta, evaluated, complete, converged = kernels.rip_enumerate(
        g, k, budget, JACOBI_TOL, JACOBI_MAX_SWEEPS)
    if not converged:
        raise NoConvergence("a subset eigensolve hit the sweep cap")
    if not complete:
        raise BudgetExceeded(
            f"subset budget {budget} exceeded ({evaluated} of {total} "
            f"evaluated); partial lower bound {delta!r}",
            partial=delta, evaluated=evaluated)
    return float(delta)


def report(w, ks, budget=RIP_BUDGET):
    """Full diagnostic report; ``ks`` selects the isometry orders to scan.

    If a k exceeds the budget its constant is the partial lower bound and
    the report is flagged partial.
    """
    w = as_matrix(w, "w")
    n = w.shape[1]
    coherence = mutual_coherence(w)
    sigma = abs(sym_eig_dominant(gram(w) - np.eye(n)).value)
    svals = singular_values(w)
    norms = np.sqrt(np.sum(w * w, axis=0))
    rip = {}
    partial = False
    for k in sorted(set(int(k) for k in ks)):
        try:
            rip[k] = rip_constant(w, k, budget=budget)
        except BudgetExceeded as exc:
            rip[k] = float(exc.partial)
            partial = True
    return OrthoReport(
        mutual_coherence=coherence,
        srip_sigma=float(sigma),
        singular_values=svals,
        col_norm_min=float(np.min(norms)),
        col_norm_max=float(np.max(norms)),
        col_norm_mean=float(np.mean(norms)),
        rip_constants=rip,
        partial=partial,
    )


def report_rows(rep):
    """(name, value) pairs in a fixed order."""
    rows = [
        ("mutual_coherence", rep.mutual_coherence),
        ("srip_sigma", rep.srip_sigma),
        ("col_norm_min", rep.col_norm_min),
        ("col_norm_max", rep.col_norm_max),
        ("col_norm_mean", rep.col_norm_mean),
    ]
    rows.extend((f"singular_value_{i}", float(v))
                for i, v in enumerate(rep.singular_values))
    rows.extend((f"rip_delta_k{k}", rep.rip_constants[k])
                for k in sorted(rep.rip_constants))
    rows.append(("partial", float(rep.partial)))
    return rows


def report_csv(rep):
    return "".join(f"{name},{value!r}\n" for name, value in report_rows(rep))


def report_text(rep):
    return "".join(f"{name}: {value!r}\n" for name, value in report_rows(rep))
