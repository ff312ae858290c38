"""Orthogonality regularization toolkit.

Penalties that press weight matrices toward orthogonal columns (soft
orthogonality, its double-sided and selective variants, a coherence
surrogate, and spectral isometry penalties), with analytic gradients, a
power-iteration spectral estimator, exact coherence/isometry analyzers, a
coefficient scheduler, and a deterministic desk-scale training harness.

Hot kernels (the Jacobi eigensolver and subset scans) run in a compiled
extension when available, with a pure-Python fallback selected at import;
``orthoreg.backend.BACKEND`` names the one in use.
"""

__version__ = "0.1.0"

from .backend import BACKEND
from .linalg import (EigPair, as_matrix, frob_norm_sq, gram, power_iter_sigma,
                     reshape_conv, singular_values, sym_eig_dominant)
from .regularizers import (RegKind, RegOptions, RegOutput, SripMode, dso,
                           evaluate, mc, selective_so, so, sr, srip)
from .schedule import ScheduleConfig, lambda_at, weight_decay_at
from .analysis import OrthoReport, mutual_coherence, rip_constant, report
from .data import Dataset, gen_blobs, split
from .trainer import (LayerSpec, TrainConfig, TrainRecord, init_orthogonal,
                      train)

__all__ = [
    "BACKEND", "Dataset", "EigPair", "LayerSpec", "OrthoReport", "RegKind",
    "RegOptions", "RegOutput", "ScheduleConfig", "SripMode", "TrainConfig",
    "TrainRecord", "as_matrix", "dso", "evaluate", "frob_norm_sq",
    "gen_blobs", "gram", "init_orthogonal", "lambda_at", "mc",
    "mutual_coherence", "power_iter_sigma", "report", "reshape_conv",
    "rip_constant", "selective_so", "singular_values", "so", "sr", "srip",
    "split", "sym_eig_dominant", "train", "weight_decay_at", "__version__",
]
