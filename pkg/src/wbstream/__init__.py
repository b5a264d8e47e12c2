"""Turnstile stream recovery that stays correct against white-box adversaries.

Every recovery path pairs a fast solver with a lattice (SIS) fingerprint of the
stream, so a wrong guess from the solver is caught and reported as
``NOT_IN_CLASS`` instead of returned.
"""
from .errors import (
    BoundsError,
    BudgetError,
    CapacityError,
    IntegrityError,
    MergeError,
    ParameterError,
    SketchStateError,
    StreamParseError,
    UpdateError,
    VerifyError,
    WbStreamError,
)
from .lowrank import (
    MatrixRecoverer,
    RankDecision,
    SolverConfig,
    nuclear_min,
    rank_decision,
    recover_matrix,
)
from .matching import EdgeUpdate, LargerThan, MatchingSketch, MaximumMatching, max_matching
from .oracle import MatrixId, OracleTag, bernoulli_column, gaussian_column, sis_column
from .outcome import RecoveryOutcome, Verdict
from .params import SketchParams, choose_modulus, signed_residue
from .rpca import RpcaDecomposition, RpcaRecoverer, pcp_solve, rpca_recover
from .sketch import RealSketch, SisSketch, StreamUpdate, merge, update, verify
from .sparse import (
    DetState,
    L0Estimator,
    SparseRecoverer,
    SparseVector,
    det_decode,
    enumerate_recover,
    estimate_l0,
    fast_recover,
)
from .streamio import parse_stream, serialize_stream
from .tensor import CpFactors, TensorRecoverer, cp_fit, recover_tensor

__version__ = "0.1.0"

__all__ = sorted(
    name for name, obj in globals().items()
    if not name.startswith("_") and not isinstance(obj, type(errors))
)
