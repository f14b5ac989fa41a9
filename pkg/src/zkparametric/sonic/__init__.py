"""The argument system: transcript, proofs, provers and verifiers."""

from .bundles import BundleError, DataSourceBundle, SourcePublic, data_poly, make_bundle
from .proof import SonicProof
from .protocol import (
    CircuitCommitments,
    LayoutError,
    ProofError,
    commit_circuit,
    prove_basic,
    prove_batched,
    prove_with_data,
    verify,
    verify_basic,
    verify_batched,
    verify_with_data,
)
from .transcript import Transcript

__all__ = [
    "BundleError",
    "CircuitCommitments",
    "DataSourceBundle",
    "LayoutError",
    "ProofError",
    "SonicProof",
    "SourcePublic",
    "Transcript",
    "commit_circuit",
    "data_poly",
    "make_bundle",
    "prove_basic",
    "prove_batched",
    "prove_with_data",
    "verify",
    "verify_basic",
    "verify_batched",
    "verify_with_data",
]
