"""datacred: verifiable credentials for published datasets.

Publishers fingerprint a dataset, issue signed credentials about it under a
resolvable identifier, and can revoke them later; users verify credentials
offline from a distribution bundle or live via agent-to-agent proof
exchange with challenge nonces.
"""

from .canonical import canonicalize
from .credential import (
    DATASET_PROVENANCE_V1,
    CredentialSchema,
    CredentialStatus,
    RevocationRegistry,
    SchemaAttribute,
    VerifiableCredential,
    check_binding_claim,
    issue_credential,
    new_registry,
    revoke,
    verify_credential,
)
from .did import Did, DidDocument, VerificationMethod, did_web_url, generate_did_key, parse_did
from .errors import DatacredError
from .fingerprint import (
    DatasetFingerprint,
    check_binding,
    fingerprint_bytes,
    fingerprint_path,
    fingerprint_tree,
)
from .keys import KeyPair, Signature, generate_keypair, sign, verify_signature
from .presentation import (
    VerifiablePresentation,
    create_presentation,
    new_challenge,
    verify_presentation,
)
from .resolver import Resolver
from .wallet import Wallet

__all__ = [
    "DATASET_PROVENANCE_V1",
    "CredentialSchema",
    "CredentialStatus",
    "DatacredError",
    "DatasetFingerprint",
    "Did",
    "DidDocument",
    "KeyPair",
    "Resolver",
    "RevocationRegistry",
    "SchemaAttribute",
    "Signature",
    "VerifiableCredential",
    "VerifiablePresentation",
    "VerificationMethod",
    "Wallet",
    "canonicalize",
    "check_binding",
    "check_binding_claim",
    "create_presentation",
    "did_web_url",
    "fingerprint_bytes",
    "fingerprint_path",
    "fingerprint_tree",
    "generate_did_key",
    "generate_keypair",
    "issue_credential",
    "new_challenge",
    "new_registry",
    "parse_did",
    "revoke",
    "sign",
    "verify_credential",
    "verify_presentation",
    "verify_signature",
]

__version__ = "0.1.0"
