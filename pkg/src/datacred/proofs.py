"""Linked-data style proofs shared by credentials, presentations, registries,
and message envelopes.

One sign-over rule everywhere: the signature covers the canonical bytes of
the whole document with the proof block present but its ``signatureValue``
removed. Verifying re-derives exactly those bytes.

Timestamps are RFC 3339 UTC at second precision with a trailing ``Z``.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timezone

from .canonical import canonicalize
from .errors import MalformedSignature
from .keys import KeyPair, Signature, sign, verify_signature

PROOF_TYPE = "Ed25519Signature2018"
ASSERTION = "assertionMethod"
AUTHENTICATION = "authentication"

_TIMESTAMP_FORMAT = "%Y-%m-%dT%H:%M:%SZ"


def utc_now() -> datetime:
    return datetime.now(timezone.utc).replace(microsecond=0)


def format_timestamp(moment: datetime) -> str:
    if moment.tzinfo is None:
        moment = moment.replace(tzinfo=timezone.utc)
    return moment.astimezone(timezone.utc).strftime(_TIMESTAMP_FORMAT)


def parse_timestamp(text: str) -> datetime:
    return datetime.strptime(text, _TIMESTAMP_FORMAT).replace(tzinfo=timezone.utc)


@dataclass(frozen=True)
class Proof:
    """Signature block embedded in a signed JSON document."""

    created: str
    verification_method: str
    proof_purpose: str
    signature_value: str
    challenge: str | None = None
    type: str = PROOF_TYPE

    def to_json(self) -> dict:
        out = {
            "type": self.type,
            "created": self.created,
            "verificationMethod": self.verification_method,
            "proofPurpose": self.proof_purpose,
            "signatureValue": self.signature_value,
        }
        if self.challenge is not None:
            out["challenge"] = self.challenge
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "Proof":
        try:
            return cls(
                type=obj["type"],
                created=obj["created"],
                verification_method=obj["verificationMethod"],
                proof_purpose=obj["proofPurpose"],
                signature_value=obj["signatureValue"],
                challenge=obj.get("challenge"),
            )
        except KeyError as exc:
            raise MalformedSignature(f"proof missing field {exc}") from exc

    def signature(self) -> Signature:
        return Signature.from_base58(self.signature_value)


def signing_bytes(document: dict, proof_field: str = "proof") -> bytes:
    """Canonical bytes the proof signs: the document minus signatureValue."""
    stripped = dict(document)
    proof = dict(stripped.get(proof_field) or {})
    proof.pop("signatureValue", None)
    stripped[proof_field] = proof
    return canonicalize(stripped)


def attach_proof(
    document: dict,
    key: KeyPair,
    verification_method: str,
    proof_purpose: str,
    challenge: str | None = None,
    created: str | None = None,
    proof_field: str = "proof",
) -> dict:
    """Return a copy of document carrying a freshly computed proof."""
    proof = {
        "type": PROOF_TYPE,
        "created": created or format_timestamp(utc_now()),
        "verificationMethod": verification_method,
        "proofPurpose": proof_purpose,
    }
    if challenge is not None:
        proof["challenge"] = challenge
    signed = dict(document)
    signed[proof_field] = proof
    signature = sign(key, signing_bytes(signed, proof_field))
    signed[proof_field] = {**proof, "signatureValue": signature.to_base58()}
    return signed


def verify_proof(document: dict, public_key: bytes, proof_field: str = "proof") -> bool:
    """Check the document's proof against a public key.

    Returns False for a failed signature; raises MalformedSignature when the
    proof block itself is structurally unusable.
    """
    proof_obj = document.get(proof_field)
    if not isinstance(proof_obj, dict):
        raise MalformedSignature(f"document has no {proof_field} object")
    proof = Proof.from_json(proof_obj)
    return verify_signature(public_key, signing_bytes(document, proof_field), proof.signature())
