"""Ed25519 key generation, signing, and verification.

The only signature suite in this toolkit is Ed25519 (fixed by the
``Ed25519VerificationKey2018`` verification-method type used throughout).
Keys are 32-byte seeds/points; signatures are 64 bytes, carried in
documents as base58 strings.
"""

from __future__ import annotations

from dataclasses import dataclass

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives import serialization
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)

from .base58 import b58decode, b58encode
from .errors import BadSeedLength, MalformedKey, MalformedSignature

SEED_LENGTH = 32
PUBLIC_KEY_LENGTH = 32
SIGNATURE_LENGTH = 64


@dataclass(frozen=True)
class KeyPair:
    """An Ed25519 keypair as raw 32-byte seed and derived public key."""

    public_key: bytes
    private_key: bytes

    def __post_init__(self) -> None:
        derived = _derive_public(self.private_key)
        if derived != self.public_key:
            raise MalformedKey("public key does not match the private seed")

    @property
    def public_key_base58(self) -> str:
        return b58encode(self.public_key)

    def to_json(self) -> dict:
        return {
            "publicKeyBase58": self.public_key_base58,
            "privateKeyBase58": b58encode(self.private_key),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "KeyPair":
        return cls(
            public_key=b58decode(obj["publicKeyBase58"]),
            private_key=b58decode(obj["privateKeyBase58"]),
        )


@dataclass(frozen=True)
class Signature:
    """A 64-byte Ed25519 signature."""

    value: bytes

    def __post_init__(self) -> None:
        if len(self.value) != SIGNATURE_LENGTH:
            raise MalformedSignature(
                f"signature must be {SIGNATURE_LENGTH} bytes, got {len(self.value)}"
            )

    def to_base58(self) -> str:
        return b58encode(self.value)

    @classmethod
    def from_base58(cls, text: str) -> "Signature":
        try:
            raw = b58decode(text)
        except ValueError as exc:
            raise MalformedSignature(str(exc)) from exc
        return cls(raw)


def _derive_public(seed: bytes) -> bytes:
    if len(seed) != SEED_LENGTH:
        raise BadSeedLength(f"seed must be {SEED_LENGTH} bytes, got {len(seed)}")
    private = Ed25519PrivateKey.from_private_bytes(seed)
    return private.public_key().public_bytes(
        encoding=serialization.Encoding.Raw,
        format=serialization.PublicFormat.Raw,
    )


def generate_keypair(seed: bytes | None = None) -> KeyPair:
    """Create a keypair; deterministic when a 32-byte seed is supplied."""
    if seed is None:
        private = Ed25519PrivateKey.generate()
        seed = private.private_bytes(
            encoding=serialization.Encoding.Raw,
            format=serialization.PrivateFormat.Raw,
            encryption_algorithm=serialization.NoEncryption(),
        )
    return KeyPair(public_key=_derive_public(seed), private_key=seed)


def sign(key: KeyPair, message: bytes) -> Signature:
    """Sign message bytes; deterministic for a fixed (key, message)."""
    private = Ed25519PrivateKey.from_private_bytes(key.private_key)
    return Signature(private.sign(message))


def verify_signature(public_key: bytes, message: bytes, sig: Signature | bytes) -> bool:
    """True iff sig is a valid Ed25519 signature on message under public_key.

    Structurally bad inputs raise MalformedKey / MalformedSignature rather
    than reporting a (false) rejection.
    """
    if isinstance(sig, Signature):
        raw = sig.value
    else:
        raw = sig
        if len(raw) != SIGNATURE_LENGTH:
            raise MalformedSignature(
                f"signature must be {SIGNATURE_LENGTH} bytes, got {len(raw)}"
            )
    if len(public_key) != PUBLIC_KEY_LENGTH:
        raise MalformedKey(
            f"public key must be {PUBLIC_KEY_LENGTH} bytes, got {len(public_key)}"
        )
    try:
        point = Ed25519PublicKey.from_public_bytes(public_key)
    except ValueError as exc:
        raise MalformedKey(str(exc)) from exc
    try:
        point.verify(raw, message)
        return True
    except InvalidSignature:
        return False
