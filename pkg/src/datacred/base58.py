"""Base58 encoding with the Bitcoin alphabet.

Used for public keys and signature values embedded in JSON documents.
"""

from __future__ import annotations

ALPHABET = "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz"
_INDEX = {c: i for i, c in enumerate(ALPHABET)}


def b58encode(data: bytes) -> str:
    num = int.from_bytes(data, "big")
    encoded = ""
    while num:
        num, rem = divmod(num, 58)
        encoded = ALPHABET[rem] + encoded
    pad = 0
    for byte in data:
        if byte:
            break
        pad += 1
    return ALPHABET[0] * pad + encoded


def b58decode(text: str) -> bytes:
    num = 0
    for char in text:
        if char not in _INDEX:
            raise ValueError(f"invalid base58 character {char!r}")
        num = num * 58 + _INDEX[char]
    body = num.to_bytes((num.bit_length() + 7) // 8, "big") if num else b""
    pad = 0
    for char in text:
        if char != ALPHABET[0]:
            break
        pad += 1
    return b"\x00" * pad + body
