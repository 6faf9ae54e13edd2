"""Encrypted wallet round-trips and failure modes."""

import base64
import json

import pytest

from datacred.errors import CorruptWallet, NoSuchEntry, WrongPassphrase
from datacred.keys import generate_keypair
from datacred.wallet import Wallet


def test_roundtrip(tmp_path):
    path = tmp_path / "w.json"
    keypair = generate_keypair()
    wallet = Wallet.open(path, "pw")
    wallet.put("issuer-key", keypair)
    wallet.put("note", {"any": "credential", "shape": ["works", 1]})
    wallet.save()

    reopened = Wallet.open(path, "pw")
    assert reopened.get("issuer-key") == keypair
    assert reopened.get("note") == {"any": "credential", "shape": ["works", 1]}
    assert reopened.list() == ["issuer-key", "note"]
    assert reopened.wallet_id == wallet.wallet_id


def test_wrong_passphrase(tmp_path):
    path = tmp_path / "w.json"
    wallet = Wallet.open(path, "right")
    wallet.put("k", generate_keypair())
    wallet.save()
    with pytest.raises(WrongPassphrase):
        Wallet.open(path, "wrong")


def test_missing_entry(tmp_path):
    wallet = Wallet.open(tmp_path / "w.json", "pw")
    with pytest.raises(NoSuchEntry):
        wallet.get("absent")
    with pytest.raises(NoSuchEntry):
        wallet.remove("absent")


def test_open_absent_file_creates_empty(tmp_path):
    wallet = Wallet.open(tmp_path / "new.json", "pw")
    assert wallet.list() == []


def test_corrupt_envelope(tmp_path):
    path = tmp_path / "w.json"
    Wallet.open(path, "pw").save()
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(CorruptWallet):
        Wallet.open(path, "pw")

    Wallet.open(tmp_path / "w2.json", "pw").save()
    envelope = json.loads((tmp_path / "w2.json").read_text())
    del envelope["salt"]
    (tmp_path / "w2.json").write_text(json.dumps(envelope))
    with pytest.raises(CorruptWallet):
        Wallet.open(tmp_path / "w2.json", "pw")


def test_tampered_ciphertext_detected(tmp_path):
    path = tmp_path / "w.json"
    wallet = Wallet.open(path, "pw")
    wallet.put("k", generate_keypair())
    wallet.save()
    envelope = json.loads(path.read_text())
    raw = bytearray(base64.b64decode(envelope["ciphertext"]))
    raw[0] ^= 0xFF
    envelope["ciphertext"] = base64.b64encode(bytes(raw)).decode()
    path.write_text(json.dumps(envelope))
    with pytest.raises(WrongPassphrase):
        Wallet.open(path, "pw")


def test_no_plaintext_key_material_on_disk(tmp_path):
    path = tmp_path / "w.json"
    wallet = Wallet.open(path, "pw")
    keypairs = [generate_keypair() for _ in range(8)]
    for index, keypair in enumerate(keypairs):
        wallet.put(f"key-{index}", keypair)
    wallet.save()
    raw = path.read_bytes()
    for keypair in keypairs:
        assert keypair.private_key not in raw
        assert keypair.private_key.hex().encode() not in raw
        # base58 form is what the entry serialization itself uses
        from datacred.base58 import b58encode

        assert b58encode(keypair.private_key).encode() not in raw


def test_save_then_update_then_reload(tmp_path):
    path = tmp_path / "w.json"
    wallet = Wallet.open(path, "pw")
    wallet.put("a", {"v": 1})
    wallet.save()
    wallet.put("b", {"v": 2})
    wallet.remove("a")
    wallet.save()
    reopened = Wallet.open(path, "pw")
    assert reopened.list() == ["b"]


def test_save_leaves_no_temp_file(tmp_path):
    path = tmp_path / "w.json"
    wallet = Wallet.open(path, "pw")
    wallet.save()
    assert [p.name for p in tmp_path.iterdir()] == ["w.json"]
