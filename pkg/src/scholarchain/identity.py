"""Organization keys and anonymous student identifiers.

Organizations are identified by the SHA-256 digest of their Ed25519
verification key, rendered as 64 lowercase hex characters. Students are
identified by a random UUIDv4 only; no other identity data exists anywhere
in the system.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import uuid
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Optional

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)

from .errors import PayloadInvalid

MAX_DISPLAY_NAME_BYTES = 256

_UUID_RE = re.compile(
    r"^[0-9a-f]{8}-[0-9a-f]{4}-4[0-9a-f]{3}-[89ab][0-9a-f]{3}-[0-9a-f]{12}$"
)


def org_id_from_public_key(public_key: bytes) -> str:
    """Derive the hex org id from raw verification-key bytes."""
    return hashlib.sha256(public_key).hexdigest()


@dataclass(frozen=True)
class OrgIdentity:
    """Public registration data of a writing organization."""

    org_id: str
    display_name: str
    public_key: bytes

    def validate(self) -> None:
        if self.org_id != org_id_from_public_key(self.public_key):
            raise PayloadInvalid("org_id does not match public key digest")
        if not self.display_name:
            raise PayloadInvalid("display_name must be non-empty")
        if len(self.display_name.encode("utf-8")) > MAX_DISPLAY_NAME_BYTES:
            raise PayloadInvalid("display_name exceeds 256 bytes")


class KeyPair:
    """Ed25519 signing key plus its derived org id."""

    def __init__(self, seed: bytes):
        if len(seed) != 32:
            raise ValueError("seed must be 32 bytes")
        self._seed = seed
        self._private = Ed25519PrivateKey.from_private_bytes(seed)
        self.public_key = self._private.public_key().public_bytes_raw()
        self.org_id = org_id_from_public_key(self.public_key)

    @classmethod
    def generate(cls) -> "KeyPair":
        return cls(os.urandom(32))

    @classmethod
    def from_string_seed(cls, label: str) -> "KeyPair":
        """Deterministic key from a label; used by the simulator and tests."""
        return cls(hashlib.sha256(label.encode("utf-8")).digest())

    def sign(self, message: bytes) -> bytes:
        return self._private.sign(message)

    def save(self, path: str | Path, display_name: str = "") -> None:
        data = {
            "secret_seed": self._seed.hex(),
            "public_key": self.public_key.hex(),
            "org_id": self.org_id,
        }
        if display_name:
            data["display_name"] = display_name
        Path(path).write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "KeyPair":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(bytes.fromhex(data["secret_seed"]))


@lru_cache(maxsize=4096)
def _public_key_obj(public_key: bytes) -> Ed25519PublicKey:
    return Ed25519PublicKey.from_public_bytes(public_key)


@lru_cache(maxsize=65536)
def verify_signature(public_key: bytes, message: bytes, signature: bytes) -> bool:
    """Check an Ed25519 signature; results are memoized because chain replay
    re-verifies the same blocks many times."""
    try:
        _public_key_obj(public_key).verify(signature, message)
        return True
    except (InvalidSignature, ValueError):
        return False


def new_student_id(rng=None) -> str:
    """Fresh anonymous student id in lowercase hyphenated UUIDv4 form.

    ``rng`` may be a seeded ``random.Random`` for reproducible simulations;
    by default the OS entropy source is used.
    """
    if rng is None:
        raw = bytearray(os.urandom(16))
    else:
        raw = bytearray(rng.getrandbits(8) for _ in range(16))
    raw[6] = (raw[6] & 0x0F) | 0x40  # version 4
    raw[8] = (raw[8] & 0x3F) | 0x80  # variant 10
    return str(uuid.UUID(bytes=bytes(raw)))


def is_valid_student_id(text: str) -> bool:
    return bool(_UUID_RE.match(text))


def require_student_id(text: str) -> str:
    if not is_valid_student_id(text):
        raise PayloadInvalid(f"not a lowercase UUIDv4: {text!r}")
    return text


def is_hex_digest(text: str) -> bool:
    return len(text) == 64 and all(c in "0123456789abcdef" for c in text)
