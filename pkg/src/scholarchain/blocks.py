"""Block structure, canonical header bytes, hashing and signatures.

The block hash is SHA-256 over the canonical header bytes; the proof-of-work
condition and the issuer signature both apply to exactly these bytes.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, replace

from .errors import PayloadInvalid
from .identity import KeyPair, verify_signature

GENESIS_PREV_HASH = bytes(32)

_HEADER_FMT = ">Q32s32s32sQIQ"
HEADER_SIZE = struct.calcsize(_HEADER_FMT)  # 124 bytes
SIGNATURE_SIZE = 64


@dataclass(frozen=True)
class BlockHeader:
    height: int
    prev_hash: bytes
    payload_hash: bytes
    issuer: str  # hex org id
    timestamp: int  # logical tick
    difficulty: int  # required leading zero bits
    nonce: int

    def with_nonce(self, nonce: int) -> "BlockHeader":
        return replace(self, nonce=nonce)


@dataclass(frozen=True)
class Block:
    header: BlockHeader
    payload_bytes: bytes  # canonical payload encoding, hashed into the header
    signature: bytes


def encode_header(header: BlockHeader) -> bytes:
    try:
        issuer_raw = bytes.fromhex(header.issuer)
    except ValueError:
        raise PayloadInvalid(f"issuer is not hex: {header.issuer!r}") from None
    if len(issuer_raw) != 32:
        raise PayloadInvalid("issuer must be a 32-byte digest")
    return struct.pack(
        _HEADER_FMT,
        header.height,
        header.prev_hash,
        header.payload_hash,
        issuer_raw,
        header.timestamp,
        header.difficulty,
        header.nonce,
    )


def decode_header(data: bytes) -> BlockHeader:
    if len(data) != HEADER_SIZE:
        raise PayloadInvalid("header bytes have wrong length")
    height, prev_hash, payload_hash, issuer_raw, timestamp, difficulty, nonce = struct.unpack(
        _HEADER_FMT, data
    )
    return BlockHeader(
        height=height,
        prev_hash=prev_hash,
        payload_hash=payload_hash,
        issuer=issuer_raw.hex(),
        timestamp=timestamp,
        difficulty=difficulty,
        nonce=nonce,
    )


def block_hash(header: BlockHeader) -> bytes:
    return hashlib.sha256(encode_header(header)).digest()


def payload_hash(payload_bytes: bytes) -> bytes:
    return hashlib.sha256(payload_bytes).digest()


def sign_block(header: BlockHeader, key: KeyPair) -> bytes:
    """Deterministic Ed25519 signature over the canonical header bytes."""
    return key.sign(encode_header(header))


def verify_block_signature(header: BlockHeader, signature: bytes, public_key: bytes) -> bool:
    return verify_signature(public_key, encode_header(header), signature)


def encode_block(block: Block) -> bytes:
    """Canonical block record: header bytes, signature, payload bytes."""
    if len(block.signature) != SIGNATURE_SIZE:
        raise PayloadInvalid("signature must be 64 bytes")
    return encode_header(block.header) + block.signature + block.payload_bytes


def decode_block(record: bytes) -> Block:
    if len(record) < HEADER_SIZE + SIGNATURE_SIZE:
        raise PayloadInvalid("block record too short")
    header = decode_header(record[:HEADER_SIZE])
    signature = record[HEADER_SIZE : HEADER_SIZE + SIGNATURE_SIZE]
    payload_bytes = record[HEADER_SIZE + SIGNATURE_SIZE :]
    return Block(header=header, payload_bytes=payload_bytes, signature=signature)
