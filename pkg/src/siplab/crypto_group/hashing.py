"""The one-way function f and the password mask built on it."""

from __future__ import annotations

import hashlib

DIGEST_SIZE = 32


def hash_f(parts) -> bytes:
    """SHA-256 over the parts, each prefixed by its 4-byte big-endian length.

    ``str`` parts are UTF-8 encoded first.
    """
    h = hashlib.sha256()
    for part in parts:
        if isinstance(part, str):
            part = part.encode("utf-8")
        h.update(len(part).to_bytes(4, "big"))
        h.update(part)
    return h.digest()


def keystream(key_digest: bytes, length: int) -> bytes:
    if not key_digest:
        raise ValueError("key digest must be nonempty")
    blocks = []
    for counter in range(-(-length // DIGEST_SIZE)):
        blocks.append(hash_f([key_digest, counter.to_bytes(4, "big")]))
    return b"".join(blocks)[:length]


def _xor(a: bytes, b: bytes) -> bytes:
    return bytes(x ^ y for x, y in zip(a, b))


def mask(group, elem, key_digest: bytes) -> bytes:
    """XOR the element's fixed-width encoding with a keystream from ``key_digest``."""
    encoded = group.encode(elem)
    return _xor(encoded, keystream(key_digest, len(encoded)))


def unmask(group, masked: bytes, key_digest: bytes):
    """Inverse of :func:`mask`. Raises NotAGroupElement for a wrong key in most cases."""
    return group.decode(_xor(masked, keystream(key_digest, len(masked))))
