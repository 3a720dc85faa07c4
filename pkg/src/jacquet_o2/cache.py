"""Binary envelope for cached transversals and fiber data.

Layout: magic, version, q, n, name, generator hash, count, payload of
packed 128-bit codes (two little-endian int64 words each), then a sha256
checksum over everything before it.  Any header mismatch is a miss.
"""
from __future__ import annotations

import hashlib
import os
import struct
from pathlib import Path

import numpy as np

MAGIC = b"O2TV"
VERSION = 1
ENV_VAR = "JACQUET_O2_CACHE"


def default_cache_dir():
    d = os.environ.get(ENV_VAR)
    return Path(d) if d else None


def resolve(cache_dir):
    """None means the environment default; False disables caching."""
    if cache_dir is False:
        return None
    return Path(cache_dir) if cache_dir is not None else default_cache_dir()


def generator_hash(generators) -> str:
    g = np.ascontiguousarray(np.asarray(generators, dtype=np.int64))
    return hashlib.sha256(g.tobytes()).hexdigest()[:16]


def _header(q, n, name, ghash, count):
    nb = name.encode()
    gb = ghash.encode()
    return (MAGIC + struct.pack("<HHHH", VERSION, q, n, len(nb)) + nb
            + struct.pack("<H", len(gb)) + gb + struct.pack("<Q", count))


def write(path, q, n, name, ghash, words):
    """words: int64 array (count, 2)."""
    words = np.ascontiguousarray(np.asarray(words, dtype="<i8").reshape(-1, 2))
    body = _header(q, n, name, ghash, len(words)) + words.tobytes()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(body + hashlib.sha256(body).digest())
    os.replace(tmp, path)


def read(path, q, n, name, ghash):
    """Payload words, or None on any mismatch or corruption."""
    path = Path(path)
    if not path.exists():
        return None
    raw = path.read_bytes()
    if len(raw) < 32:
        return None
    body, digest = raw[:-32], raw[-32:]
    if hashlib.sha256(body).digest() != digest:
        return None
    if not body.startswith(MAGIC):
        return None
    off = len(MAGIC)
    version, fq, fn, ln = struct.unpack_from("<HHHH", body, off)
    off += 8
    fname = body[off:off + ln].decode()
    off += ln
    (lg,) = struct.unpack_from("<H", body, off)
    off += 2
    fhash = body[off:off + lg].decode()
    off += lg
    (count,) = struct.unpack_from("<Q", body, off)
    off += 8
    if (version, fq, fn, fname, fhash) != (VERSION, q, n, name, ghash):
        return None
    words = np.frombuffer(body, dtype="<i8", offset=off)
    if len(words) != 2 * count:
        return None
    return words.reshape(count, 2).astype(np.int64)
