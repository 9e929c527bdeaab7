"""Binary model files.

Layout (all integers little-endian)::

    magic        4 bytes  b"CWG1"
    version      uint32   (1)
    seg_len      uint32
    latent_dim   uint32
    n_networks   uint32   (2: generator, then critic)
    per network:
        name        uint16 length + UTF-8 bytes
        n_tensors   uint32
        per tensor:
            name     uint16 length + UTF-8 bytes
            rows     uint32
            cols     uint32
            crc32    uint32 over the payload bytes
            payload  rows * cols float32, row-major
"""

import struct
import zlib
from pathlib import Path

import numpy as np

from .data import atomic_write
from .exceptions import CorruptModelError, ModelFormatError
from .model import CriticNet, GeneratorNet
from .nn import Dense, Embedding, Parameter

__all__ = ["MAGIC", "FORMAT_VERSION", "save_model", "load_model", "dump_model", "parse_model"]

MAGIC = b"CWG1"
FORMAT_VERSION = 1
_F32 = np.dtype("<f4")


def _pack_name(name):
    raw = name.encode("utf-8")
    return struct.pack("<H", len(raw)) + raw


def dump_model(gen, critic):
    """Serialise a generator/critic pair to bytes."""
    out = [MAGIC, struct.pack("<IIII", FORMAT_VERSION, gen.seg_len, gen.latent_dim, 2)]
    for net_name, net in (("generator", gen), ("critic", critic)):
        named = net.named_parameters()
        out += [_pack_name(net_name), struct.pack("<I", len(named))]
        for name, p in named:
            payload = np.ascontiguousarray(p.value, dtype=_F32).tobytes()
            rows, cols = p.shape
            out += [_pack_name(name), struct.pack("<III", rows, cols, zlib.crc32(payload)), payload]
    return b"".join(out)


def save_model(gen, critic, path):
    atomic_write(path, dump_model(gen, critic))


class _Reader:
    def __init__(self, buf, source):
        self.buf = buf
        self.pos = 0
        self.source = source

    def take(self, n, what):
        if self.pos + n > len(self.buf):
            raise CorruptModelError(f"{self.source}: truncated while reading {what}")
        chunk = self.buf[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt, what):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))

    def name(self, what):
        (n,) = self.unpack("<H", what)
        try:
            return self.take(n, what).decode("utf-8")
        except UnicodeDecodeError:
            raise CorruptModelError(f"{self.source}: undecodable {what}") from None


def _build(cls, tensors, source):
    names = list(tensors)
    n_hidden = (len(names) - 3) // 2
    expected = ["label_embed"]
    for i in range(n_hidden):
        expected += [f"dense{i}.weight", f"dense{i}.bias"]
    expected += ["out.weight", "out.bias"]
    if names != expected:
        raise CorruptModelError(f"{source}: unexpected tensor layout {names}")
    p = {k: Parameter(v) for k, v in tensors.items()}
    try:
        hidden = [Dense(p[f"dense{i}.weight"], p[f"dense{i}.bias"]) for i in range(n_hidden)]
        act = "tanh" if cls is GeneratorNet else "linear"
        return cls(Embedding(p["label_embed"]), hidden, Dense(p["out.weight"], p["out.bias"]), out_activation=act)
    except ValueError as exc:
        raise CorruptModelError(f"{source}: inconsistent tensor shapes ({exc})") from None


def parse_model(buf, source="<bytes>"):
    r = _Reader(bytes(buf), source)
    magic = r.take(4, "magic")
    if magic != MAGIC:
        raise ModelFormatError(f"{source}: bad magic {magic!r}, expected {MAGIC!r}")
    (version,) = r.unpack("<I", "version")
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"{source}: unsupported format version {version}")
    seg_len, latent_dim, n_networks = r.unpack("<III", "header")
    if n_networks != 2:
        raise CorruptModelError(f"{source}: expected 2 networks, found {n_networks}")
    nets = {}
    for net_name, cls in (("generator", GeneratorNet), ("critic", CriticNet)):
        found = r.name("network name")
        if found != net_name:
            raise CorruptModelError(f"{source}: expected network {net_name!r}, found {found!r}")
        (n_tensors,) = r.unpack("<I", f"{net_name} tensor count")
        tensors = {}
        for _ in range(n_tensors):
            name = r.name(f"{net_name} tensor name")
            rows, cols, crc = r.unpack("<III", f"{net_name}/{name} header")
            payload = r.take(rows * cols * _F32.itemsize, f"{net_name}/{name} payload")
            if zlib.crc32(payload) != crc:
                raise CorruptModelError(f"{source}: checksum mismatch in tensor {net_name}/{name}")
            tensors[name] = np.frombuffer(payload, dtype=_F32).reshape(rows, cols).astype(np.float32)
        nets[net_name] = _build(cls, tensors, source)
    if r.pos != len(r.buf):
        raise CorruptModelError(f"{source}: {len(r.buf) - r.pos} trailing bytes")
    gen, critic = nets["generator"], nets["critic"]
    if (gen.seg_len, gen.latent_dim, critic.seg_len) != (seg_len, latent_dim, seg_len):
        raise CorruptModelError(f"{source}: network shapes disagree with header")
    return gen, critic


def load_model(path):
    """Read a model file written by :func:`save_model`; returns ``(gen, critic)``."""
    path = Path(path)
    return parse_model(path.read_bytes(), source=str(path))
