"""Encoder, recoder and propagative decoder over GF(256).

Each packet carries one class tag and a local coding vector aligned with
the sorted members of that class. The decoder keeps, per class, a reduced
row echelon basis of everything known about the class: received packets
plus unit rows for members recovered elsewhere. A class is solved once that
basis reaches full rank, its members are back-substituted into every
overlapping class, and the loop repeats.
"""

import struct
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernels
from .ffield import INV, MUL, gf_matmul

MAGIC = b"OVC1"


class PacketError(ValueError):
    """Packet does not fit the scheme (bad class tag or dimensions)."""


class RecodeError(ValueError):
    """Attempt to combine packets from different classes."""


class InconsistentSystemError(RuntimeError):
    """Received data contradicts itself; only corrupted packets cause this."""


class DecodingIncompleteError(RuntimeError):
    pass


class WireFormatError(ValueError):
    pass


@dataclass
class CodedPacket:
    class_index: int
    coefficients: np.ndarray
    payload: np.ndarray

    def global_vector(self, scheme):
        g = np.zeros(scheme.k, dtype=np.uint8)
        g[list(scheme.classes[self.class_index])] = self.coefficients
        return g

    def __eq__(self, other):
        if not isinstance(other, CodedPacket):
            return NotImplemented
        return (
            self.class_index == other.class_index
            and np.array_equal(self.coefficients, other.coefficients)
            and np.array_equal(self.payload, other.payload)
        )


class SourceData:
    """k data packets of m symbols each, as a (k, m) uint8 array."""

    def __init__(self, packets):
        self.packets = np.ascontiguousarray(np.asarray(packets, dtype=np.uint8))
        if self.packets.ndim != 2:
            raise ValueError("source data must be a (k, m) array")

    @classmethod
    def random(cls, k, m, rng):
        return cls(rng.integers(0, 256, size=(k, m), dtype=np.uint8))

    @property
    def k(self):
        return self.packets.shape[0]

    @property
    def m(self):
        return self.packets.shape[1]


def _combine(weights, rows):
    return gf_matmul(np.asarray(weights, dtype=np.uint8)[None, :], rows)[0]


def source_encode(data, scheme, ell, rng):
    """Random combination of the data packets in class ``ell``."""
    if data.k != scheme.k:
        raise PacketError(f"source has {data.k} packets, scheme expects {scheme.k}")
    members = list(scheme.classes[ell])
    coeffs = rng.integers(0, 256, size=len(members), dtype=np.uint8)
    return CodedPacket(ell, coeffs, _combine(coeffs, data.packets[members]))


def select_class(scheme, available, rng):
    """Draw a class from the selection distribution, redrawing until it is available."""
    available = set(int(a) for a in available)
    if not available:
        raise ValueError("no class is available to transmit from")
    if sum(scheme.probs[a] for a in available) <= 0:
        raise ValueError("available classes all have zero probability")
    p = np.asarray(scheme.probs)
    while True:
        ell = int(rng.choice(scheme.L, p=p))
        if ell in available:
            return ell


def recode(packets, rng, weights=None):
    """Random linear combination of same-class packets; the result keeps the tag."""
    if not packets:
        raise ValueError("nothing to recode")
    ell = packets[0].class_index
    if any(p.class_index != ell for p in packets):
        raise RecodeError("recoding may only combine packets of one class")
    if weights is None:
        weights = rng.integers(0, 256, size=len(packets), dtype=np.uint8)
    coefs = np.stack([p.coefficients for p in packets])
    payloads = np.stack([p.payload for p in packets])
    return CodedPacket(ell, _combine(weights, coefs), _combine(weights, payloads))


class DecoderState:
    """Receiver state for one decode session. Single owner, not thread-safe."""

    def __init__(self, scheme, m):
        self.scheme = scheme
        self.m = int(m)
        self.k = scheme.k
        L = scheme.L
        self.sizes = scheme.sizes.copy()
        self._members = [np.asarray(c, dtype=np.int64) for c in scheme.classes]
        self._basis = [np.zeros((d, d + self.m), dtype=np.uint8) for d in self.sizes]
        self._pivots = [np.zeros(d, dtype=np.int64) for d in self.sizes]
        self.rank = np.zeros(L, dtype=np.int64)
        self.received = np.zeros(L, dtype=np.int64)
        self.innovative = np.zeros(L, dtype=np.int64)
        self.decoded = np.zeros(L, dtype=bool)
        self.residual = self.sizes.copy()
        self.residual_at_decode = np.full(L, -1, dtype=np.int64)
        self.known = np.zeros(self.k, dtype=bool)
        self.data = np.zeros((self.k, self.m), dtype=np.uint8)
        self.n = 0
        self.mults = 0
        self.decode_order = []

    @property
    def n_recovered(self):
        return int(self.known.sum())

    @property
    def complete(self):
        return bool(self.known.all())

    def state_tuple(self):
        """Per-class rank of received plus substituted rows."""
        return tuple(int(r) for r in self.rank)

    def available(self):
        return [int(i) for i in np.flatnonzero(self.rank)]

    def class_packets(self, ell):
        """The class's current basis rows, as packets tagged ``ell``."""
        d = int(self.sizes[ell])
        rows = self._basis[ell][: self.rank[ell]]
        return [CodedPacket(ell, r[:d].copy(), r[d:].copy()) for r in rows]

    def emit(self, rng):
        """Recode a fresh packet as an intermediate node would."""
        ell = select_class(self.scheme, self.available(), rng)
        return recode(self.class_packets(ell), rng)

    def _insert(self, ell, row):
        new_rank, mults = _kernels.gf_insert_row(
            self._basis[ell], self._pivots[ell], int(self.rank[ell]), row,
            int(self.sizes[ell]), MUL, INV,
        )
        self.mults += int(mults)
        if new_rank < 0:
            raise InconsistentSystemError(f"class {ell}: received data is inconsistent")
        grew = bool(new_rank > self.rank[ell])
        self.rank[ell] = new_rank
        return grew

    def receive(self, p):
        """File a packet under its class; True when it raised the class rank."""
        ell = p.class_index
        if not 0 <= ell < self.scheme.L:
            raise PacketError(f"class index {ell} out of range")
        d = int(self.sizes[ell])
        if len(p.coefficients) != d or len(p.payload) != self.m:
            raise PacketError(
                f"class {ell} expects {d} coefficients and {self.m} symbols, got "
                f"{len(p.coefficients)} and {len(p.payload)}"
            )
        self.n += 1
        self.received[ell] += 1
        if self.decoded[ell]:
            return False
        row = np.concatenate([p.coefficients, p.payload]).astype(np.uint8)
        grew = self._insert(ell, row)
        if grew:
            self.innovative[ell] += 1
        return grew

    def decodable(self):
        return np.flatnonzero(~self.decoded & (self.rank == self.sizes))

    def _decode_class(self, ell):
        d = int(self.sizes[ell])
        basis, piv = self._basis[ell], self._pivots[ell]
        members = self._members[ell]
        res = int(self.residual[ell])
        self.residual_at_decode[ell] = res
        newly = []
        for r in range(d):
            i = int(members[piv[r]])
            if not self.known[i]:
                self.known[i] = True
                self.data[i] = basis[r, d:]
                newly.append(i)
        self.decoded[ell] = True
        self.decode_order.append(ell)
        if self.complete:
            return newly
        for i in newly:
            for l2 in self.scheme.classes_of(i):
                if l2 == ell or self.decoded[l2]:
                    continue
                self.residual[l2] -= 1
                d2 = int(self.sizes[l2])
                row = np.zeros(d2 + self.m, dtype=np.uint8)
                row[int(np.searchsorted(self._members[l2], i))] = 1
                row[d2:] = self.data[i]
                self._insert(l2, row)
        return newly

    def decode_cascade(self):
        """Solve decodable classes, smallest residual first, until none is left."""
        newly = []
        while not self.complete:
            cands = self.decodable()
            if cands.size == 0:
                break
            ell = int(cands[np.lexsort((cands, self.residual[cands]))[0]])
            newly.extend(self._decode_class(ell))
        return newly

    def ideal_mults(self):
        done = self.residual_at_decode >= 0
        return int((self.residual_at_decode[done] * self.sizes[done]).sum())

    def ops_per_symbol(self):
        """Measured multiplications per decoded symbol."""
        if not self.complete:
            raise DecodingIncompleteError("decoding has not finished")
        return self.mults / (self.k * self.m)

    def ideal_ops_per_symbol(self):
        """Sum over decoded classes of residual-at-decode times class size, over k."""
        if not self.complete:
            raise DecodingIncompleteError("decoding has not finished")
        return Fraction(self.ideal_mults(), self.k)


@dataclass
class OpsReport:
    measured: float
    idealized: Fraction


def ops_per_symbol(state):
    return OpsReport(state.ops_per_symbol(), state.ideal_ops_per_symbol())


def pack_packet(p):
    if not 0 <= p.class_index < 1 << 16:
        raise WireFormatError("class index does not fit 16 bits")
    return (
        struct.pack(">H", p.class_index)
        + np.asarray(p.coefficients, dtype=np.uint8).tobytes()
        + np.asarray(p.payload, dtype=np.uint8).tobytes()
    )


def write_stream(fp, m, packets):
    fp.write(MAGIC + struct.pack(">I", m))
    for p in packets:
        fp.write(pack_packet(p))


def encode_stream(m, packets):
    return MAGIC + struct.pack(">I", m) + b"".join(pack_packet(p) for p in packets)


def decode_stream(buf, scheme):
    """Parse a packet stream; member order and class sizes come from ``scheme``."""
    buf = bytes(buf)
    if buf[:4] != MAGIC:
        raise WireFormatError("bad stream magic")
    if len(buf) < 8:
        raise WireFormatError("truncated stream header")
    (m,) = struct.unpack(">I", buf[4:8])
    out = []
    pos = 8
    while pos < len(buf):
        if pos + 2 > len(buf):
            raise WireFormatError("truncated class index")
        (ell,) = struct.unpack(">H", buf[pos:pos + 2])
        pos += 2
        if ell >= scheme.L:
            raise WireFormatError(f"class index {ell} not in scheme")
        d = len(scheme.classes[ell])
        if pos + d + m > len(buf):
            raise WireFormatError("truncated packet body")
        body = np.frombuffer(buf, dtype=np.uint8, count=d + m, offset=pos).copy()
        out.append(CodedPacket(ell, body[:d], body[d:]))
        pos += d + m
    return m, out
