"""GF(2^8) arithmetic and dense linear algebra.

Elements are bytes; addition is XOR and multiplication is carry-less
polynomial multiplication reduced by x^8 + x^4 + x^3 + x + 1 (0x11B).
Products go through log/antilog tables built once at import and checked
against the shift-and-add definition.
"""

import numpy as np

from . import _kernels

POLY = 0x11B
GENERATOR = 0x03


class SingularSystemError(ValueError):
    """The system has no unique solution (rank-deficient or inconsistent)."""


def poly_mul(a: int, b: int) -> int:
    """Shift-and-add product mod 0x11B. Slow; used to verify the tables."""
    r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if a & 0x100:
            a ^= POLY
    return r


def _build_tables():
    exp = np.zeros(512, dtype=np.int64)
    log = np.zeros(256, dtype=np.int64)
    x = 1
    for i in range(255):
        exp[i] = x
        log[x] = i
        x = poly_mul(x, GENERATOR)
    if x != 1 or len(set(exp[:255].tolist())) != 255:
        raise RuntimeError("0x03 does not generate GF(256)*")
    exp[255:510] = exp[:255]
    a = np.arange(256)
    mul = exp[(log[:, None] + log[None, :])].astype(np.uint8)
    mul[0, :] = 0
    mul[:, 0] = 0
    inv = np.zeros(256, dtype=np.uint8)
    inv[1:] = exp[(255 - log[1:]) % 255]
    for b in (0x01, 0x02, 0x80, 0xCA, 0xFF):
        for x in a[::17]:
            if mul[x, b] != poly_mul(int(x), b):
                raise RuntimeError("multiplication table mismatch")
    return exp, log, mul, inv


EXP, LOG, MUL, INV = _build_tables()
MUL.setflags(write=False)
INV.setflags(write=False)


def ff_add(a: int, b: int) -> int:
    return a ^ b


def ff_mul(a: int, b: int) -> int:
    return int(MUL[a, b])


def ff_inv(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("0 has no inverse in GF(256)")
    return int(INV[a])


def ff_div(a: int, b: int) -> int:
    return ff_mul(a, ff_inv(b))


def gf_scale(c, v):
    """Multiply the byte vector/array ``v`` by scalar ``c``."""
    return MUL[c, v]


def gf_matmul(A, B):
    A = np.asarray(A, dtype=np.uint8)
    B = np.asarray(B, dtype=np.uint8)
    if A.shape[1] != B.shape[0]:
        raise ValueError(f"shape mismatch {A.shape} @ {B.shape}")
    out = np.zeros((A.shape[0], B.shape[1]), dtype=np.uint8)
    for j in range(A.shape[1]):
        out ^= MUL[A[:, j][:, None], B[j][None, :]]
    return out


class FieldMatrix:
    """Dense matrix over GF(256), backed by a C-contiguous uint8 array."""

    __slots__ = ("data",)

    def __init__(self, entries):
        data = np.array(entries, dtype=np.uint8, copy=True, ndmin=2)
        if data.ndim != 2:
            raise ValueError("FieldMatrix needs a 2-D array")
        self.data = np.ascontiguousarray(data)

    @classmethod
    def identity(cls, n):
        return cls(np.eye(n, dtype=np.uint8))

    @classmethod
    def zeros(cls, rows, cols):
        return cls(np.zeros((rows, cols), dtype=np.uint8))

    @classmethod
    def random(cls, rows, cols, rng):
        return cls(rng.integers(0, 256, size=(rows, cols), dtype=np.uint8))

    @property
    def rows(self):
        return self.data.shape[0]

    @property
    def cols(self):
        return self.data.shape[1]

    @property
    def shape(self):
        return self.data.shape

    def __matmul__(self, other):
        return FieldMatrix(gf_matmul(self.data, _as_array(other)))

    def __add__(self, other):
        return FieldMatrix(self.data ^ _as_array(other))

    __sub__ = __add__

    def __eq__(self, other):
        if not isinstance(other, FieldMatrix):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.data, other.data))

    def __hash__(self):
        return hash((self.shape, self.data.tobytes()))

    def __getitem__(self, key):
        return self.data[key]

    def __repr__(self):
        return f"FieldMatrix({self.data.tolist()!r})"

    def hstack(self, other):
        return FieldMatrix(np.hstack([self.data, _as_array(other)]))

    def rank(self):
        return mat_rank(self)

    def rref(self):
        return mat_rref(self)


def _as_array(M):
    if isinstance(M, FieldMatrix):
        return M.data
    return np.asarray(M, dtype=np.uint8)


def mat_rref(M, pivot_limit=None):
    """Reduced row echelon form and the number of multiplications spent.

    ``pivot_limit`` restricts pivot search to the leading columns (the
    coefficient block of an augmented matrix).
    """
    work = np.array(_as_array(M), dtype=np.uint8, order="C", copy=True)
    limit = work.shape[1] if pivot_limit is None else pivot_limit
    _, mults, _ = _kernels.gf_rref(work, limit, MUL, INV)
    return FieldMatrix(work), int(mults)


def mat_rank(M):
    work = np.array(_as_array(M), dtype=np.uint8, order="C", copy=True)
    rank, _, _ = _kernels.gf_rref(work, work.shape[1], MUL, INV)
    return int(rank)


def solve_system(A, B):
    """Solve ``A X = B`` for X; A must have full column rank.

    Raises SingularSystemError when A is rank-deficient or the system is
    inconsistent.
    """
    A = _as_array(A)
    B = _as_array(B)
    if B.ndim == 1:
        B = B[:, None]
    if A.shape[0] != B.shape[0]:
        raise ValueError(f"row mismatch: A has {A.shape[0]}, B has {B.shape[0]}")
    n = A.shape[1]
    work = np.ascontiguousarray(np.hstack([A, B]).astype(np.uint8))
    rank, mults, _ = _kernels.gf_rref(work, n, MUL, INV)
    if rank < n:
        raise SingularSystemError(f"rank {rank} < {n} unknowns")
    if work[n:, n:].any():
        raise SingularSystemError("inconsistent system")
    return FieldMatrix(work[:n, n:]), int(mults)
