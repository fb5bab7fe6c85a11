# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; must stay behaviourally identical to _pykernels."""

import numpy as np

from libc.stdint cimport int64_t, uint8_t


def gf_rref(uint8_t[:, ::1] M, Py_ssize_t pivot_limit,
            const uint8_t[:, ::1] mul, const uint8_t[::1] inv):
    cdef Py_ssize_t rows = M.shape[0], cols = M.shape[1]
    cdef Py_ssize_t r = 0, c, i, j, p
    cdef int64_t mults = 0
    cdef uint8_t piv, f, tmp, s
    cdef const uint8_t[::1] mrow
    pivots = []
    for c in range(pivot_limit):
        if r == rows:
            break
        p = -1
        for i in range(r, rows):
            if M[i, c]:
                p = i
                break
        if p < 0:
            continue
        if p != r:
            for j in range(cols):
                tmp = M[r, j]
                M[r, j] = M[p, j]
                M[p, j] = tmp
        piv = M[r, c]
        if piv != 1:
            mrow = mul[inv[piv]]
            for j in range(c, cols):
                M[r, j] = mrow[M[r, j]]
            mults += cols - c - 1
        for i in range(rows):
            if i == r:
                continue
            f = M[i, c]
            if f:
                mrow = mul[f]
                for j in range(c, cols):
                    s = M[r, j]
                    if s:
                        M[i, j] ^= mrow[s]
                mults += cols - c - 1
        pivots.append(c)
        r += 1
    return r, mults, np.asarray(pivots, dtype=np.int64)


def gf_insert_row(uint8_t[:, ::1] basis, int64_t[::1] pivots, Py_ssize_t rank,
                  uint8_t[::1] row, Py_ssize_t pivot_limit,
                  const uint8_t[:, ::1] mul, const uint8_t[::1] inv):
    cdef Py_ssize_t ncols = row.shape[0]
    cdef Py_ssize_t r, j, p = -1
    cdef int64_t mults = 0
    cdef uint8_t f, piv, s
    cdef const uint8_t[::1] mrow
    for r in range(rank):
        f = row[pivots[r]]
        if f:
            mrow = mul[f]
            for j in range(ncols):
                s = basis[r, j]
                if s:
                    row[j] ^= mrow[s]
            mults += ncols - rank
    for j in range(pivot_limit):
        if row[j]:
            p = j
            break
    if p < 0:
        for j in range(pivot_limit, ncols):
            if row[j]:
                return -1, mults
        return rank, mults
    piv = row[p]
    if piv != 1:
        mrow = mul[inv[piv]]
        for j in range(ncols):
            row[j] = mrow[row[j]]
        mults += ncols - rank - 1
    for r in range(rank):
        f = basis[r, p]
        if f:
            mrow = mul[f]
            for j in range(ncols):
                s = row[j]
                if s:
                    basis[r, j] ^= mrow[s]
            mults += ncols - rank - 1
    for j in range(ncols):
        basis[rank, j] = row[j]
    pivots[rank] = p
    return rank + 1, mults


cdef class IdealCore:
    cdef int64_t[::1] _cls_ptr, _cls_idx, _pk_ptr, _pk_idx, _size
    cdef int64_t[::1] _rank, _residual, _cand, _newly
    cdef uint8_t[::1] _decoded, _queued, _recovered
    cdef Py_ssize_t _ncand
    cdef readonly Py_ssize_t L, k
    cdef public int64_t n, n_recovered, mults

    def __init__(self, cls_ptr, cls_idx, pk_ptr, pk_idx):
        self._cls_ptr = np.ascontiguousarray(cls_ptr, dtype=np.int64)
        self._cls_idx = np.ascontiguousarray(cls_idx, dtype=np.int64)
        self._pk_ptr = np.ascontiguousarray(pk_ptr, dtype=np.int64)
        self._pk_idx = np.ascontiguousarray(pk_idx, dtype=np.int64)
        self.L = self._cls_ptr.shape[0] - 1
        self.k = self._pk_ptr.shape[0] - 1
        size = np.diff(np.asarray(self._cls_ptr))
        self._size = size
        self._rank = np.zeros(self.L, dtype=np.int64)
        self._residual = size.copy()
        self._decoded = np.zeros(self.L, dtype=np.uint8)
        self._queued = np.zeros(self.L, dtype=np.uint8)
        self._recovered = np.zeros(self.k, dtype=np.uint8)
        self._cand = np.zeros(self.L, dtype=np.int64)
        self._newly = np.zeros(self.k, dtype=np.int64)
        self._ncand = 0
        self.n = 0
        self.n_recovered = 0
        self.mults = 0

    @property
    def rank(self):
        return np.array(self._rank)

    @property
    def residual(self):
        return np.array(self._residual)

    @property
    def decoded(self):
        return np.array(self._decoded)

    @property
    def recovered(self):
        return np.array(self._recovered)

    @property
    def complete(self):
        return self.n_recovered == self.k

    cdef inline void _push(self, Py_ssize_t l) noexcept:
        if not self._queued[l] and not self._decoded[l]:
            self._queued[l] = 1
            self._cand[self._ncand] = l
            self._ncand += 1

    cdef bint _receive(self, Py_ssize_t l) noexcept:
        self.n += 1
        if self._decoded[l] or self._rank[l] >= self._residual[l]:
            return False
        self._rank[l] += 1
        if self._rank[l] >= self._residual[l]:
            self._push(l)
        return True

    cdef Py_ssize_t _step(self) noexcept:
        cdef Py_ssize_t j, best, a, b, c, t, i, l2, nnew = 0
        if self._ncand == 0 or self.n_recovered == self.k:
            return -1
        best = 0
        for j in range(1, self._ncand):
            a = self._cand[j]
            b = self._cand[best]
            if self._residual[a] < self._residual[b] or (
                    self._residual[a] == self._residual[b] and a < b):
                best = j
        c = self._cand[best]
        self._ncand -= 1
        self._cand[best] = self._cand[self._ncand]
        self._queued[c] = 0
        self._decoded[c] = 1
        self.mults += self._residual[c] * self._size[c]
        for t in range(self._cls_ptr[c], self._cls_ptr[c + 1]):
            i = self._cls_idx[t]
            if not self._recovered[i]:
                self._recovered[i] = 1
                self._newly[nnew] = i
                nnew += 1
        self.n_recovered += nnew
        if self.n_recovered == self.k:
            return c
        for j in range(nnew):
            i = self._newly[j]
            for t in range(self._pk_ptr[i], self._pk_ptr[i + 1]):
                l2 = self._pk_idx[t]
                if l2 != c and not self._decoded[l2]:
                    self._residual[l2] -= 1
                    if self._rank[l2] >= self._residual[l2]:
                        self._push(l2)
        return c

    def receive(self, Py_ssize_t l):
        return bool(self._receive(l))

    def load_counts(self, counts):
        cdef Py_ssize_t l
        cdef int64_t c
        for l in range(self.L):
            c = counts[l]
            self.n += c
            self._rank[l] = min(c, self._residual[l])
            if self._rank[l] >= self._residual[l]:
                self._push(l)

    def step(self):
        return self._step()

    def cascade(self):
        cdef int64_t before = self.n_recovered
        while self._step() >= 0:
            pass
        return self.n_recovered - before

    def feed(self, draws):
        cdef const int64_t[::1] dv = np.ascontiguousarray(draws, dtype=np.int64)
        cdef Py_ssize_t t, used = 0
        for t in range(dv.shape[0]):
            if self.n_recovered == self.k:
                break
            used += 1
            if self._receive(dv[t]):
                while self._step() >= 0:
                    pass
        return used
