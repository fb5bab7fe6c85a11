"""Pure-Python/numpy kernels. Reference semantics for the compiled backend."""

import numpy as np


def gf_rref(M, pivot_limit, mul, inv):
    """Gauss-Jordan on ``M`` in place, pivoting only in columns ``< pivot_limit``.

    Returns ``(rank, mults, pivots)``. A multiplication is counted for every
    entry strictly right of the pivot column in a row that gets scaled or
    eliminated; rows with a zero factor and unit pivots cost nothing.
    """
    rows, cols = M.shape
    r = 0
    mults = 0
    pivots = []
    for c in range(pivot_limit):
        if r == rows:
            break
        nz = np.flatnonzero(M[r:, c])
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            M[[r, p]] = M[[p, r]]
        piv = M[r, c]
        if piv != 1:
            M[r, c:] = mul[inv[piv], M[r, c:]]
            mults += cols - c - 1
        for i in np.flatnonzero(M[:, c]):
            if i == r:
                continue
            M[i, c:] ^= mul[M[i, c], M[r, c:]]
            mults += cols - c - 1
        pivots.append(c)
        r += 1
    return r, mults, np.asarray(pivots, dtype=np.int64)


def gf_insert_row(basis, pivots, rank, row, pivot_limit, mul, inv):
    """Reduce ``row`` against an RREF ``basis`` and append it if independent.

    ``basis[:rank]`` must be reduced: row ``r`` has a unit at ``pivots[r]``
    and every other basis row is zero there. ``row`` is modified in place.
    Returns ``(new_rank, mults)``; ``new_rank == -1`` flags a row whose
    coefficient part reduces to zero while its payload part does not.
    """
    ncols = row.shape[0]
    mults = 0
    for r in range(rank):
        f = row[pivots[r]]
        if f:
            row ^= mul[f, basis[r]]
            mults += ncols - rank
    nz = np.flatnonzero(row[:pivot_limit])
    if nz.size == 0:
        if row[pivot_limit:].any():
            return -1, mults
        return rank, mults
    p = int(nz[0])
    piv = row[p]
    if piv != 1:
        row[:] = mul[inv[piv], row]
        mults += ncols - rank - 1
    for r in range(rank):
        f = basis[r, p]
        if f:
            basis[r] ^= mul[f, row]
            mults += ncols - rank - 1
    basis[rank] = row
    pivots[rank] = p
    return rank + 1, mults


class IdealCore:
    """Rank-counter receiver state under the all-innovative assumption.

    Classes are given in CSR form (``cls_ptr``/``cls_idx``: members of each
    class; ``pk_ptr``/``pk_idx``: classes containing each packet).
    """

    def __init__(self, cls_ptr, cls_idx, pk_ptr, pk_idx):
        self._cls_ptr = [int(x) for x in cls_ptr]
        self._cls_idx = [int(x) for x in cls_idx]
        self._pk_ptr = [int(x) for x in pk_ptr]
        self._pk_idx = [int(x) for x in pk_idx]
        self.L = len(self._cls_ptr) - 1
        self.k = len(self._pk_ptr) - 1
        self._size = [self._cls_ptr[i + 1] - self._cls_ptr[i] for i in range(self.L)]
        self._rank = [0] * self.L
        self._residual = list(self._size)
        self._decoded = [0] * self.L
        self._queued = [0] * self.L
        self._recovered = [0] * self.k
        self._cand = []
        self.n = 0
        self.n_recovered = 0
        self.mults = 0

    @property
    def rank(self):
        return np.asarray(self._rank, dtype=np.int64)

    @property
    def residual(self):
        return np.asarray(self._residual, dtype=np.int64)

    @property
    def decoded(self):
        return np.asarray(self._decoded, dtype=np.uint8)

    @property
    def recovered(self):
        return np.asarray(self._recovered, dtype=np.uint8)

    @property
    def complete(self):
        return self.n_recovered == self.k

    def _push(self, l):
        if not self._queued[l] and not self._decoded[l]:
            self._queued[l] = 1
            self._cand.append(l)

    def receive(self, l):
        self.n += 1
        if self._decoded[l] or self._rank[l] >= self._residual[l]:
            return False
        self._rank[l] += 1
        if self._rank[l] >= self._residual[l]:
            self._push(l)
        return True

    def load_counts(self, counts):
        """Set raw reception counts (capped at class size) without cascading."""
        for l, c in enumerate(counts):
            c = int(c)
            self.n += c
            self._rank[l] = min(c, self._residual[l])
            if self._rank[l] >= self._residual[l]:
                self._push(l)

    def step(self):
        """Decode one decodable class; return its index or -1."""
        if not self._cand or self.n_recovered == self.k:
            return -1
        cand = self._cand
        best = 0
        for j in range(1, len(cand)):
            a, b = cand[j], cand[best]
            if (self._residual[a], a) < (self._residual[b], b):
                best = j
        c = cand[best]
        cand[best] = cand[-1]
        cand.pop()
        self._queued[c] = 0
        self._decoded[c] = 1
        self.mults += self._residual[c] * self._size[c]
        rec = self._recovered
        newly = []
        for t in range(self._cls_ptr[c], self._cls_ptr[c + 1]):
            i = self._cls_idx[t]
            if not rec[i]:
                rec[i] = 1
                newly.append(i)
        self.n_recovered += len(newly)
        if self.n_recovered == self.k:
            return c
        for i in newly:
            for t in range(self._pk_ptr[i], self._pk_ptr[i + 1]):
                l2 = self._pk_idx[t]
                if l2 != c and not self._decoded[l2]:
                    self._residual[l2] -= 1
                    if self._rank[l2] >= self._residual[l2]:
                        self._push(l2)
        return c

    def cascade(self):
        before = self.n_recovered
        while self.step() >= 0:
            pass
        return self.n_recovered - before

    def feed(self, draws):
        """Receive ``draws`` in order, cascading after each innovative one.

        Stops early once every packet is recovered; returns draws consumed.
        """
        used = 0
        for l in draws:
            if self.n_recovered == self.k:
                break
            used += 1
            if self.receive(int(l)):
                self.cascade()
        return used
