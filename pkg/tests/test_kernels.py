"""Compiled and fallback kernels must agree bit for bit."""

import numpy as np
import pytest

from overlapnc import _kernels
from overlapnc.ffield import INV, MUL, gf_matmul
from overlapnc.schemes import make_chunked, make_diag_grid_angle, make_mixed, make_rect_grid
from overlapnc.sim import expected_overhead_mc

pytestmark = pytest.mark.skipif(
    "cython" not in _kernels.BACKENDS, reason="compiled extension not built"
)
PY = _kernels.BACKENDS["python"]


def test_rref_parity(rng):
    C = _kernels.BACKENDS["cython"]
    for _ in range(50):
        rows, cols = rng.integers(1, 9, size=2)
        M = rng.integers(0, 256, size=(rows, cols), dtype=np.uint8)
        if rows > 2:
            M[1] = M[0]
        a, b = M.copy(), M.copy()
        ra = PY.gf_rref(a, cols, MUL, INV)
        rb = C.gf_rref(b, cols, MUL, INV)
        assert ra[:2] == rb[:2]
        assert np.array_equal(ra[2], rb[2])
        assert np.array_equal(a, b)


def test_insert_row_parity(rng):
    C = _kernels.BACKENDS["cython"]
    d, m = 6, 5
    state = {}
    for name, impl in (("py", PY), ("c", C)):
        basis = np.zeros((d, d + m), dtype=np.uint8)
        piv = np.zeros(d, dtype=np.int64)
        rank, total, ranks = 0, 0, []
        r = np.random.default_rng(3)
        X = r.integers(0, 256, size=(d, m), dtype=np.uint8)
        for _ in range(10):
            coef = r.integers(0, 256, size=d, dtype=np.uint8)
            coef[r.integers(0, d)] = 0
            row = np.concatenate([coef, gf_matmul(coef[None, :], X)[0]])
            rank, mults = impl.gf_insert_row(basis, piv, rank, row, d, MUL, INV)
            assert rank >= 0
            total += mults
            ranks.append(rank)
        state[name] = (basis, piv, ranks, total)
    assert np.array_equal(state["py"][0], state["c"][0])
    assert np.array_equal(state["py"][1], state["c"][1])
    assert state["py"][2:] == state["c"][2:]


@pytest.mark.parametrize("scheme", [
    make_chunked(60, 6),
    make_rect_grid(36, 6, 6),
    make_diag_grid_angle(120, 10, 17, 5),
    make_mixed(make_diag_grid_angle(120, 10, 15, 5), 50, 4),
], ids=lambda s: s.name)
def test_ideal_trials_identical(scheme):
    a = expected_overhead_mc(scheme, 30, 11, backend="python")
    b = expected_overhead_mc(scheme, 30, 11, backend="cython")
    assert np.array_equal(a.ns, b.ns)
    assert np.array_equal(a.ops, b.ops)


def test_cascade_step_order_identical():
    s = make_diag_grid_angle(40, 5, 14, 3)
    draws = np.random.default_rng(8).integers(0, s.L, size=400)
    orders = []
    for impl in (PY, _kernels.BACKENDS["cython"]):
        core = impl.IdealCore(*s.csr)
        order = []
        for l in draws:
            if core.complete:
                break
            if core.receive(int(l)):
                while (c := core.step()) >= 0:
                    order.append(c)
        orders.append((order, core.n, core.mults, core.residual.tolist()))
    assert orders[0] == orders[1]
