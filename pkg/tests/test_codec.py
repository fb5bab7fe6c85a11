import io

import numpy as np
import pytest

from overlapnc.codec import (
    CodedPacket, DecoderState, DecodingIncompleteError, InconsistentSystemError, PacketError,
    RecodeError, SourceData, WireFormatError, decode_stream, encode_stream, ops_per_symbol,
    pack_packet, recode, select_class, source_encode, write_stream,
)
from overlapnc.ffield import ff_mul, gf_matmul, mat_rank
from overlapnc.schemes import (
    ClassScheme, complexity_bound, make_chunked, make_diag_grid, make_diag_grid_angle,
    make_mixed, make_random_layer, make_rect_grid,
)


class FixedRng:
    """Stands in for a Generator when a test needs specific coefficients."""

    def __init__(self, values):
        self.values = np.asarray(values, dtype=np.uint8)

    def integers(self, low, high, size, dtype):
        return self.values[:size].astype(dtype)


def packet(scheme, data, ell, coefs):
    members = list(scheme.classes[ell])
    coefs = np.asarray(coefs, dtype=np.uint8)
    return CodedPacket(ell, coefs, gf_matmul(coefs[None, :], data.packets[members])[0])


def payload_ok(p, scheme, data):
    return np.array_equal(gf_matmul(p.global_vector(scheme)[None, :], data.packets)[0], p.payload)


def feed(rx, packets):
    for p in packets:
        if rx.receive(p):
            rx.decode_cascade()


def run_to_completion(scheme, m, rng, relay=False):
    data = SourceData.random(scheme.k, m, rng)
    rx = DecoderState(scheme, m)
    mid = DecoderState(scheme, m) if relay else None
    while not rx.complete:
        ell = int(rng.integers(0, scheme.L))
        p = source_encode(data, scheme, ell, rng)
        if relay:
            feed(mid, [p])
            p = mid.emit(rng)
        feed(rx, [p])
    return data, rx


def test_encode_payload_invariant(rng):
    s = make_diag_grid(15, 3, 10, [0, 1])
    data = SourceData.random(15, 8, rng)
    for ell in range(s.L):
        p = source_encode(data, s, ell, rng)
        assert p.class_index == ell
        assert len(p.coefficients) == 3
        assert payload_ok(p, s, data)
        assert set(np.flatnonzero(p.global_vector(s))) <= set(s.classes[ell])


def test_encode_single_member(rng):
    s = ClassScheme.uniform(3, [[0], [1], [2]])
    data = SourceData.random(3, 10, rng)
    p = source_encode(data, s, 1, rng)
    c = int(p.coefficients[0])
    assert [ff_mul(c, int(x)) for x in data.packets[1]] == p.payload.tolist()


def test_encode_zero_coefficients(rng):
    s = make_chunked(4, 2)
    data = SourceData.random(4, 6, rng)
    p = source_encode(data, s, 0, FixedRng([0, 0]))
    assert not p.payload.any()
    rx = DecoderState(s, 6)
    assert rx.receive(p) is False


def test_encode_wrong_source(rng):
    with pytest.raises(PacketError):
        source_encode(SourceData.random(5, 2, rng), make_chunked(4, 2), 0, rng)


def test_select_class_examples(rng):
    s = make_chunked(12, 3)
    assert {select_class(s, [3], rng) for _ in range(50)} == {3}
    with pytest.raises(ValueError):
        select_class(s, [], rng)
    draws = [select_class(s, range(4), rng) for _ in range(4000)]
    counts = np.bincount(draws, minlength=4)
    assert np.all(np.abs(counts - 1000) < 4 * np.sqrt(4000 * 0.25 * 0.75))


def test_select_class_conditional():
    s = ClassScheme(3, [[0], [1], [2]], [0.5, 0.25, 0.25])
    rng = np.random.default_rng(5)
    n = 10**5
    draws = np.array([select_class(s, {1, 2}, rng) for _ in range(n)])
    assert set(np.unique(draws)) == {1, 2}
    frac = (draws == 1).mean()
    assert abs(frac - 0.5) < 3 * np.sqrt(0.25 / n)


def test_recode_identity_and_span(rng):
    s = make_chunked(8, 4)
    data = SourceData.random(8, 5, rng)
    a = source_encode(data, s, 1, rng)
    assert recode([a], rng, weights=[1]) == a
    b = source_encode(data, s, 1, rng)
    c = recode([a, b], rng)
    assert c.class_index == 1
    assert payload_ok(c, s, data)
    vecs = np.stack([a.coefficients, b.coefficients])
    assert mat_rank(np.vstack([vecs, c.coefficients])) == mat_rank(vecs)


def test_recode_mixed_tags(rng):
    s = make_chunked(8, 4)
    data = SourceData.random(8, 5, rng)
    a = source_encode(data, s, 0, rng)
    b = source_encode(data, s, 1, rng)
    with pytest.raises(RecodeError):
        recode([a, b], rng)
    with pytest.raises(ValueError):
        recode([], rng)


def test_receive_examples(rng):
    s = make_chunked(8, 4)
    data = SourceData.random(8, 5, rng)
    rx = DecoderState(s, 5)
    p = packet(s, data, 0, [1, 2, 3, 4])
    assert rx.receive(p) is True
    assert rx.receive(p) is False
    assert rx.rank[0] == 1 and rx.received[0] == 2
    with pytest.raises(PacketError):
        rx.receive(CodedPacket(0, np.zeros(3, np.uint8), np.zeros(5, np.uint8)))
    with pytest.raises(PacketError):
        rx.receive(CodedPacket(0, np.zeros(4, np.uint8), np.zeros(4, np.uint8)))
    with pytest.raises(PacketError):
        rx.receive(CodedPacket(2, np.zeros(4, np.uint8), np.zeros(5, np.uint8)))


@pytest.mark.parametrize("d", [2, 8, 16])
def test_receive_rank_probability(d):
    rng = np.random.default_rng(d)
    s = ClassScheme.uniform(d, [range(d)])
    data = SourceData.random(d, 1, rng)
    trials = 3000
    hits = 0
    for _ in range(trials):
        rx = DecoderState(s, 1)
        hits += sum(rx.receive(source_encode(data, s, 0, rng)) for _ in range(d + 1)) == d
    p_min = 1 - d / 254
    assert hits / trials >= p_min - 3 * np.sqrt(p_min * (1 - p_min) / trials)


def test_example_cascade(rng):
    s = make_rect_grid(4, 2, 2)
    assert [set(c) for c in s.classes] == [{0, 1}, {2, 3}, {0, 2}, {1, 3}]
    data = SourceData.random(4, 7, rng)
    rx = DecoderState(s, 7)
    for ell, coefs in [(0, [1, 1]), (0, [1, 2]), (1, [3, 5]), (2, [7, 9])]:
        assert rx.receive(packet(s, data, ell, coefs))
    assert rx.state_tuple() == (2, 1, 1, 0)
    newly = rx.decode_cascade()
    assert sorted(newly) == [0, 1, 2, 3]
    assert rx.decode_order == [0, 2, 1]
    assert np.array_equal(rx.data, data.packets)
    assert list(rx.residual_at_decode) == [2, 1, 1, -1]


def test_chunked_no_back_substitution(rng):
    s = make_chunked(12, 4)
    data = SourceData.random(12, 3, rng)
    rx = DecoderState(s, 3)
    for ell in range(3):
        for _ in range(4):
            assert rx.receive(packet(s, data, ell, rng.integers(1, 256, 4, dtype=np.uint8))) \
                or rx.rank[ell] < 4
        rx.decode_cascade()
    assert rx.complete
    assert list(rx.residual) == [4, 4, 4]
    assert rx.ideal_ops_per_symbol() == 4


@pytest.mark.parametrize("relay", [False, True])
def test_diag15_round_trip(rng, relay):
    s = make_diag_grid(15, 3, 10, [0, 1])
    for _ in range(20):
        data, rx = run_to_completion(s, 16, rng, relay)
        assert np.array_equal(rx.data, data.packets)
        assert rx.ideal_ops_per_symbol() <= complexity_bound(s)


SCHEMES = [
    make_chunked(16, 4), make_rect_grid(16, 4, 4), make_diag_grid_angle(16, 4, 6, 1),
    make_random_layer(16, 4, 8, 3), make_mixed(make_diag_grid_angle(20, 4, 7, 2), 12, 1),
    ClassScheme.uniform(6, [range(6)]),
]


@pytest.mark.parametrize("scheme", SCHEMES, ids=lambda s: s.name or "single")
def test_invariants_during_decode(rng, scheme):
    m = 4
    for _ in range(10):
        data = SourceData.random(scheme.k, m, rng)
        rx = DecoderState(scheme, m)
        prev_known = rx.known.copy()
        prev_res = rx.residual.copy()
        while not rx.complete:
            p = source_encode(data, scheme, int(rng.integers(scheme.L)), rng)
            assert set(np.flatnonzero(p.global_vector(scheme))) <= set(scheme.classes[p.class_index])
            feed(rx, [p])
            assert np.all(rx.known >= prev_known)
            assert np.all(rx.residual <= prev_res)
            assert np.all(rx.rank <= scheme.sizes)
            for ell in np.flatnonzero(rx.decoded):
                assert rx.known[list(scheme.classes[ell])].all()
            prev_known, prev_res = rx.known.copy(), rx.residual.copy()
        assert np.array_equal(rx.data, data.packets)
        done = rx.residual_at_decode >= 0
        assert rx.residual_at_decode[done].sum() == scheme.k
        assert rx.ideal_ops_per_symbol() <= complexity_bound(scheme)
        rep = ops_per_symbol(rx)
        assert rep.idealized == rx.ideal_ops_per_symbol()
        assert rep.measured == rx.mults / (scheme.k * m)


def test_ops_examples(rng):
    data, rx = run_to_completion(make_chunked(24, 6), 3, rng)
    assert rx.ideal_ops_per_symbol() == 6
    data, rx = run_to_completion(ClassScheme.uniform(9, [range(9)]), 3, rng)
    assert rx.ideal_ops_per_symbol() == 9


def test_ops_before_completion():
    rx = DecoderState(make_chunked(4, 2), 2)
    with pytest.raises(DecodingIncompleteError):
        rx.ops_per_symbol()
    with pytest.raises(DecodingIncompleteError):
        rx.ideal_ops_per_symbol()


def test_corrupted_packet_detected(rng):
    s = make_chunked(4, 2)
    data = SourceData.random(4, 3, rng)
    rx = DecoderState(s, 3)
    rx.receive(packet(s, data, 0, [1, 0]))
    bad = packet(s, data, 0, [2, 0])
    bad.payload[0] ^= 1
    with pytest.raises(InconsistentSystemError):
        rx.receive(bad)


def test_wire_format_bytes():
    p = CodedPacket(258, np.array([1, 2, 3], np.uint8), np.array([9, 8], np.uint8))
    assert pack_packet(p) == b"\x01\x02\x01\x02\x03\x09\x08"
    s = ClassScheme.uniform(3, [[0, 1, 2]] * 1 + [[0]])
    q = CodedPacket(1, np.array([7], np.uint8), np.array([5, 6], np.uint8))
    buf = encode_stream(2, [q])
    assert buf == b"OVC1\x00\x00\x00\x02\x00\x01\x07\x05\x06"
    fp = io.BytesIO()
    write_stream(fp, 2, [q])
    assert fp.getvalue() == buf
    m, back = decode_stream(buf, s)
    assert m == 2 and back == [q]


def test_wire_round_trip(rng):
    s = make_diag_grid(15, 3, 10, [0, 1])
    data = SourceData.random(15, 11, rng)
    pkts = [source_encode(data, s, int(rng.integers(s.L)), rng) for _ in range(40)]
    m, back = decode_stream(encode_stream(11, pkts), s)
    assert m == 11 and back == pkts


def test_wire_errors():
    s = make_chunked(4, 2)
    with pytest.raises(WireFormatError):
        decode_stream(b"XXXX\x00\x00\x00\x01", s)
    with pytest.raises(WireFormatError):
        decode_stream(b"OVC1\x00\x00", s)
    with pytest.raises(WireFormatError):
        decode_stream(b"OVC1\x00\x00\x00\x01\x00\x05\x01\x01\x01", s)
    with pytest.raises(WireFormatError):
        decode_stream(b"OVC1\x00\x00\x00\x01\x00\x01\x01", s)
    with pytest.raises(WireFormatError):
        decode_stream(b"OVC1\x00\x00\x00\x01\x00", s)
    with pytest.raises(WireFormatError):
        pack_packet(CodedPacket(1 << 16, np.zeros(1, np.uint8), np.zeros(1, np.uint8)))
