import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gsdetect.modem import bit_metrics, demap_hard, get_constellation, lambda_b, lambda_brute, map_bits, qam

from oracles import label_bit, lambda_reference, qam_reference

ALL_B = (2, 4, 6)


@pytest.mark.parametrize("B", ALL_B)
def test_matches_reference_constellation(B):
    ref = qam_reference(B)
    c = qam(B)
    np.testing.assert_allclose(c.points, [ref[label] for label in range(2**B)], atol=1e-15)


@pytest.mark.parametrize("B", ALL_B)
def test_unit_energy(B):
    assert np.mean(np.abs(qam(B).points) ** 2) == pytest.approx(1.0, abs=1e-12)


def test_qpsk_unit_magnitude():
    np.testing.assert_allclose(np.abs(map_bits([0, 0, 0, 1, 1, 0, 1, 1], qam(2))), 1.0)


def test_64qam_point_set():
    amps = np.array([-7, -5, -3, -1, 1, 3, 5, 7]) / np.sqrt(42)
    expected = {complex(round(a, 12), round(b, 12)) for a in amps for b in amps}
    got = {complex(round(p.real, 12), round(p.imag, 12)) for p in qam(6).points}
    assert got == expected


@pytest.mark.parametrize("B", ALL_B)
def test_gray_neighbours_differ_in_one_bit(B):
    c = qam(B)
    pts = c.points
    dmin = np.min(np.abs(pts[:, None] - pts[None, :])[~np.eye(pts.size, dtype=bool)])
    for i, j in itertools.combinations(range(pts.size), 2):
        if abs(abs(pts[i] - pts[j]) - dmin) < 1e-9:
            assert bin(int(c.labels[i]) ^ int(c.labels[j])).count("1") == 1


@pytest.mark.parametrize("B", ALL_B)
def test_map_demap_roundtrip(B):
    c = qam(B)
    bits = c.label_bits.ravel()
    np.testing.assert_array_equal(demap_hard(map_bits(bits, c), c), bits)


def test_map_rejects_partial_symbol():
    with pytest.raises(ValueError):
        map_bits([0, 1, 1], qam(2))


def test_get_constellation_names():
    assert get_constellation("QPSK") is qam(2)
    assert get_constellation("16-QAM") is qam(4)
    assert get_constellation(6) is qam(6)
    with pytest.raises(ValueError):
        get_constellation("8psk")
    with pytest.raises(ValueError):
        qam(3)


def test_qpsk_sign_at_bit_one_point():
    # positive metric means bit 1 (min over 0-points minus min over 1-points)
    c = qam(2)
    for label, point in enumerate(c.points):
        for b in range(2):
            value = float(lambda_b(point, b, c))
            if label_bit(label, b, 2):
                assert value > 0
            else:
                assert value < 0


def test_equidistant_point_gives_zero():
    c = qam(2)
    # Re(z) = 0 is halfway between the 0- and 1-labelled columns for bit 0
    assert lambda_b(0.3j, 0, c) == 0.0
    assert lambda_brute(0.3j, 0, c) == 0.0
    c16 = qam(4)
    assert lambda_b(0.0 + 0.2j, 0, c16) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("B", ALL_B)
def test_fast_equals_brute_random(B):
    rng = np.random.default_rng(B)
    z = 1.5 * (rng.standard_normal(10_000) + 1j * rng.standard_normal(10_000))
    c = qam(B)
    for b in range(B):
        assert np.max(np.abs(lambda_b(z, b, c) - lambda_brute(z, b, c))) < 1e-12


@pytest.mark.parametrize("B", ALL_B)
def test_brute_matches_loop_oracle(B):
    rng = np.random.default_rng(100 + B)
    z = rng.standard_normal(40) + 1j * rng.standard_normal(40)
    c = qam(B)
    for b in range(B):
        ref = [lambda_reference(v, b, B) for v in z]
        np.testing.assert_allclose(lambda_brute(z, b, c), ref, atol=1e-12)


def test_bit_index_range():
    with pytest.raises(IndexError):
        lambda_b(0.1, 6, qam(6))
    with pytest.raises(IndexError):
        lambda_brute(0.1, -1, qam(6))
    with pytest.raises(ValueError):
        lambda_b(0.1, 0, qam(6), method="table")


def test_bit_metrics_layout():
    c = qam(6)
    z = np.array([[0.1 + 0.7j, -0.9 - 0.2j]])
    m = bit_metrics(z, c)
    assert m.shape == (1, 2, 6)
    for b in range(6):
        np.testing.assert_allclose(m[..., b], lambda_brute(z, b, c), atol=1e-12)


def test_axis_separability():
    c = qam(6)
    for b in range(3):
        assert lambda_b(0.3 + 0.1j, b, c) == lambda_b(0.3 - 0.9j, b, c)
        assert lambda_b(0.1 + 0.3j, b + 3, c) == lambda_b(-0.9 + 0.3j, b + 3, c)


@settings(max_examples=200, deadline=None)
@given(
    B=st.sampled_from(ALL_B),
    label=st.integers(0, 63),
    dx=st.floats(-0.04, 0.04),
    dy=st.floats(-0.04, 0.04),
)
def test_sign_matches_nearest_point(B, label, dx, dy):
    c = qam(B)
    label %= 2**B
    z = c.points[label] + complex(dx, dy)
    bits = demap_hard(z, c)
    for b in range(B):
        assert (lambda_b(z, b, c) > 0) == bool(bits[b])
