"""Constellations, bit mapping, and Alamouti block structure."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from risrsm.modem import (
    AlamoutiCodeword,
    ConstellationKind,
    Scheme,
    SystemConfig,
    build_constellation,
    encode_alamouti,
    frame_bit_count,
    frame_labels,
    merge_bits,
    spectral_efficiency,
    split_bits,
)


def cfg_asbc(n=64, nr=2, m=2, kind=ConstellationKind.PSK):
    return SystemConfig(Scheme.RIS_RSM_ASBC, n, nr, m, kind)


def cfg_rsm(n=64, nr=2, m=2, kind=ConstellationKind.PSK):
    return SystemConfig(Scheme.RIS_RSM, n, nr, m, kind)


class TestConstellation:
    def test_bpsk_points(self):
        const = build_constellation(2, ConstellationKind.PSK)
        np.testing.assert_allclose(const.points, [1.0, -1.0], atol=1e-15)

    def test_qpsk_points_and_gray_labels(self):
        const = build_constellation(4, ConstellationKind.PSK)
        expected = np.exp(1j * np.array([np.pi / 4, 3 * np.pi / 4, 5 * np.pi / 4, 7 * np.pi / 4]))
        np.testing.assert_allclose(const.points, expected, atol=1e-15)
        assert list(const.labels) == [0b00, 0b01, 0b11, 0b10]

    def test_16qam_scale(self):
        # mean energy of the odd-integer 4x4 grid is 10 before scaling
        raw = np.array([a + 1j * b for a in (-3, -1, 1, 3) for b in (-3, -1, 1, 3)])
        assert np.mean(np.abs(raw) ** 2) == pytest.approx(10.0)
        const = build_constellation(16, ConstellationKind.QAM)
        scaled = sorted(np.abs(np.unique(np.round(const.points.real, 12))))
        assert scaled[-1] == pytest.approx(3 / math.sqrt(10), abs=1e-12)

    @pytest.mark.parametrize(
        "order,kind",
        [(2, ConstellationKind.PSK), (4, ConstellationKind.PSK), (8, ConstellationKind.PSK),
         (16, ConstellationKind.PSK), (4, ConstellationKind.QAM), (16, ConstellationKind.QAM),
         (64, ConstellationKind.QAM)],
    )
    def test_unit_energy(self, order, kind):
        const = build_constellation(order, kind)
        assert abs(np.mean(np.abs(const.points) ** 2) - 1.0) < 1e-12

    @pytest.mark.parametrize("order", [2, 4, 8, 16, 32])
    def test_psk_gray_adjacency(self, order):
        const = build_constellation(order, ConstellationKind.PSK)
        if order == 2:
            pairs = [(0, 1)]
        else:
            pairs = [(k, (k + 1) % order) for k in range(order)]
        for a, b in pairs:
            diff = int(const.labels[a]) ^ int(const.labels[b])
            assert bin(diff).count("1") == 1

    @pytest.mark.parametrize("order", [16, 64])
    def test_qam_gray_adjacency(self, order):
        const = build_constellation(order, ConstellationKind.QAM)
        side = math.isqrt(order)
        grid = const.labels.reshape(side, side)
        for r in range(side):
            for c in range(side):
                for rr, cc in ((r + 1, c), (r, c + 1)):
                    if rr < side and cc < side:
                        diff = int(grid[r, c]) ^ int(grid[rr, cc])
                        assert bin(diff).count("1") == 1

    def test_label_round_trip(self):
        const = build_constellation(16, ConstellationKind.QAM)
        for k in range(16):
            assert const.label_to_index[const.labels[k]] == k

    def test_rejects_non_power_of_two(self):
        with pytest.raises(ValueError, match="power of two"):
            build_constellation(3, ConstellationKind.PSK)

    def test_rejects_rectangular_qam(self):
        with pytest.raises(ValueError, match="square"):
            build_constellation(8, ConstellationKind.QAM)


class TestAlamouti:
    def test_structure_example(self):
        cw = encode_alamouti(1, 1j)
        np.testing.assert_allclose(cw.matrix, [[1, 1j], [1j, 1]], atol=1e-15)

    def test_zero_block(self):
        cw = encode_alamouti(0, 0)
        s = cw.matrix
        np.testing.assert_allclose(s.conj().T @ s, np.zeros((2, 2)), atol=1e-15)

    @settings(max_examples=50, deadline=None)
    @given(
        st.tuples(
            st.floats(-3, 3, allow_nan=False),
            st.floats(-3, 3, allow_nan=False),
            st.floats(-3, 3, allow_nan=False),
            st.floats(-3, 3, allow_nan=False),
        )
    )
    def test_orthogonality(self, reim):
        s1 = complex(reim[0], reim[1])
        s2 = complex(reim[2], reim[3])
        s = encode_alamouti(s1, s2).matrix
        gram = s.conj().T @ s
        target = (abs(s1) ** 2 + abs(s2) ** 2) * np.eye(2)
        assert np.abs(gram - target).max() < 1e-12


class TestBitMapping:
    def test_split_example(self):
        cfg = cfg_asbc(nr=4, m=2)
        m, k1, k2 = split_bits([1, 0, 1, 0], cfg)
        assert (m, k1, k2) == (3, 1, 0)

    def test_degenerate_single_antenna(self):
        cfg = cfg_asbc(nr=1, m=4)
        m, k1, k2 = split_bits([0, 1, 1, 0], cfg)
        assert m == 1

    def test_wrong_length_rejected(self):
        with pytest.raises(ValueError, match="bits"):
            split_bits([0, 1], cfg_asbc(nr=2, m=2))

    @pytest.mark.parametrize("nr,m", [(2, 2), (4, 4), (1, 8), (8, 2)])
    def test_round_trip_exhaustive(self, nr, m):
        cfg = cfg_asbc(nr=nr, m=m)
        nbits = frame_bit_count(cfg)
        seen = set()
        for value in range(2**nbits):
            bits = [(value >> (nbits - 1 - i)) & 1 for i in range(nbits)]
            ant, k1, k2 = split_bits(bits, cfg)
            assert 1 <= ant <= nr and 0 <= k1 < m and 0 <= k2 < m
            seen.add((ant, k1, k2))
            assert list(merge_bits(ant, k1, k2, cfg)) == bits
        assert len(seen) == 2**nbits  # bijection

    def test_rsm_round_trip(self):
        cfg = cfg_rsm(nr=4, m=4)
        nbits = frame_bit_count(cfg)
        for value in range(2**nbits):
            bits = [(value >> (nbits - 1 - i)) & 1 for i in range(nbits)]
            ant, k1, k2 = split_bits(bits, cfg)
            assert k2 is None
            assert list(merge_bits(ant, k1, None, cfg)) == bits

    def test_frame_labels_count(self):
        cfg = cfg_asbc(nr=2, m=2)
        assert len(frame_labels(cfg)) == 2 ** frame_bit_count(cfg)


class TestConfig:
    def test_spectral_efficiency_examples(self):
        assert spectral_efficiency(cfg_asbc(nr=4, m=4)) == 3.0
        assert spectral_efficiency(cfg_asbc(nr=2, m=2)) == 1.5
        assert spectral_efficiency(cfg_rsm(nr=4, m=8)) == 5.0

    def test_odd_reflectors_rejected_for_coded_scheme(self):
        with pytest.raises(ValueError, match="even"):
            cfg_asbc(n=63)

    def test_odd_reflectors_allowed_for_baseline(self):
        cfg_rsm(n=63)

    def test_non_pow2_antennas_rejected(self):
        with pytest.raises(ValueError, match="Nr"):
            cfg_asbc(nr=3)

    def test_non_pow2_order_rejected(self):
        with pytest.raises(ValueError, match="M"):
            cfg_asbc(m=6)
