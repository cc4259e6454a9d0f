import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sindycrypt.core.errors import InvalidParameterError, KeyUnusableError
from sindycrypt.core.keystream import (
    Key,
    generate_layout,
    permutation_indices,
    quantize,
    quantize_array,
)
from sindycrypt.core.maps import Factor, MapSpec, Term, builtin_logistic3d, iterate


class TestQuantize:
    @pytest.mark.parametrize("value, expected", [
        (0.2, 51), (0.3, 76), (0.0, 0), (1.0, 0), (-0.999, 255), (-0.2, 51),
    ])
    def test_examples(self, value, expected):
        assert quantize(value) == expected

    @pytest.mark.parametrize("value", [float("nan"), float("inf"), float("-inf")])
    def test_non_finite(self, value):
        with pytest.raises(InvalidParameterError):
            quantize(value)

    def test_array_matches_scalar(self):
        values = np.random.default_rng(5).uniform(-50, 50, 2000)
        expected = [quantize(v) for v in values]
        assert quantize_array(values).tolist() == expected
        assert quantize_array(values).dtype == np.uint8

    @given(m=st.integers(0, 2 ** 20 - 1), k=st.integers(0, 1000))
    @settings(max_examples=200)
    def test_integer_shift_invariance(self, m, k):
        x = m / 2 ** 20
        assert quantize(x + k) == quantize(x)
        assert 0 <= quantize(x) <= 255

    @given(st.floats(-1e9, 1e9, allow_nan=False))
    @settings(max_examples=200)
    def test_range(self, value):
        assert 0 <= quantize(value) <= 255


class TestPermutation:
    def test_example(self):
        assert permutation_indices([0.3, 0.1, 0.2]).tolist() == [1, 2, 0]

    def test_sorted_is_identity(self):
        assert permutation_indices([0.1, 0.2, 0.3, 0.4]).tolist() == [0, 1, 2, 3]

    def test_ties_keep_order(self):
        assert permutation_indices([0.5, 0.1, 0.5, 0.1]).tolist() == [1, 3, 0, 2]

    def test_empty(self):
        with pytest.raises(InvalidParameterError):
            permutation_indices([])

    @given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=200))
    @settings(max_examples=100)
    def test_bijection(self, keys):
        idx = permutation_indices(keys)
        assert sorted(idx.tolist()) == list(range(len(keys)))
        ordered = [keys[i] for i in idx]
        assert ordered == sorted(keys)


class TestLayout:
    def test_small_example(self, henon):
        layout = generate_layout(henon, Key((0.1, 0.1)), 1, 1, 1, burn_in=0)
        assert layout.row_keys.tolist() == pytest.approx([1.086], abs=1e-15)
        assert layout.col_keys.tolist() == pytest.approx([0.3258], abs=1e-15)
        assert layout.diffusion[0].tolist() == [201]
        assert layout.length == 3
        assert layout.offsets == {"R": 0, "C": 1, "Q": 2}

    def test_lengths(self, henon):
        layout = generate_layout(henon, Key((0.2, 0.3)), 6, 9, 4, burn_in=20)
        assert layout.row_keys.shape == (6,)
        assert layout.col_keys.shape == (9,)
        assert [q.shape for q in layout.diffusion] == [(54,)] * 4
        assert layout.length == 20 + 6 + 9 + 4 * 54
        assert len(layout.keystream_bytes()) == 4 * 54

    def test_matches_trajectory(self, henon):
        layout = generate_layout(henon, Key((0.2, 0.3)), 4, 5, 2, burn_in=10)
        states = iterate(henon, (0.2, 0.3), 4 + 5 + 2 * 20, burn_in=10).states
        assert np.array_equal(layout.row_keys, states[:4, 0])
        assert np.array_equal(layout.col_keys, states[4:9, 1])
        assert np.array_equal(layout.diffusion[1], quantize_array(states[29:49, 0]))

    def test_cached(self, henon):
        key = Key((0.2, 0.3))
        assert generate_layout(henon, key, 8, 8, 2) is generate_layout(henon, key, 8, 8, 2)

    def test_read_only(self, henon):
        layout = generate_layout(henon, Key((0.2, 0.3)), 8, 8, 2)
        with pytest.raises(ValueError):
            layout.row_keys[0] = 0.0
        with pytest.raises(ValueError):
            layout.diffusion[0][0] = 0

    def test_more_rounds_extend_prefix(self, henon):
        key = Key((0.2, 0.3))
        short = generate_layout(henon, key, 8, 8, 2)
        long = generate_layout(henon, key, 8, 8, 4)
        assert np.array_equal(short.row_keys, long.row_keys)
        assert np.array_equal(short.col_keys, long.col_keys)
        for a, b in zip(short.diffusion, long.diffusion):
            assert np.array_equal(a, b)

    def test_key_dimension(self, henon):
        with pytest.raises(InvalidParameterError):
            generate_layout(henon, Key((0.2, 0.3, 0.4)), 4, 4, 2)
        with pytest.raises(InvalidParameterError):
            generate_layout(builtin_logistic3d(), Key((0.2, 0.3)), 4, 4, 2)

    def test_divergent_key(self, henon):
        with pytest.raises(KeyUnusableError):
            generate_layout(henon, Key((10.0, 10.0)), 4, 4, 2)

    def test_one_dimensional_map(self):
        logistic = MapSpec(((Term(3.9, (Factor(0),)), Term(-3.9, (Factor(0, 2),))),))
        layout = generate_layout(logistic, Key((0.3,)), 2, 3, 2, burn_in=5)
        states = iterate(logistic, (0.3,), 2 + 3 + 12, burn_in=5).states
        assert np.array_equal(layout.col_keys, states[2:5, 0])

    @pytest.mark.parametrize("M, N, rounds", [(0, 4, 2), (4, 0, 2), (4, 4, 0)])
    def test_bad_sizes(self, henon, M, N, rounds):
        with pytest.raises(InvalidParameterError):
            generate_layout(henon, Key((0.2, 0.3)), M, N, rounds)

    @pytest.mark.slow
    def test_tiny_key_change_rewrites_keystream(self, henon):
        base = generate_layout(henon, Key((0.2, 0.3)), 256, 256, 1)
        moved = generate_layout(henon, Key((0.2 + 1e-16, 0.3)), 256, 256, 1)
        differing = np.count_nonzero(base.diffusion[0] != moved.diffusion[0])
        assert differing / base.diffusion[0].size > 0.99


class TestKey:
    def test_perturbed(self):
        key = Key((0.5, 0.25))
        assert key.perturbed(1, 0.25).initial_state == (0.5, 0.5)
        assert key.perturbed(0, 1e-20) == key

    def test_validation(self):
        with pytest.raises(InvalidParameterError):
            Key(())
        with pytest.raises(InvalidParameterError):
            Key((float("nan"), 0.1))
        with pytest.raises(InvalidParameterError):
            Key((0.2, 0.3)).perturbed(2, 1e-3)
