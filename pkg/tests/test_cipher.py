import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sindycrypt.core.analysis import chi_square, entropy, histogram, npcr_uaci, psnr
from sindycrypt.core.cipher import (
    CipherConfig,
    GrayImage,
    decrypt,
    diffuse_backward,
    diffuse_forward,
    encrypt,
    scramble,
    undiffuse_backward,
    undiffuse_forward,
    unscramble,
)
from sindycrypt.core.errors import InvalidParameterError, InvalidPermutationError
from sindycrypt.core.keystream import Key
from sindycrypt.core.maps import builtin_henon, builtin_logistic3d

byte_vectors = st.integers(1, 300).flatmap(
    lambda n: st.tuples(arrays(np.uint8, n), arrays(np.uint8, n))
)
images = arrays(np.uint8, st.tuples(st.integers(1, 12), st.integers(1, 12)))


class TestGrayImage:
    def test_from_bytes(self):
        image = GrayImage.from_bytes(3, 2, bytes(range(6)))
        assert (image.height, image.width, image.size) == (2, 3, 6)
        assert image.pixels.tolist() == [[0, 1, 2], [3, 4, 5]]
        assert image.to_bytes() == bytes(range(6))

    def test_validation(self):
        with pytest.raises(InvalidParameterError):
            GrayImage(np.zeros((0, 4), dtype=np.uint8))
        with pytest.raises(InvalidParameterError):
            GrayImage(np.array([[0, 256]]))
        with pytest.raises(InvalidParameterError):
            GrayImage.from_bytes(2, 2, b"\x00\x01\x02")


class TestScramble:
    def test_example(self):
        image = GrayImage(np.array([[1, 2], [3, 4]], dtype=np.uint8))
        scrambled = scramble(image, [1, 0], [0, 1])
        assert scrambled.pixels.tolist() == [[3, 4], [1, 2]]
        assert unscramble(scrambled, [1, 0], [0, 1]).equals(image)

    def test_columns(self):
        image = GrayImage(np.array([[1, 2, 3]], dtype=np.uint8))
        assert scramble(image, [0], [2, 0, 1]).pixels.tolist() == [[3, 1, 2]]

    @pytest.mark.parametrize("rows, cols", [([0, 0], [0, 1]), ([0, 1], [1, 2]), ([0], [0, 1])])
    def test_not_a_bijection(self, rows, cols):
        image = GrayImage(np.zeros((2, 2), dtype=np.uint8))
        with pytest.raises(InvalidPermutationError):
            scramble(image, rows, cols)

    @given(images, st.randoms(use_true_random=False))
    @settings(max_examples=50)
    def test_inverse(self, pixels, rnd):
        image = GrayImage(pixels)
        rows = list(range(image.height))
        cols = list(range(image.width))
        rnd.shuffle(rows)
        rnd.shuffle(cols)
        assert unscramble(scramble(image, rows, cols), rows, cols).equals(image)

    @given(images, st.randoms(use_true_random=False))
    @settings(max_examples=50)
    def test_preserves_histogram(self, pixels, rnd):
        image = GrayImage(pixels)
        rows = rnd.sample(range(image.height), image.height)
        cols = rnd.sample(range(image.width), image.width)
        assert np.array_equal(histogram(scramble(image, rows, cols)), histogram(image))


class TestDiffusion:
    def test_forward_example(self):
        assert diffuse_forward([1, 2, 3], [0, 0, 0]).tolist() == [1, 3, 6]
        assert diffuse_forward([1, 2, 3], [0, 0, 0], iv=5).tolist() == [6, 8, 11]

    def test_forward_wraps(self):
        assert diffuse_forward([200, 100], [100, 0]).tolist() == [44, 144]

    def test_backward_example(self):
        assert diffuse_backward([1, 2, 3], [0, 0, 0]).tolist() == [6, 5, 3]
        assert diffuse_backward([255, 1], [1, 0]).tolist() == [1, 1]

    def test_bytes_input(self):
        assert diffuse_forward(b"\x01\x02", b"\x00\x00").tolist() == [1, 3]

    def test_length_mismatch(self):
        with pytest.raises(InvalidParameterError):
            diffuse_forward([1, 2, 3], [0, 0])
        with pytest.raises(InvalidParameterError):
            undiffuse_backward([1, 2], [0, 0, 0])

    def test_bad_iv(self):
        with pytest.raises(InvalidParameterError):
            diffuse_forward([1], [1], iv=256)

    @given(byte_vectors, st.integers(0, 255))
    @settings(max_examples=100)
    def test_forward_inverse(self, pq, iv):
        p, q = pq
        assert np.array_equal(undiffuse_forward(diffuse_forward(p, q, iv), q, iv), p)

    @given(byte_vectors)
    @settings(max_examples=100)
    def test_backward_inverse(self, tq):
        t, q = tq
        assert np.array_equal(undiffuse_backward(diffuse_backward(t, q), q), t)


class TestEncryptDecrypt:
    @given(images)
    @settings(max_examples=100, deadline=None)
    def test_round_trip(self, cipher_config, pixels):
        image = GrayImage(pixels)
        assert decrypt(encrypt(image, cipher_config), cipher_config).equals(image)

    def test_single_pixel(self, cipher_config):
        image = GrayImage(np.array([[77]], dtype=np.uint8))
        cipher = encrypt(image, cipher_config)
        assert decrypt(cipher, cipher_config).equals(image)

    def test_deterministic(self, small_image, cipher_config):
        assert encrypt(small_image, cipher_config).equals(encrypt(small_image, cipher_config))

    def test_changes_image(self, small_image, cipher_config):
        assert not encrypt(small_image, cipher_config).equals(small_image)

    def test_three_dimensional_map(self, small_image):
        cfg = CipherConfig(builtin_logistic3d(), Key((0.2, 0.3, 0.4)))
        assert decrypt(encrypt(small_image, cfg), cfg).equals(small_image)

    def test_more_rounds(self, small_image, henon):
        cfg = CipherConfig(henon, Key((0.2, 0.3)), rounds=6)
        assert decrypt(encrypt(small_image, cfg), cfg).equals(small_image)

    @pytest.mark.parametrize("rounds", [0, 1, 3])
    def test_rounds_must_be_even(self, henon, rounds):
        with pytest.raises(InvalidParameterError):
            CipherConfig(henon, Key((0.2, 0.3)), rounds=rounds)

    def test_key_dimension(self, henon):
        with pytest.raises(InvalidParameterError):
            CipherConfig(henon, Key((0.2, 0.3, 0.4)))


@pytest.mark.slow
class TestStandInImage:
    def test_round_trip(self, moon, moon_cipher, cipher_config):
        assert decrypt(moon_cipher, cipher_config).equals(moon)

    def test_cipher_histogram_is_flat(self, moon_cipher):
        assert entropy(moon_cipher) >= 7.99
        assert chi_square(moon_cipher).statistic < 350

    def test_wrong_key_yields_noise(self, moon, moon_cipher, cipher_config):
        wrong = cipher_config.with_key(Key((0.2 + 1e-10, 0.3)))
        assert psnr(decrypt(moon_cipher, wrong), moon) < 12

    def test_model_coefficients_act_as_key(self, moon, moon_cipher):
        other = CipherConfig(builtin_henon(1.4 + 1e-4, 0.3), Key((0.2, 0.3)))
        npcr, uaci = npcr_uaci(moon_cipher, encrypt(moon, other))
        assert 99.4 <= npcr <= 99.9
        assert 32.5 <= uaci <= 34.5
