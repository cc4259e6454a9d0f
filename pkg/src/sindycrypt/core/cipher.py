"""置乱-扩散图像加密

加密：行列 argsort 置乱 -> 按行展平 -> r 轮扩散 (奇数轮正向、偶数轮反向，
每轮使用各自的 Q_k，iv 均为 0) -> 还原为 M×N。
解密按相反顺序执行各轮扩散的精确逆运算，再逆置乱。
"""
from dataclasses import dataclass, replace
from typing import Sequence, Union

import numpy as np

from sindycrypt.core.errors import InvalidParameterError, InvalidPermutationError
from sindycrypt.core.keystream import (
    DEFAULT_BURN_IN,
    Key,
    KeystreamLayout,
    generate_layout,
    permutation_indices,
)
from sindycrypt.core.maps import MapSpec

DEFAULT_ROUNDS = 4

ByteVector = Union[np.ndarray, Sequence[int], bytes]


@dataclass(frozen=True, eq=False)
class GrayImage:
    """8 位灰度图，pixels 形状为 (M, N)，按行存储"""
    pixels: np.ndarray

    def __post_init__(self):
        raw = np.asarray(self.pixels)
        if raw.ndim != 2 or raw.shape[0] < 1 or raw.shape[1] < 1:
            raise InvalidParameterError(f"图像必须是非空二维数组, 得到形状 {raw.shape}")
        if raw.dtype != np.uint8:
            if raw.size and (raw.min() < 0 or raw.max() > 255):
                raise InvalidParameterError("像素值必须在 0..255 之间")
            raw = raw.astype(np.uint8)
        arr = np.array(raw, dtype=np.uint8, order="C")
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @classmethod
    def from_bytes(cls, width: int, height: int, data: bytes) -> "GrayImage":
        if len(data) != width * height:
            raise InvalidParameterError(f"像素数 {len(data)} != {width}x{height}")
        return cls(np.frombuffer(data, dtype=np.uint8).reshape(height, width))

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def size(self) -> int:
        return self.pixels.size

    def to_bytes(self) -> bytes:
        return self.pixels.tobytes()

    def equals(self, other: "GrayImage") -> bool:
        return np.array_equal(self.pixels, other.pixels)


@dataclass(frozen=True)
class CipherConfig:
    map: MapSpec
    key: Key
    rounds: int = DEFAULT_ROUNDS
    burn_in: int = DEFAULT_BURN_IN

    def __post_init__(self):
        if self.rounds < 2 or self.rounds % 2:
            raise InvalidParameterError(f"扩散轮数必须是 >= 2 的偶数, 得到 {self.rounds}")
        if self.key.dim != self.map.dim:
            raise InvalidParameterError(
                f"密钥维度 {self.key.dim} 与映射维度 {self.map.dim} 不符"
            )

    def with_key(self, key: Key) -> "CipherConfig":
        return replace(self, key=key)

    def layout(self, height: int, width: int) -> KeystreamLayout:
        return generate_layout(self.map, self.key, height, width, self.rounds, self.burn_in)


# ==========================================
# 置乱
# ==========================================

def _check_permutation(idx: ByteVector, n: int, name: str) -> np.ndarray:
    arr = np.asarray(idx, dtype=np.int64)
    if arr.shape != (n,) or not np.array_equal(np.sort(arr), np.arange(n)):
        raise InvalidPermutationError(f"{name} 不是 0..{n - 1} 上的双射")
    return arr


def scramble(image: GrayImage, row_idx: ByteVector, col_idx: ByteVector) -> GrayImage:
    """S(i, j) = I(row_idx(i), col_idx(j))"""
    rows = _check_permutation(row_idx, image.height, "row_idx")
    cols = _check_permutation(col_idx, image.width, "col_idx")
    return GrayImage(image.pixels[np.ix_(rows, cols)])


def unscramble(image: GrayImage, row_idx: ByteVector, col_idx: ByteVector) -> GrayImage:
    """I(row_idx(i), col_idx(j)) = S(i, j)"""
    rows = _check_permutation(row_idx, image.height, "row_idx")
    cols = _check_permutation(col_idx, image.width, "col_idx")
    out = np.empty_like(image.pixels)
    out[np.ix_(rows, cols)] = image.pixels
    return GrayImage(out)


# ==========================================
# 扩散 (模 256 加法链)
# ==========================================

def _pair(a: ByteVector, q: ByteVector) -> tuple:
    a = np.frombuffer(a, dtype=np.uint8) if isinstance(a, (bytes, bytearray)) else np.asarray(a)
    q = np.frombuffer(q, dtype=np.uint8) if isinstance(q, (bytes, bytearray)) else np.asarray(q)
    if a.ndim != 1 or a.shape != q.shape:
        raise InvalidParameterError(f"长度不一致: {a.shape} vs {q.shape}")
    return a.astype(np.int64), q.astype(np.int64)


def _iv(iv: int) -> int:
    if not 0 <= int(iv) <= 255:
        raise InvalidParameterError(f"iv 必须是字节, 得到 {iv}")
    return int(iv)


def diffuse_forward(p: ByteVector, q: ByteVector, iv: int = 0) -> np.ndarray:
    """t(i) = (p(i) + q(i) + t(i-1)) mod 256，t(0) = iv

    链式加法展开后等于前缀和，这里直接用 cumsum 计算。
    """
    p, q = _pair(p, q)
    return ((np.cumsum(p + q) + _iv(iv)) % 256).astype(np.uint8)


def diffuse_backward(t: ByteVector, q: ByteVector) -> np.ndarray:
    """t2(i) = (t(i) + q(i) + t2(i+1)) mod 256，t2(P+1) = 0"""
    t, q = _pair(t, q)
    return (np.cumsum((t + q)[::-1])[::-1] % 256).astype(np.uint8)


def undiffuse_backward(c: ByteVector, q: ByteVector) -> np.ndarray:
    """diffuse_backward 的精确逆：t(i) = (c(i) - q(i) - c(i+1)) mod 256，c(P+1) = 0"""
    c, q = _pair(c, q)
    following = np.append(c[1:], 0)
    return ((c - q - following) % 256).astype(np.uint8)


def undiffuse_forward(t: ByteVector, q: ByteVector, iv: int = 0) -> np.ndarray:
    """diffuse_forward 的精确逆：p(i) = (t(i) - q(i) - t(i-1)) mod 256，t(0) = iv"""
    t, q = _pair(t, q)
    previous = np.insert(t[:-1], 0, _iv(iv))
    return ((t - q - previous) % 256).astype(np.uint8)


# ==========================================
# 加解密
# ==========================================

def encrypt_with_layout(image: GrayImage, layout: KeystreamLayout) -> GrayImage:
    row_idx = permutation_indices(layout.row_keys)
    col_idx = permutation_indices(layout.col_keys)
    vector = scramble(image, row_idx, col_idx).pixels.reshape(-1)
    for k, q in enumerate(layout.diffusion):
        vector = diffuse_forward(vector, q, 0) if k % 2 == 0 else diffuse_backward(vector, q)
    return GrayImage(vector.reshape(image.height, image.width))


def decrypt_with_layout(image: GrayImage, layout: KeystreamLayout) -> GrayImage:
    vector = image.pixels.reshape(-1)
    for k in reversed(range(layout.rounds)):
        q = layout.diffusion[k]
        vector = undiffuse_forward(vector, q, 0) if k % 2 == 0 else undiffuse_backward(vector, q)
    row_idx = permutation_indices(layout.row_keys)
    col_idx = permutation_indices(layout.col_keys)
    return unscramble(GrayImage(vector.reshape(image.height, image.width)), row_idx, col_idx)


def encrypt(image: GrayImage, cfg: CipherConfig) -> GrayImage:
    """Raises: KeyUnusableError 密钥导致映射发散"""
    return encrypt_with_layout(image, cfg.layout(image.height, image.width))


def decrypt(image: GrayImage, cfg: CipherConfig) -> GrayImage:
    """Raises: KeyUnusableError 密钥导致映射发散"""
    return decrypt_with_layout(image, cfg.layout(image.height, image.width))
