"""密钥流：由映射 + 初值密钥生成置乱序列与量化扩散序列

状态序列布局 (丢弃前 burn_in 个迭代值之后，状态从 1 开始编号)：
    R   = 状态 [1 .. M] 的第 1 个坐标
    C   = 状态 [M+1 .. M+N] 的第 2 个坐标 (一维映射用第 1 个坐标)
    Q_k = 状态 [M+N+(k-1)P+1 .. M+N+kP] 的第 1 个坐标量化后的字节
总长度 L = burn_in + M + N + r·P。
"""
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterable, Tuple

import numpy as np

from sindycrypt.core.errors import DivergenceError, InvalidParameterError, KeyUnusableError
from sindycrypt.core.maps import MapSpec, iterate

DEFAULT_BURN_IN = 500


@dataclass(frozen=True)
class Key:
    """显式密钥：映射的初始状态"""
    initial_state: Tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.initial_state)
        if not values:
            raise InvalidParameterError("密钥不能为空")
        if not all(math.isfinite(v) for v in values):
            raise InvalidParameterError(f"密钥必须为有限值: {values}")
        object.__setattr__(self, "initial_state", values)

    @property
    def dim(self) -> int:
        return len(self.initial_state)

    def perturbed(self, coordinate: int, magnitude: float) -> "Key":
        if not 0 <= coordinate < self.dim:
            raise InvalidParameterError(f"坐标序号 {coordinate} 越界 (维度 {self.dim})")
        values = list(self.initial_state)
        values[coordinate] += magnitude
        return Key(tuple(values))


@dataclass(frozen=True, eq=False)
class KeystreamLayout:
    row_keys: np.ndarray
    col_keys: np.ndarray
    diffusion: Tuple[np.ndarray, ...]
    length: int
    burn_in: int
    offsets: Dict[str, int] = field(default_factory=dict)

    @property
    def rounds(self) -> int:
        return len(self.diffusion)

    def keystream_bytes(self) -> bytes:
        """Q_1..Q_r 按轮次顺序拼接"""
        return b"".join(q.tobytes() for q in self.diffusion)


def quantize(xi: float) -> int:
    """floor(frac(|xi|) × 256)"""
    if not math.isfinite(xi):
        raise InvalidParameterError(f"量化输入必须为有限值, 得到 {xi}")
    return int(math.fmod(abs(xi), 1.0) * 256.0)


def quantize_array(values: np.ndarray) -> np.ndarray:
    """quantize 的向量化版本，与逐元素结果一致"""
    values = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise InvalidParameterError("量化输入包含非有限值")
    return np.floor(np.fmod(np.abs(values), 1.0) * 256.0).astype(np.uint8)


def permutation_indices(keys: Iterable[float]) -> np.ndarray:
    """升序 argsort (0 起始)，相等元素保持原有先后顺序"""
    arr = np.asarray(list(keys), dtype=np.float64)
    if arr.size == 0:
        raise InvalidParameterError("置乱序列不能为空")
    return np.argsort(arr, kind="stable")


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@lru_cache(maxsize=16)
def generate_layout(spec: MapSpec, key: Key, M: int, N: int, rounds: int,
                    burn_in: int = DEFAULT_BURN_IN) -> KeystreamLayout:
    """生成置乱与扩散所需的全部序列

    相同参数返回同一个只读对象，多次试验只迭代一次。

    Raises:
        KeyUnusableError: 迭代过程中发散
    """
    if M < 1 or N < 1:
        raise InvalidParameterError(f"图像尺寸必须为正, 得到 {M}x{N}")
    if rounds < 1:
        raise InvalidParameterError(f"扩散轮数必须 >= 1, 得到 {rounds}")
    if key.dim != spec.dim:
        raise InvalidParameterError(f"密钥维度 {key.dim} 与映射维度 {spec.dim} 不符")
    P = M * N
    total = M + N + rounds * P
    try:
        states = iterate(spec, key.initial_state, total, burn_in).states
    except DivergenceError as e:
        raise KeyUnusableError(f"密钥 {key.initial_state} 不可用: {e}") from e

    col_coord = 1 if spec.dim >= 2 else 0
    q_start = M + N
    diffusion = tuple(
        _readonly(quantize_array(states[q_start + k * P: q_start + (k + 1) * P, 0]))
        for k in range(rounds)
    )
    return KeystreamLayout(
        row_keys=_readonly(states[:M, 0].copy()),
        col_keys=_readonly(states[M:M + N, col_coord].copy()),
        diffusion=diffusion,
        length=burn_in + total,
        burn_in=burn_in,
        offsets={"R": 0, "C": M, "Q": q_start},
    )

