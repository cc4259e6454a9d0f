"""确定性随机数生成器

SplitMix64 状态流 + Box-Muller 变换。所有带种子的操作 (噪声注入、相关性采样、
差分攻击选点) 都走这里，保证跨平台逐位可复现。
"""
import math
from typing import List, Tuple

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN_GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    """SplitMix64 生成器 (64 位状态，无共享全局状态)"""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN_GAMMA) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def random(self) -> float:
        """[0, 1) 上的均匀双精度数 (53 位尾数)"""
        return (self.next_u64() >> 11) * (1.0 / 9007199254740992.0)

    def randbelow(self, n: int) -> int:
        """[0, n) 上的均匀整数 (乘移位映射)"""
        if n <= 0:
            raise ValueError(f"randbelow 需要正整数上界, 得到 {n}")
        return (self.next_u64() * n) >> 64

    def gauss_pair(self) -> Tuple[float, float]:
        """Box-Muller 变换，一次产出两个独立的标准正态数"""
        # u1 取 (0, 1]，避免 log(0)
        u1 = 1.0 - self.random()
        u2 = self.random()
        radius = math.sqrt(-2.0 * math.log(u1))
        angle = 2.0 * math.pi * u2
        return radius * math.cos(angle), radius * math.sin(angle)

    def normal(self, count: int) -> List[float]:
        """按消费顺序产出 count 个标准正态数 (奇数个时丢弃最后一对的第二个)"""
        out: List[float] = []
        while len(out) < count:
            out.extend(self.gauss_pair())
        del out[count:]
        return out


def derive_seed(seed: int, index: int) -> int:
    """由基础种子与试验序号派生独立子种子"""
    return SplitMix64(seed + index).next_u64()
