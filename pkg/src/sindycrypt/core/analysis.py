"""安全性分析：直方图、χ²、相邻像素相关性、信息熵、NPCR/UACI、PSNR，
以及密钥敏感性、差分攻击、隐式密钥三类实验
"""
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel
from scipy.special import gammaincc

from sindycrypt.core.cipher import (
    CipherConfig,
    GrayImage,
    decrypt,
    encrypt,
    encrypt_with_layout,
)
from sindycrypt.core.errors import (
    InvalidParameterError,
    SindyCryptError,
    UndefinedCorrelationError,
)
from sindycrypt.core.identify import (
    DEFAULT_LAMBDA,
    DEFAULT_SIGNIFICANCE,
    CandidateLibrary,
    build_library,
    sindy_pi_fit,
)
from sindycrypt.core.keystream import Key
from sindycrypt.core.maps import MapSpec, add_gaussian_noise, builtin_henon, iterate
from sindycrypt.core.rng import SplitMix64, derive_seed

# 自由度 255、显著性 0.05 的 χ² 临界值
CHI2_CRITICAL = 293.25
CHI2_DOF = 255
DEFAULT_PAIRS = 5000
DEFAULT_SEED = 2024
DEFAULT_TRIALS = 50


class Direction(str, Enum):
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"
    DIAGONAL = "diagonal"


_OFFSETS = {
    Direction.HORIZONTAL: (0, 1),
    Direction.VERTICAL: (1, 0),
    Direction.DIAGONAL: (1, 1),
}


# ==========================================
# 单图统计
# ==========================================

def histogram(image: GrayImage) -> np.ndarray:
    return np.bincount(image.pixels.ravel(), minlength=256).astype(np.int64)


def entropy(image: GrayImage) -> float:
    """香农熵 (bit)，空箱跳过"""
    counts = histogram(image)
    p = counts[counts > 0] / image.size
    return float(-np.sum(p * np.log2(p))) + 0.0


class ChiSquare(BaseModel):
    statistic: float
    p_value: float
    passed: bool


def chi_square(image: GrayImage) -> ChiSquare:
    """均匀分布拟合优度检验，p 值取正则化上不完全 Γ 函数 Q(255/2, χ²/2)"""
    expected = image.size / 256.0
    observed = histogram(image).astype(np.float64)
    statistic = float(np.sum((observed - expected) ** 2) / expected)
    p_value = float(gammaincc(CHI2_DOF / 2.0, statistic / 2.0))
    return ChiSquare(statistic=statistic, p_value=p_value, passed=statistic < CHI2_CRITICAL)


def sample_adjacent_pairs(image: GrayImage, direction: Union[Direction, str], pairs: int,
                          seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """有放回地均匀抽取锚点 (i, j)，返回 (I(i, j), I(邻居)) 两列"""
    di, dj = _OFFSETS[Direction(direction)]
    rows, cols = image.height - di, image.width - dj
    anchors = rows * cols
    if pairs < 1:
        raise InvalidParameterError(f"pairs 必须 >= 1, 得到 {pairs}")
    if rows < 1 or cols < 1:
        raise InvalidParameterError(
            f"{image.height}x{image.width} 图像没有 {Direction(direction).value} 方向的相邻像素对"
        )
    rng = SplitMix64(seed)
    picks = np.array([rng.randbelow(anchors) for _ in range(pairs)], dtype=np.int64)
    i, j = picks // cols, picks % cols
    return image.pixels[i, j], image.pixels[i + di, j + dj]


def adjacent_correlation(image: GrayImage, direction: Union[Direction, str],
                         pairs: int = DEFAULT_PAIRS, seed: int = DEFAULT_SEED) -> float:
    """r_xy = cov(x, y) / sqrt(D(x) D(y))，方差与协方差均按 1/P 归一

    Raises:
        UndefinedCorrelationError: 任一边缘方差为 0
    """
    x, y = (a.astype(np.float64) for a in sample_adjacent_pairs(image, direction, pairs, seed))
    dx = x - x.mean()
    dy = y - y.mean()
    var_x, var_y = float(np.mean(dx * dx)), float(np.mean(dy * dy))
    if var_x == 0.0 or var_y == 0.0:
        raise UndefinedCorrelationError(f"{Direction(direction).value} 方向方差为 0，相关系数无定义")
    return float(np.mean(dx * dy)) / math.sqrt(var_x * var_y)


def correlation_scatter_dump(image: GrayImage, direction: Union[Direction, str],
                             pairs: int = DEFAULT_PAIRS,
                             seed: int = DEFAULT_SEED) -> List[Tuple[int, int]]:
    """与 adjacent_correlation 相同的抽样，输出 (x_i, y_i) 点对"""
    x, y = sample_adjacent_pairs(image, direction, pairs, seed)
    return [(int(a), int(b)) for a, b in zip(x, y)]


# ==========================================
# 两图比较
# ==========================================

def _same_shape(a: GrayImage, b: GrayImage) -> None:
    if a.pixels.shape != b.pixels.shape:
        raise InvalidParameterError(f"尺寸不一致: {a.pixels.shape} vs {b.pixels.shape}")


def npcr_uaci(c1: GrayImage, c2: GrayImage) -> Tuple[float, float]:
    """(NPCR %, UACI %)"""
    _same_shape(c1, c2)
    a = c1.pixels.astype(np.int64)
    b = c2.pixels.astype(np.int64)
    npcr = 100.0 * float(np.count_nonzero(a != b)) / a.size
    uaci = 100.0 * float(np.sum(np.abs(a - b))) / (255.0 * a.size)
    return npcr, uaci


def psnr(a: GrayImage, b: GrayImage) -> float:
    """10·log10(255² / MSE)；两图相同时返回 math.inf"""
    _same_shape(a, b)
    diff = a.pixels.astype(np.float64) - b.pixels.astype(np.float64)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(255.0 ** 2 / mse)


# ==========================================
# 实验
# ==========================================

@dataclass(frozen=True)
class SensitivityRow:
    magnitude: float
    psnr: float
    npcr: float
    uaci: float
    effective: bool


def key_sensitivity_sweep(image: GrayImage, cfg: CipherConfig, magnitudes: Sequence[float],
                          coordinate: int) -> List[SensitivityRow]:
    """对密钥第 coordinate 个分量加 m，报告错钥解密 PSNR 与两密文间 NPCR/UACI

    m 小于该分量的 1 ulp 时扰动后的密钥与原密钥相同，标记为无效且不再运行加解密。
    """
    if any(m < 0 or not math.isfinite(m) for m in magnitudes):
        raise InvalidParameterError(f"扰动幅度必须是非负有限值: {list(magnitudes)}")
    base = encrypt(image, cfg)
    rows = []
    for m in magnitudes:
        key = cfg.key.perturbed(coordinate, m)
        if key == cfg.key:
            rows.append(SensitivityRow(m, math.inf, 0.0, 0.0, effective=False))
            continue
        wrong = cfg.with_key(key)
        value = psnr(decrypt(base, wrong), image)
        npcr, uaci = npcr_uaci(base, encrypt(image, wrong))
        rows.append(SensitivityRow(m, value, npcr, uaci, effective=True))
    return rows


@dataclass(frozen=True)
class Stats:
    min: float
    max: float
    avg: float

    @classmethod
    def of(cls, values: Sequence[float]) -> "Stats":
        return cls(min(values), max(values), sum(values) / len(values))


@dataclass(frozen=True)
class DifferentialSummary:
    npcr: Stats
    uaci: Stats
    trials: int
    seed: int
    positions: Tuple[int, ...]


def differential_attack_trials(image: GrayImage, cfg: CipherConfig,
                               trials: int = DEFAULT_TRIALS, seed: int = DEFAULT_SEED,
                               flip: bool = True) -> DifferentialSummary:
    """每次试验随机选一个像素翻转最低位，比较两幅密文

    第 t 次试验的选点种子为 derive_seed(seed, t)；flip=False 时作为无修改对照。
    """
    if trials < 1:
        raise InvalidParameterError(f"trials 必须 >= 1, 得到 {trials}")
    layout = cfg.layout(image.height, image.width)
    base = encrypt_with_layout(image, layout)
    npcrs, uacis, positions = [], [], []
    for t in range(trials):
        pos = SplitMix64(derive_seed(seed, t)).randbelow(image.size)
        modified = image.pixels.copy()
        if flip:
            modified.flat[pos] ^= 1
        npcr, uaci = npcr_uaci(base, encrypt_with_layout(GrayImage(modified), layout))
        npcrs.append(npcr)
        uacis.append(uaci)
        positions.append(pos)
    return DifferentialSummary(Stats.of(npcrs), Stats.of(uacis), trials, seed, tuple(positions))


@dataclass(frozen=True)
class ImplicitKeyResult:
    npcr: float
    uaci: float
    map_clean: MapSpec
    map_noisy: MapSpec


def implicit_key_experiment(image: GrayImage, key: Key = Key((0.2, 0.3)), sigma: float = 1e-4,
                            seed: int = 7, truth: Optional[MapSpec] = None,
                            lib: Optional[CandidateLibrary] = None, n: int = 10000,
                            x0: Sequence[float] = (0.1, 0.1),
                            lambda_: float = DEFAULT_LAMBDA,
                            significance: float = DEFAULT_SIGNIFICANCE,
                            rounds: int = 4) -> ImplicitKeyResult:
    """同一密钥下，用无噪声数据与 sigma 噪声数据各辨识一个映射并分别加密

    sigma=0 时两份训练数据相同，作为对照 (两映射一致，NPCR 为 0)。
    """
    if sigma < 0 or not math.isfinite(sigma):
        raise InvalidParameterError(f"sigma 必须是非负有限值, 得到 {sigma}")
    truth = truth or builtin_henon()
    lib = lib or build_library(truth.dim)
    clean = iterate(truth, x0, n)
    map_clean = sindy_pi_fit(clean, lib, lambda_, significance).map
    noisy = add_gaussian_noise(clean, sigma, seed)
    map_noisy = sindy_pi_fit(noisy, lib, lambda_, significance).map
    c_clean = encrypt(image, CipherConfig(map_clean, key, rounds))
    c_noisy = encrypt(image, CipherConfig(map_noisy, key, rounds))
    npcr, uaci = npcr_uaci(c_clean, c_noisy)
    return ImplicitKeyResult(npcr, uaci, map_clean, map_noisy)


# ==========================================
# 报告
# ==========================================

class Correlations(BaseModel):
    horizontal: Optional[float]
    vertical: Optional[float]
    diagonal: Optional[float]


class ImageStatistics(BaseModel):
    entropy: float
    chi_square: ChiSquare
    correlations: Correlations


class SecurityReport(BaseModel):
    plain: ImageStatistics
    cipher: Optional[ImageStatistics] = None
    npcr: Optional[float] = None
    uaci: Optional[float] = None
    psnr: Optional[Union[float, Literal["inf"]]] = None
    seed: int
    pairs: int


def image_statistics(image: GrayImage, pairs: int = DEFAULT_PAIRS,
                     seed: int = DEFAULT_SEED) -> ImageStatistics:
    values = {}
    for index, direction in enumerate(Direction):
        try:
            values[direction.value] = adjacent_correlation(
                image, direction, pairs, derive_seed(seed, index)
            )
        except SindyCryptError:
            values[direction.value] = None
    return ImageStatistics(
        entropy=entropy(image),
        chi_square=chi_square(image),
        correlations=Correlations(**values),
    )


def security_report(plain: GrayImage, cipher: Optional[GrayImage] = None,
                    pairs: int = DEFAULT_PAIRS, seed: int = DEFAULT_SEED) -> SecurityReport:
    """明文单独统计；给出密文时追加密文统计与两图间 NPCR/UACI/PSNR (保留 4 位小数)"""
    report = SecurityReport(plain=image_statistics(plain, pairs, seed), seed=seed, pairs=pairs)
    if cipher is None:
        return report
    npcr, uaci = npcr_uaci(plain, cipher)
    value = psnr(plain, cipher)
    report.cipher = image_statistics(cipher, pairs, seed)
    report.npcr = round(npcr, 4)
    report.uaci = round(uaci, 4)
    report.psnr = "inf" if math.isinf(value) else round(value, 4)
    return report
