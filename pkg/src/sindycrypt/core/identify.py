"""离散时间 SINDy-PI 辨识

候选库建立在 (x_n, x_{n+1}) 上：右端是当前状态的单项式 (可含 |v| 因子)，
左端候选是恰好含一个一次下一时刻变量的项。对每个左端候选用 STLSQ 做稀疏回归，
按得分为每个坐标挑选最优候选，再显式解出 v_i' 得到 MapSpec。
"""
import math
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import qr, solve_triangular

from sindycrypt.core.errors import (
    DegenerateRegressionError,
    EmptyModelError,
    IdentificationError,
    InvalidParameterError,
    SindyCryptError,
    SweepError,
    UnderdeterminedError,
)
from sindycrypt.core.maps import (
    Factor,
    MapSpec,
    Term,
    Trajectory,
    add_gaussian_noise,
    basis,
    default_variables,
    iterate,
)

DEFAULT_MAX_DEGREE = 3
DEFAULT_LAMBDA = 0.01
DEFAULT_SIGNIFICANCE = 1e-4
DEFAULT_MAX_ITER = 20
MAX_LIBRARY_DEGREE = 5
RANK_TOLERANCE = 1e-10
SPARSITY_WEIGHT = 1e-3
# 被剪除系数 >= 该比例 × lambda 时提示阈值可能过大
BORDERLINE_RATIO = 0.5

Basis = Tuple[Factor, ...]


# ==========================================
# 候选库
# ==========================================

@dataclass(frozen=True)
class CandidateLibrary:
    dim: int
    rhs_terms: Tuple[Basis, ...]
    lhs_candidates: Tuple[Basis, ...]
    variables: Tuple[str, ...]
    max_degree: int
    include_abs: bool = False

    @property
    def width(self) -> int:
        return len(self.rhs_terms)

    def rhs_labels(self) -> List[str]:
        return [Term(1.0, b).render_basis(self.variables) for b in self.rhs_terms]

    def lhs_labels(self) -> List[str]:
        return [Term(1.0, b).render_basis(self.variables) for b in self.lhs_candidates]

    def describe(self) -> str:
        extra = " +abs" if self.include_abs else ""
        return (f"poly(d={self.dim}, deg<={self.max_degree}{extra}): "
                f"{self.width} rhs, {len(self.lhs_candidates)} lhs")


def _sorted_unique(bases: Sequence[Basis]) -> Tuple[Basis, ...]:
    unique = {b: None for b in bases}
    return tuple(sorted(unique, key=lambda b: Term(1.0, b).order_key))


def build_library(dim: int, max_degree: int = DEFAULT_MAX_DEGREE, include_abs: bool = False,
                  composite_lhs: bool = False,
                  variables: Optional[Sequence[str]] = None) -> CandidateLibrary:
    """构建候选库

    rhs: 0..max_degree 次全部单项式；include_abs 时追加 |v_i| × (次数 <= max_degree-1 的单项式)。
    lhs: 默认是 v_1'..v_d'；composite_lhs 时再加 v_i'·v_j。
    """
    if dim < 1:
        raise InvalidParameterError(f"维度必须 >= 1, 得到 {dim}")
    if not 1 <= max_degree <= MAX_LIBRARY_DEGREE:
        raise InvalidParameterError(f"max_degree 必须在 1..{MAX_LIBRARY_DEGREE} 之间, 得到 {max_degree}")
    names = tuple(variables) if variables else default_variables(dim)

    rhs: List[Basis] = []
    for degree in range(max_degree + 1):
        for combo in combinations_with_replacement(range(dim), degree):
            rhs.append(basis(*(Factor(v) for v in combo)))
    if include_abs:
        for i in range(dim):
            for degree in range(max_degree):
                for combo in combinations_with_replacement(range(dim), degree):
                    rhs.append(basis(Factor(i, absolute=True), *(Factor(v) for v in combo)))

    lhs: List[Basis] = [basis(Factor(i, shifted=True)) for i in range(dim)]
    if composite_lhs:
        lhs += [basis(Factor(i, shifted=True), Factor(j)) for i in range(dim) for j in range(dim)]

    return CandidateLibrary(
        dim=dim,
        rhs_terms=_sorted_unique(rhs),
        lhs_candidates=tuple(lhs),
        variables=names,
        max_degree=max_degree,
        include_abs=include_abs,
    )


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    """Θ(X) 与各左端候选列；第 i 行对应迁移 x_i -> x_{i+1}"""
    theta: np.ndarray
    lhs: np.ndarray
    current: np.ndarray
    library: CandidateLibrary

    @property
    def rows(self) -> int:
        return self.theta.shape[0]


def evaluate_library(lib: CandidateLibrary, t: Trajectory) -> DesignMatrix:
    if t.dim != lib.dim:
        raise InvalidParameterError(f"轨迹维度 {t.dim} 与候选库维度 {lib.dim} 不符")
    rows = len(t) - 1
    if rows < lib.width:
        raise UnderdeterminedError(rows, lib.width)
    current, following = t.states[:-1], t.states[1:]
    theta = np.column_stack([Term(1.0, b).evaluate_columns(current) for b in lib.rhs_terms])
    lhs = np.column_stack([Term(1.0, b).evaluate_columns(current, following)
                           for b in lib.lhs_candidates])
    if not (np.all(np.isfinite(theta)) and np.all(np.isfinite(lhs))):
        raise InvalidParameterError("设计矩阵包含非有限值")
    return DesignMatrix(theta=theta, lhs=lhs, current=current, library=lib)


# ==========================================
# STLSQ
# ==========================================

@dataclass(frozen=True, eq=False)
class SparseFit:
    coefficients: np.ndarray
    residual: float
    support_size: int
    iterations: int
    # (列号, 被剪除时的 |ξ|)
    pruned: Tuple[Tuple[int, float], ...] = ()

    @property
    def support(self) -> Tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.coefficients))


def least_squares(A: np.ndarray, b: np.ndarray,
                  labels: Optional[Sequence[str]] = None) -> np.ndarray:
    """列主元 QR 求最小二乘解；秩容差为 1e-10 × 最大列范数"""
    cols = A.shape[1]
    labels = list(labels) if labels is not None else [f"c{j}" for j in range(cols)]
    q, r, perm = qr(A, mode="economic", pivoting=True)
    largest = float(np.max(np.linalg.norm(A, axis=0))) if cols else 0.0
    diag = np.abs(np.diag(r))
    rank = int(np.count_nonzero(diag > RANK_TOLERANCE * largest)) if largest > 0 else 0
    if rank < cols:
        raise DegenerateRegressionError([labels[int(j)] for j in perm[rank:]])
    solution = np.empty(cols)
    solution[perm] = solve_triangular(r, q.T @ b)
    return solution


def stlsq(A: np.ndarray, b: np.ndarray, lam: float, max_iter: int = DEFAULT_MAX_ITER,
          labels: Optional[Sequence[str]] = None) -> SparseFit:
    """序贯阈值最小二乘

    交替执行：在活动列上解最小二乘 -> 把 |ξ| < lam 的系数置零，直到活动集不再变化
    或达到 max_iter。

    Raises:
        EmptyModelError: 所有系数都被剪除
        DegenerateRegressionError: 活动集秩亏损
    """
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if not (lam > 0 and math.isfinite(lam)):
        raise InvalidParameterError(f"lambda 必须为正有限值, 得到 {lam}")
    if max_iter < 1:
        raise InvalidParameterError(f"max_iter 必须 >= 1, 得到 {max_iter}")
    rows, width = A.shape
    if b.shape != (rows,):
        raise InvalidParameterError(f"b 的长度 {b.shape} 与 A 的行数 {rows} 不符")
    if rows < width:
        raise UnderdeterminedError(rows, width)
    labels = list(labels) if labels is not None else [f"c{j}" for j in range(width)]

    active = np.ones(width, dtype=bool)
    coefficients = np.zeros(width)
    pruned: Dict[int, float] = {}
    iterations = 0
    for iterations in range(1, max_iter + 1):
        idx = np.flatnonzero(active)
        coefficients = np.zeros(width)
        coefficients[idx] = least_squares(A[:, idx], b, [labels[j] for j in idx])
        keep = np.abs(coefficients) >= lam
        if not keep.any():
            raise EmptyModelError(f"阈值 {lam} 剪除了全部 {width} 个系数")
        if np.array_equal(keep, active):
            break
        for j in np.flatnonzero(active & ~keep):
            pruned[int(j)] = float(abs(coefficients[j]))
        active = keep
    coefficients[~active] = 0.0

    norm_b = float(np.linalg.norm(b))
    residual_norm = float(np.linalg.norm(b - A @ coefficients))
    residual = residual_norm / norm_b if norm_b > 0 else residual_norm
    return SparseFit(
        coefficients=coefficients,
        residual=residual,
        support_size=int(np.count_nonzero(coefficients)),
        iterations=iterations,
        pruned=tuple(sorted(pruned.items())),
    )


# ==========================================
# SINDy-PI
# ==========================================

@dataclass(frozen=True, eq=False)
class CandidateOutcome:
    """单个左端候选的回归结果"""
    label: str
    coordinate: int
    fit: Optional[SparseFit]
    score: float
    terms: Optional[Tuple[Term, ...]]
    failure: Optional[str] = None


@dataclass(frozen=True, eq=False)
class IdentificationResult:
    map: MapSpec
    fits: Tuple[SparseFit, ...]
    selected: Tuple[str, ...]
    candidates: Tuple[CandidateOutcome, ...]
    library: str
    provenance: Dict[str, object] = field(default_factory=dict)
    borderline: Tuple[str, ...] = ()

    def scores(self) -> Dict[str, float]:
        return {c.label: c.score for c in self.candidates}


def _divide(rhs: Basis, cofactor: Basis) -> Optional[Basis]:
    """rhs / cofactor (单项式整除)，不能整除返回 None"""
    remaining = {f.slot: f.exponent for f in rhs}
    for cf in cofactor:
        have = remaining.get(cf.slot, 0)
        if have < cf.exponent:
            return None
        remaining[cf.slot] = have - cf.exponent
    return basis(*(Factor(var, exp, absolute, shifted)
                   for (shifted, var, absolute), exp in remaining.items() if exp > 0))


def _explicit_terms(lib: CandidateLibrary, design: DesignMatrix, lhs: Basis,
                    fit: SparseFit) -> Tuple[Optional[Tuple[Term, ...]], Optional[str]]:
    cofactor = tuple(f for f in lhs if not f.shifted)
    chosen = [(lib.rhs_terms[j], float(fit.coefficients[j])) for j in fit.support]
    if not cofactor:
        return tuple(Term(c, b) for b, c in chosen), None
    divisor = Term(1.0, cofactor).evaluate_columns(design.current)
    if np.any(divisor == 0.0):
        return None, "余因子在某些样本处为 0"
    terms = []
    for b, c in chosen:
        quotient = _divide(b, cofactor)
        if quotient is None:
            return None, f"项 {Term(1.0, b).render_basis(lib.variables)} 不能被余因子整除"
        terms.append(Term(c, quotient))
    return tuple(terms), None


def sindy_pi_fit(t: Trajectory, lib: CandidateLibrary, lambda_: float = DEFAULT_LAMBDA,
                 significance: float = DEFAULT_SIGNIFICANCE, max_iter: int = DEFAULT_MAX_ITER,
                 provenance: Optional[Mapping[str, object]] = None) -> IdentificationResult:
    """对每个左端候选做 STLSQ，按得分为每个坐标挑选候选并显式求解

    得分 = 相对残差 + 1e-3 × 支撑大小 / 库宽度。最终系数中 |c| < significance 的项被剪除。
    """
    if significance < 0 or not math.isfinite(significance):
        raise InvalidParameterError(f"significance 必须是非负有限值, 得到 {significance}")
    design = evaluate_library(lib, t)
    rhs_labels = lib.rhs_labels()
    lhs_labels = lib.lhs_labels()

    outcomes: List[CandidateOutcome] = []
    for j, lhs in enumerate(lib.lhs_candidates):
        coordinate = next(f.var for f in lhs if f.shifted)
        label = lhs_labels[j]
        try:
            fit = stlsq(design.theta, design.lhs[:, j], lambda_, max_iter, rhs_labels)
        except (EmptyModelError, DegenerateRegressionError) as e:
            outcomes.append(CandidateOutcome(label, coordinate, None, math.inf, None, str(e)))
            continue
        score = fit.residual + SPARSITY_WEIGHT * fit.support_size / lib.width
        terms, failure = _explicit_terms(lib, design, lhs, fit)
        if terms is not None:
            terms = tuple(tm for tm in terms if abs(tm.coefficient) >= significance)
            if not terms:
                terms, failure = None, f"全部系数低于显著性阈值 {significance}"
        outcomes.append(CandidateOutcome(label, coordinate, fit, score, terms, failure))

    coords: List[Tuple[Term, ...]] = []
    fits: List[SparseFit] = []
    selected: List[str] = []
    borderline: List[str] = []
    for i, name in enumerate(lib.variables):
        usable = [o for o in outcomes if o.coordinate == i and o.terms is not None]
        if not usable:
            causes = [f"{o.label}: {o.failure}" for o in outcomes if o.coordinate == i]
            raise IdentificationError(name, causes)
        best = min(usable, key=lambda o: o.score)
        coords.append(best.terms)
        fits.append(best.fit)
        selected.append(best.label)
        borderline += [f"{name}': {rhs_labels[j]} (|ξ|={mag:.4g})"
                       for j, mag in best.fit.pruned if mag >= BORDERLINE_RATIO * lambda_]

    info: Dict[str, object] = {
        "samples": len(t),
        "lambda": lambda_,
        "significance": significance,
        "max_iter": max_iter,
    }
    info.update(provenance or {})
    return IdentificationResult(
        map=MapSpec(tuple(coords), lib.variables),
        fits=tuple(fits),
        selected=tuple(selected),
        candidates=tuple(outcomes),
        library=lib.describe(),
        provenance=info,
        borderline=tuple(borderline),
    )


def model_error(learned: MapSpec, truth: MapSpec) -> float:
    """按项对齐后的系数误差 sqrt(Σ (c_truth - c_learned)²)，缺失项视为 0"""
    if learned.dim != truth.dim:
        raise InvalidParameterError(f"维度不符: {learned.dim} vs {truth.dim}")
    a, b = learned.coefficient_table(), truth.coefficient_table()
    return math.sqrt(sum((b.get(k, 0.0) - a.get(k, 0.0)) ** 2 for k in set(a) | set(b)))


def term_deviations(learned: MapSpec, truth: MapSpec) -> Tuple[Dict[str, float], Dict[str, float]]:
    """(真实项的系数绝对偏差, 伪项的系数幅值)，键形如 "x': x^2" """
    a, b = learned.coefficient_table(), truth.coefficient_table()
    names = truth.variables

    def label(key) -> str:
        i, factors = key
        return f"{names[i]}': {Term(1.0, factors).render_basis(names)}"

    deviations = {label(k): abs(c - a.get(k, 0.0)) for k, c in sorted(b.items(), key=str)}
    spurious = {label(k): abs(c) for k, c in sorted(a.items(), key=str) if k not in b}
    return deviations, spurious


# ==========================================
# 扫描
# ==========================================

@dataclass(frozen=True)
class SizePoint:
    size: int
    error: float


@dataclass(frozen=True)
class NoisePoint:
    sigma: float
    deviations: Dict[str, float]
    spurious: Dict[str, float]
    error: Optional[float]
    failure: Optional[str] = None

    @property
    def aggregate(self) -> float:
        return sum(self.deviations.values()) + sum(self.spurious.values())


def _start(spec: MapSpec, x0: Optional[Sequence[float]]) -> Tuple[float, ...]:
    return tuple(x0) if x0 is not None else (0.1,) * spec.dim


def data_size_sweep(spec: MapSpec, sizes: Sequence[int], lib: CandidateLibrary,
                    lambda_: float = DEFAULT_LAMBDA,
                    significance: float = DEFAULT_SIGNIFICANCE,
                    x0: Optional[Sequence[float]] = None, burn_in: int = 0,
                    max_iter: int = DEFAULT_MAX_ITER) -> List[SizePoint]:
    """对每个数据量重新辨识并计算 model_error

    每个数据量的样本都是同一初值轨迹的前缀 (与逐个重新生成逐位一致)。
    """
    if not sizes:
        raise InvalidParameterError("sizes 不能为空")
    too_small = [s for s in sizes if s < lib.width + 1]
    if too_small:
        raise InvalidParameterError(f"数据量 {too_small} 小于库宽度 + 1 = {lib.width + 1}")
    full = iterate(spec, _start(spec, x0), max(sizes), burn_in)
    points = []
    for size in sizes:
        try:
            prefix = Trajectory(full.states[:size])
            result = sindy_pi_fit(prefix, lib, lambda_, significance, max_iter)
        except SindyCryptError as e:
            raise SweepError(size, e) from e
        points.append(SizePoint(size, model_error(result.map, spec)))
    return points


def noise_sweep(spec: MapSpec, sigmas: Sequence[float], seed: int, lib: CandidateLibrary,
                lambda_: float = DEFAULT_LAMBDA, significance: float = DEFAULT_SIGNIFICANCE,
                n: int = 10000, x0: Optional[Sequence[float]] = None, burn_in: int = 0,
                max_iter: int = DEFAULT_MAX_ITER) -> List[NoisePoint]:
    """在每个噪声强度上辨识，报告真实项偏差与伪项幅值；单点失败不会中断扫描"""
    if list(sigmas) != sorted(sigmas):
        raise InvalidParameterError("sigmas 必须升序排列")
    clean = iterate(spec, _start(spec, x0), n, burn_in)
    points = []
    for sigma in sigmas:
        try:
            noisy = add_gaussian_noise(clean, sigma, seed)
            result = sindy_pi_fit(noisy, lib, lambda_, significance, max_iter,
                                  provenance={"sigma": sigma, "seed": seed})
        except SindyCryptError as e:
            points.append(NoisePoint(sigma, {}, {}, None, str(e)))
            continue
        deviations, spurious = term_deviations(result.map, spec)
        points.append(NoisePoint(sigma, deviations, spurious, model_error(result.map, spec)))
    return points
