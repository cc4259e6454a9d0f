"""离散映射的符号表示、求值与迭代

一个 MapSpec 对每个下一时刻坐标给出若干项 (Term) 的带符号和。
求值顺序是固定的：项按规范顺序排列，从左到右累加；每一项从系数开始，
按因子的规范顺序逐次相乘 (指数为 k 的因子乘 k 次)。混沌对舍入极其敏感，
加密端与解密端必须得到逐位相同的状态序列。
"""
import math
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from sindycrypt.core.errors import DivergenceError, FormatError, InvalidParameterError
from sindycrypt.core.rng import SplitMix64

# 任一坐标超过该阈值或非有限即视为发散
DIVERGENCE_LIMIT = 1e12

StateVector = Tuple[float, ...]


class Factor(NamedTuple):
    """单个因子 v^k 或 |v|^k

    shifted=True 表示下一时刻变量 v'，只出现在候选库的左端项中。
    """
    var: int
    exponent: int = 1
    absolute: bool = False
    shifted: bool = False

    @property
    def slot(self) -> Tuple[bool, int, bool]:
        return (self.shifted, self.var, self.absolute)

    def render(self, names: Sequence[str]) -> str:
        name = names[self.var] + ("'" if self.shifted else "")
        base = f"|{name}|" if self.absolute else name
        return base if self.exponent == 1 else f"{base}^{self.exponent}"


def _canonical_factors(factors: Iterable[Factor]) -> Tuple[Factor, ...]:
    merged: Dict[Tuple[bool, int, bool], int] = {}
    for f in factors:
        if f.exponent < 1:
            raise InvalidParameterError(f"因子指数必须 >= 1, 得到 {f.exponent}")
        if f.var < 0:
            raise InvalidParameterError(f"变量编号必须非负, 得到 {f.var}")
        merged[f.slot] = merged.get(f.slot, 0) + f.exponent
    return tuple(
        Factor(var=var, exponent=exp, absolute=absolute, shifted=shifted)
        for (shifted, var, absolute), exp in sorted(merged.items())
    )


@dataclass(frozen=True)
class Term:
    """系数 × 因子乘积；空因子表示常数项"""
    coefficient: float
    factors: Tuple[Factor, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "coefficient", float(self.coefficient))
        object.__setattr__(self, "factors", _canonical_factors(self.factors))

    @property
    def degree(self) -> int:
        return sum(f.exponent for f in self.factors)

    @property
    def order_key(self) -> tuple:
        """规范顺序：先按总次数，再按 (时刻, 变量, 绝对值) 排，同位置高次在前"""
        return (self.degree,
                tuple((f.shifted, f.var, f.absolute, -f.exponent) for f in self.factors))

    def with_coefficient(self, coefficient: float) -> "Term":
        return Term(coefficient, self.factors)

    def render_basis(self, names: Sequence[str]) -> str:
        return "*".join(f.render(names) for f in self.factors) or "1"

    def evaluate_columns(self, current: np.ndarray,
                         following: Optional[np.ndarray] = None) -> np.ndarray:
        """在一批样本上求基函数值 (不含系数)

        Args:
            current: (n, d) 当前状态
            following: (n, d) 下一状态，仅当因子含 v' 时需要
        """
        column = np.ones(current.shape[0])
        for f in self.factors:
            source = following if f.shifted else current
            if source is None:
                raise InvalidParameterError("含下一时刻变量的项需要提供下一状态")
            base = source[:, f.var]
            if f.absolute:
                base = np.abs(base)
            for _ in range(f.exponent):
                column = column * base
        return column


def basis(*factors: Factor) -> Tuple[Factor, ...]:
    """把一组因子规范化为基函数标识"""
    return _canonical_factors(factors)


def default_variables(dim: int) -> Tuple[str, ...]:
    if dim <= 3:
        return ("x", "y", "z")[:dim]
    return tuple(f"x{i + 1}" for i in range(dim))


def _normalize_coordinate(terms: Iterable[Term], dim: int) -> Tuple[Term, ...]:
    summed: Dict[Tuple[Factor, ...], float] = {}
    for t in terms:
        if not math.isfinite(t.coefficient):
            raise InvalidParameterError(f"系数必须为有限值, 得到 {t.coefficient}")
        for f in t.factors:
            if f.shifted or f.var >= dim:
                raise InvalidParameterError("映射的更新式只能引用当前时刻变量")
        summed[t.factors] = summed.get(t.factors, 0.0) + t.coefficient
    kept = [Term(c, fs) for fs, c in summed.items() if c != 0.0]
    if not kept:
        kept = [Term(0.0)]
    return tuple(sorted(kept, key=lambda t: t.order_key))


@dataclass(frozen=True)
class MapSpec:
    """符号离散映射 v' = F(v)

    构造时合并同类项、去掉零系数项并按规范顺序排序；全零坐标保留一个 0 常数项。
    """
    coords: Tuple[Tuple[Term, ...], ...]
    variables: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        dim = len(self.coords)
        if dim < 1:
            raise InvalidParameterError("映射维度必须 >= 1")
        names = tuple(self.variables) or default_variables(dim)
        if len(names) != dim:
            raise InvalidParameterError(f"变量名个数 {len(names)} 与维度 {dim} 不符")
        object.__setattr__(self, "variables", names)
        object.__setattr__(
            self, "coords", tuple(_normalize_coordinate(c, dim) for c in self.coords)
        )

    @property
    def dim(self) -> int:
        return len(self.coords)

    def coefficient_table(self) -> Dict[Tuple[int, Tuple[Factor, ...]], float]:
        """(坐标序号, 基函数) -> 系数"""
        return {
            (i, t.factors): t.coefficient
            for i, terms in enumerate(self.coords)
            for t in terms
            if t.coefficient != 0.0
        }

    def support(self, coordinate: int) -> frozenset:
        return frozenset(t.factors for t in self.coords[coordinate] if t.coefficient != 0.0)


# ==========================================
# 求值
# ==========================================

def _term_source(term: Term) -> str:
    parts = [f"({term.coefficient!r})"]
    for f in term.factors:
        base = f"abs(v{f.var})" if f.absolute else f"v{f.var}"
        parts.extend([base] * f.exponent)
    return "*".join(parts)


@lru_cache(maxsize=64)
def compile_step(spec: MapSpec) -> Callable[..., StateVector]:
    """把 MapSpec 编译成一个普通 Python 函数 step(v0, ..., v{d-1})

    生成的表达式严格按规范顺序从左到右求值；Python 浮点运算不做 FMA 融合，
    因此与逐项解释求值的结果逐位一致。
    """
    args = ", ".join(f"v{i}" for i in range(spec.dim))
    rows = [" + ".join(_term_source(t) for t in terms) for terms in spec.coords]
    source = f"def _step({args}):\n    return ({', '.join(rows)},)\n"
    namespace: Dict[str, object] = {"abs": abs}
    exec(compile(source, f"<mapspec d={spec.dim}>", "exec"), namespace)
    return namespace["_step"]  # type: ignore[return-value]


def as_state(values: Iterable[float], dim: int) -> StateVector:
    state = tuple(float(v) for v in values)
    if len(state) != dim:
        raise InvalidParameterError(f"状态维度 {len(state)} 与映射维度 {dim} 不符")
    if not all(math.isfinite(v) for v in state):
        raise InvalidParameterError(f"状态必须为有限值: {state}")
    return state


def _check_bounded(state: StateVector, step: int, previous: StateVector) -> None:
    for v in state:
        if not -DIVERGENCE_LIMIT <= v <= DIVERGENCE_LIMIT:
            raise DivergenceError(
                f"第 {step} 步发散: {previous} -> {state}", step=step, state=previous
            )


def evaluate(spec: MapSpec, s: Iterable[float]) -> StateVector:
    """单步求值 F(s)"""
    state = as_state(s, spec.dim)
    nxt = compile_step(spec)(*state)
    _check_bounded(nxt, 1, state)
    return nxt


@dataclass(frozen=True, eq=False)
class Trajectory:
    """按时间排列的状态序列 (n, d)，只读"""
    states: np.ndarray

    def __post_init__(self):
        arr = np.array(self.states, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InvalidParameterError(f"轨迹必须是非空 (n, d) 数组, 得到形状 {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidParameterError("轨迹包含非有限值")
        arr.setflags(write=False)
        object.__setattr__(self, "states", arr)

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def __len__(self) -> int:
        return self.states.shape[0]

    def equals(self, other: "Trajectory") -> bool:
        return np.array_equal(self.states, other.states)


def iterate(spec: MapSpec, x0: Iterable[float], n: int, burn_in: int = 0) -> Trajectory:
    """从 x0 迭代，丢弃前 burn_in 个迭代值后输出接下来的 n 个状态

    x0 本身不输出，第一个输出是 x_{burn_in+1}。
    """
    if n < 1:
        raise InvalidParameterError(f"n 必须 >= 1, 得到 {n}")
    if burn_in < 0:
        raise InvalidParameterError(f"burn_in 必须 >= 0, 得到 {burn_in}")
    step = compile_step(spec)
    state = as_state(x0, spec.dim)
    emitted: List[StateVector] = []
    for k in range(1, burn_in + n + 1):
        nxt = step(*state)
        _check_bounded(nxt, k, state)
        state = nxt
        if k > burn_in:
            emitted.append(state)
    return Trajectory(np.array(emitted, dtype=np.float64))


def add_gaussian_noise(t: Trajectory, sigma: float, seed: int) -> Trajectory:
    """X_noisy = X + sigma * N(0, 1)

    正态数由 SplitMix64 + Box-Muller 产生，按列优先 (先坐标 1 的全部状态，再坐标 2 ...) 消费。
    """
    if not math.isfinite(sigma) or sigma < 0:
        raise InvalidParameterError(f"噪声强度必须是非负有限值, 得到 {sigma}")
    if sigma == 0:
        return Trajectory(t.states.copy())
    n, d = t.states.shape
    draws = np.array(SplitMix64(seed).normal(n * d), dtype=np.float64)
    noise = draws.reshape((d, n)).T
    return Trajectory(t.states + sigma * noise)


# ==========================================
# 内置映射
# ==========================================

def _finite_params(**params: float) -> None:
    for name, value in params.items():
        if not math.isfinite(value):
            raise InvalidParameterError(f"参数 {name} 必须为有限值, 得到 {value}")


def builtin_henon(a: float = 1.4, b: float = 0.3) -> MapSpec:
    """Hénon 映射 x' = 1 + y - a x², y' = b x"""
    _finite_params(a=a, b=b)
    x, y = Factor(0), Factor(1)
    return MapSpec((
        (Term(1.0), Term(1.0, (y,)), Term(-a, (Factor(0, 2),))),
        (Term(b, (x,)),),
    ))


def builtin_lozi(a: float = 1.7, b: float = 0.5) -> MapSpec:
    """Lozi 映射 x' = 1 - a|x| + y, y' = b x"""
    _finite_params(a=a, b=b)
    x, y = Factor(0), Factor(1)
    return MapSpec((
        (Term(1.0), Term(-a, (Factor(0, absolute=True),)), Term(1.0, (y,))),
        (Term(b, (x,)),),
    ))


def builtin_logistic3d(r: float = 3.8, coupling: float = 0.01) -> MapSpec:
    """三维耦合 logistic 映射 (循环置换形式)

    x' = r x (1 - x) + c y² x + c z³，y、z 依次循环。
    """
    _finite_params(r=r, coupling=coupling)
    coords = []
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        coords.append((
            Term(r, (Factor(i),)),
            Term(-r, (Factor(i, 2),)),
            Term(coupling, (Factor(i), Factor(j, 2))),
            Term(coupling, (Factor(k, 3),)),
        ))
    return MapSpec(tuple(coords))


class BuiltinMap(NamedTuple):
    factory: Callable[..., MapSpec]
    x0: StateVector
    burn_in: int
    description: str


BUILTIN_MAPS: Dict[str, BuiltinMap] = {
    "henon": BuiltinMap(builtin_henon, (0.1, 0.1), 0, "Hénon (a=1.4, b=0.3)"),
    "lozi": BuiltinMap(builtin_lozi, (0.1, 0.1), 500, "Lozi (a=1.7, b=0.5)"),
    "logistic3d": BuiltinMap(builtin_logistic3d, (0.1, 0.2, 0.3), 500, "3D logistic (r=3.8, c=0.01)"),
}


# ==========================================
# 文本格式
# ==========================================

def _signed_join(chunks: List[Tuple[float, str]], first_negative_prefix: str = "-") -> str:
    out = []
    for i, (coef, body) in enumerate(chunks):
        negative = math.copysign(1.0, coef) < 0
        if i == 0:
            out.append(f"{first_negative_prefix}{body}" if negative else body)
        else:
            out.append(f" - {body}" if negative else f" + {body}")
    return "".join(out)


def format_model(spec: MapSpec) -> str:
    """模型文件文本，系数使用最短往返十进制表示"""
    lines = [f"# map dim={spec.dim} vars={','.join(spec.variables)}"]
    for name, terms in zip(spec.variables, spec.coords):
        chunks = []
        for t in terms:
            body = repr(abs(t.coefficient))
            if t.factors:
                body += "*" + t.render_basis(spec.variables)
            chunks.append((t.coefficient, body))
        lines.append(f"{name}' = {_signed_join(chunks)}")
    return "\n".join(lines) + "\n"


def format_equations(spec: MapSpec, digits: int = 4) -> List[str]:
    """显示用方程：系数保留 digits 位有效数字，单位系数省略 (仅用于显示)"""
    lines = []
    for name, terms in zip(spec.variables, spec.coords):
        chunks = []
        for t in terms:
            magnitude = f"{abs(t.coefficient):.{digits}g}"
            if not t.factors:
                body = magnitude
            elif magnitude == "1":
                body = t.render_basis(spec.variables)
            else:
                body = f"{magnitude}*{t.render_basis(spec.variables)}"
            chunks.append((t.coefficient, body))
        lines.append(f"{name}' = {_signed_join(chunks)}")
    return lines


_HEADER_RE = re.compile(r"^#\s*map\s+dim=(\d+)\s+vars=([\w,]+)\s*$")
_EQUATION_RE = re.compile(r"^\s*([A-Za-z_]\w*)'\s*=\s*(.+?)\s*$")
_NUMBER = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_FACTOR = r"(?:\|[A-Za-z_]\w*\||[A-Za-z_]\w*)(?:\^\d+)?"
_TERM_RE = re.compile(rf"\s*([+-])?\s*({_NUMBER})((?:\*{_FACTOR})*)")
_FACTOR_RE = re.compile(r"(\|?)([A-Za-z_]\w*)\1(?:\^(\d+))?")


def _parse_terms(expr: str, names: Sequence[str], line_no: int) -> List[Term]:
    index = {name: i for i, name in enumerate(names)}
    terms: List[Term] = []
    pos = 0
    while pos < len(expr):
        m = _TERM_RE.match(expr, pos)
        if not m or m.end() == pos or (terms and m.group(1) is None):
            raise FormatError(f"无法解析的项: {expr[pos:]!r}", offset=line_no)
        sign, number, factor_text = m.groups()
        coef = float(number)
        if sign == "-":
            coef = -coef
        factors = []
        for chunk in filter(None, factor_text.split("*")):
            fm = _FACTOR_RE.fullmatch(chunk)
            if not fm or fm.group(2) not in index:
                raise FormatError(f"未知因子: {chunk!r}", offset=line_no)
            factors.append(Factor(index[fm.group(2)], int(fm.group(3) or 1), bool(fm.group(1))))
        terms.append(Term(coef, tuple(factors)))
        pos = m.end()
        while pos < len(expr) and expr[pos].isspace():
            pos += 1
    if not terms:
        raise FormatError("方程右端为空", offset=line_no)
    return terms


def parse_model(text: str) -> MapSpec:
    """format_model 的精确逆"""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise FormatError("模型文本为空", offset=1)
    header = _HEADER_RE.match(lines[0])
    if not header:
        raise FormatError(f"缺少模型头: {lines[0]!r}", offset=1)
    dim = int(header.group(1))
    names = tuple(header.group(2).split(","))
    if len(names) != dim:
        raise FormatError(f"vars 个数 {len(names)} 与 dim={dim} 不符", offset=1)
    coords: Dict[str, List[Term]] = {}
    for line_no, line in enumerate(lines[1:], start=2):
        m = _EQUATION_RE.match(line)
        if not m or m.group(1) not in names:
            raise FormatError(f"无法解析的方程: {line!r}", offset=line_no)
        if m.group(1) in coords:
            raise FormatError(f"坐标 {m.group(1)}' 重复定义", offset=line_no)
        coords[m.group(1)] = _parse_terms(m.group(2), names, line_no)
    missing = [n for n in names if n not in coords]
    if missing:
        raise FormatError(f"缺少坐标方程: {', '.join(missing)}")
    return MapSpec(tuple(tuple(coords[n]) for n in names), names)
