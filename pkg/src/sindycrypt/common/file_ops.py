"""文件读写工具类

所有格式：P5 PGM、轨迹 CSV、模型文本、密钥文件、密钥流转储、CSV 表格、JSON 报告。
不包含任何打印输出，格式错误统一抛出带路径与位置的 FormatError。
"""
import csv
import math
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel

from sindycrypt.core.cipher import GrayImage
from sindycrypt.core.errors import FormatError
from sindycrypt.core.keystream import Key, KeystreamLayout
from sindycrypt.core.maps import (
    BUILTIN_MAPS,
    MapSpec,
    Trajectory,
    format_model,
    parse_model,
)

PathLike = Union[str, Path]


def parse_floats(text: str, path: Optional[str] = None) -> Tuple[float, ...]:
    """解析逗号分隔的十进制数 (完整双精度，17 位有效数字可精确表达)"""
    try:
        values = tuple(float(part) for part in text.strip().split(","))
    except ValueError:
        raise FormatError(f"无法解析为数字列表: {text.strip()!r}", path=path)
    if not all(math.isfinite(v) for v in values):
        raise FormatError(f"包含非有限值: {text.strip()!r}", path=path)
    return values


def parse_pgm(data: bytes, path: Optional[str] = None) -> GrayImage:
    """解析二进制 PGM (P5)，最大值字段只接受 255；头部允许 # 注释"""
    if data[:2] != b"P5":
        raise FormatError("不是 P5 格式的 PGM 文件", path=path, offset=0)
    if not data[2:3].isspace():
        raise FormatError("魔数 P5 之后缺少空白符", path=path, offset=2)

    pos = 2
    fields: List[Tuple[int, int]] = []
    while len(fields) < 3:
        if pos >= len(data):
            raise FormatError("PGM 头部不完整", path=path, offset=pos)
        byte = data[pos:pos + 1]
        if byte.isspace():
            pos += 1
            continue
        if byte == b"#":
            end = data.find(b"\n", pos)
            pos = len(data) if end < 0 else end + 1
            continue
        start = pos
        while pos < len(data) and data[pos:pos + 1].isdigit():
            pos += 1
        if start == pos:
            raise FormatError(f"PGM 头部出现非法字节 {byte!r}", path=path, offset=pos)
        fields.append((int(data[start:pos]), start))

    (width, w_at), (height, h_at), (maxval, m_at) = fields
    if width < 1:
        raise FormatError(f"宽度必须为正, 得到 {width}", path=path, offset=w_at)
    if height < 1:
        raise FormatError(f"高度必须为正, 得到 {height}", path=path, offset=h_at)
    if maxval != 255:
        raise FormatError(f"只支持最大值 255, 得到 {maxval}", path=path, offset=m_at)
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise FormatError("最大值字段之后缺少单个空白符", path=path, offset=pos)
    pos += 1

    raster = data[pos:pos + width * height]
    if len(raster) < width * height:
        raise FormatError(
            f"像素数据不足: 需要 {width * height} 字节, 实际 {len(raster)}",
            path=path, offset=pos + len(raster),
        )
    return GrayImage.from_bytes(width, height, raster)


class FileOps:
    """文件读写工具类"""

    # ==========================================
    # 图像
    # ==========================================
    @staticmethod
    def read_pgm(path: PathLike) -> GrayImage:
        return parse_pgm(Path(path).read_bytes(), path=str(path))

    @staticmethod
    def write_pgm(path: PathLike, image: GrayImage) -> None:
        header = f"P5\n{image.width} {image.height}\n255\n".encode("ascii")
        Path(path).write_bytes(header + image.to_bytes())

    # ==========================================
    # 轨迹 CSV
    # ==========================================
    @staticmethod
    def write_trajectory(path: PathLike, t: Trajectory) -> None:
        lines = [f"# dim={t.dim}"]
        lines += [",".join(repr(float(v)) for v in row) for row in t.states]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @staticmethod
    def read_trajectory(path: PathLike) -> Trajectory:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        if not lines or not lines[0].startswith("# dim="):
            raise FormatError("缺少 '# dim=<d>' 头部", path=str(path), offset=1)
        try:
            dim = int(lines[0][len("# dim="):])
        except ValueError:
            raise FormatError(f"无法解析维度: {lines[0]!r}", path=str(path), offset=1)
        rows = []
        for line_no, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            try:
                row = parse_floats(line)
            except FormatError as e:
                raise FormatError(e.detail, path=str(path), offset=line_no)
            if len(row) != dim:
                raise FormatError(f"第 {line_no} 行有 {len(row)} 列, 期望 {dim}",
                                  path=str(path), offset=line_no)
            rows.append(row)
        if not rows:
            raise FormatError("轨迹为空", path=str(path))
        return Trajectory(np.array(rows, dtype=np.float64))

    # ==========================================
    # 模型
    # ==========================================
    @staticmethod
    def write_model(path: PathLike, spec: MapSpec) -> None:
        Path(path).write_text(format_model(spec), encoding="utf-8")

    @staticmethod
    def read_model(path: PathLike) -> MapSpec:
        try:
            return parse_model(Path(path).read_text(encoding="utf-8"))
        except FormatError as e:
            raise FormatError(e.detail, path=str(path), offset=e.offset)

    @staticmethod
    def load_map(source: str, a: Optional[float] = None,
                 b: Optional[float] = None) -> Tuple[MapSpec, Tuple[float, ...], int]:
        """按名称取内置映射，否则按模型文件读取

        Returns:
            (映射, 默认初值, 默认 burn-in)

        Raises:
            KeyError: 既不是内置映射名也不是已存在的文件
        """
        if source in BUILTIN_MAPS:
            entry = BUILTIN_MAPS[source]
            params = {k: v for k, v in (("a", a), ("b", b)) if v is not None}
            if params and source == "logistic3d":
                raise ValueError("logistic3d 不接受 --a/--b 参数")
            return entry.factory(**params), entry.x0, entry.burn_in
        if Path(source).is_file():
            spec = FileOps.read_model(source)
            return spec, (0.1,) * spec.dim, 0
        raise KeyError(source)

    # ==========================================
    # 密钥 / 密钥流
    # ==========================================
    @staticmethod
    def write_key(path: PathLike, key: Key) -> None:
        Path(path).write_text(",".join(repr(v) for v in key.initial_state) + "\n", encoding="utf-8")

    @staticmethod
    def read_key(path: PathLike) -> Key:
        text = Path(path).read_text(encoding="utf-8").strip()
        return Key(parse_floats(text, path=str(path)))

    @staticmethod
    def write_keystream(path: PathLike, layout: KeystreamLayout) -> None:
        Path(path).write_bytes(layout.keystream_bytes())

    # ==========================================
    # 表格 / 报告
    # ==========================================
    @staticmethod
    def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[object]]) -> None:
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)

    @staticmethod
    def write_json(path: PathLike, report: BaseModel) -> None:
        Path(path).write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
