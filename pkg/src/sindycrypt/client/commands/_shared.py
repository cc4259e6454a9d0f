"""命令之间共用的参数解析"""
from typing import Optional, Tuple

import typer
from rich.console import Console
from rich.markup import escape

from sindycrypt.common.file_ops import FileOps, parse_floats
from sindycrypt.core.errors import FormatError
from sindycrypt.core.maps import MapSpec

console = Console()


def parse_vector(text: str, param_hint: str, dim: Optional[int] = None) -> Tuple[float, ...]:
    """解析逗号分隔的向量，格式或维度不对视为用法错误 (退出码 2)"""
    try:
        values = parse_floats(text)
    except FormatError as e:
        raise typer.BadParameter(e.detail, param_hint=param_hint)
    if dim is not None and len(values) != dim:
        raise typer.BadParameter(f"需要 {dim} 个分量, 得到 {len(values)} 个", param_hint=param_hint)
    return values


def load_map(source: str, param_hint: str, a: Optional[float] = None,
             b: Optional[float] = None) -> Tuple[MapSpec, Tuple[float, ...], int]:
    """映射来源无效视为用法错误 (退出码 2)；模型文件内容错误属于运行错误 (退出码 1)"""
    try:
        return FileOps.load_map(source, a=a, b=b)
    except KeyError:
        raise typer.BadParameter(f"未知映射或文件不存在: {source}", param_hint=param_hint)
    except FormatError as e:
        console.print(f"[bold red]❌ 模型文件无效:[/] {escape(str(e))}")
        raise typer.Exit(code=1)
    except ValueError as e:
        raise typer.BadParameter(str(e), param_hint=param_hint)
