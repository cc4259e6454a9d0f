"""identify 命令实现：SINDy-PI 辨识"""
from pathlib import Path
from typing import Optional

import typer
from rich.console import Console
from rich.markup import escape
from rich.table import Table

from sindycrypt.common.file_ops import FileOps
from sindycrypt.core.errors import FormatError, InvalidParameterError, SindyCryptError
from sindycrypt.core.identify import build_library, sindy_pi_fit
from sindycrypt.core.maps import format_equations


console = Console()


def run(data: Path, out: Optional[Path], max_degree: int, lambda_: float,
        significance: float, max_iter: int, include_abs: bool, composite_lhs: bool) -> None:
    if lambda_ <= 0:
        raise typer.BadParameter(f"lambda 必须 > 0, 得到 {lambda_}", param_hint="--lambda")
    if not data.is_file():
        raise typer.BadParameter(f"文件不存在: {data}", param_hint="DATA")

    try:
        trajectory = FileOps.read_trajectory(data)
        lib = build_library(trajectory.dim, max_degree, include_abs=include_abs,
                            composite_lhs=composite_lhs)
    except FormatError as e:
        console.print(f"[bold red]❌ 轨迹文件格式错误:[/] {escape(str(e))}")
        raise typer.Exit(code=1)
    except InvalidParameterError as e:
        raise typer.BadParameter(str(e), param_hint="--max-degree")

    console.print(f"[bold cyan]🔍 {len(trajectory)} 个样本, 候选库 {lib.describe()}[/]")
    try:
        with console.status("[bold green]正在稀疏回归...[/]"):
            result = sindy_pi_fit(trajectory, lib, lambda_, significance, max_iter,
                                  provenance={"data": str(data)})
    except SindyCryptError as e:
        console.print(f"[bold red]❌ 辨识失败:[/] {escape(str(e))}")
        raise typer.Exit(code=1)

    console.print("\n[bold]辨识结果:[/]")
    for line in format_equations(result.map):
        console.print(f"  {escape(line)}")

    table = Table(title="各坐标拟合")
    table.add_column("坐标", style="cyan")
    table.add_column("左端候选")
    table.add_column("相对残差", justify="right")
    table.add_column("支撑大小", justify="right")
    table.add_column("迭代次数", justify="right")
    for name, label, fit in zip(result.map.variables, result.selected, result.fits):
        table.add_row(name, label, f"{fit.residual:.3e}", str(fit.support_size), str(fit.iterations))
    console.print(table)

    if result.borderline:
        console.print(f"[bold yellow]⚠️  以下项的系数接近剪枝阈值 lambda={lambda_:g} 而被剪除, "
                      f"可尝试更小的 --lambda:[/]")
        for item in result.borderline:
            console.print(f"  [yellow]- {escape(item)}[/]")

    if out is not None:
        try:
            FileOps.write_model(out, result.map)
        except OSError as e:
            console.print(f"[red]❌ 写出模型失败: {escape(str(e))}[/]")
            raise typer.Exit(code=1)
        console.print(f"[green]✓[/] 模型已写出: {out}")
