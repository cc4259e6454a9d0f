"""generate 命令实现：迭代映射并写出轨迹"""
from pathlib import Path
from typing import Optional

import numpy as np
import typer
from rich.console import Console
from rich.markup import escape
from rich.table import Table

from sindycrypt.client.commands._shared import load_map, parse_vector
from sindycrypt.common.file_ops import FileOps
from sindycrypt.core.errors import SindyCryptError
from sindycrypt.core.maps import add_gaussian_noise, iterate


console = Console()


def run(source: str, out: Path, x0: Optional[str], n: int, burn_in: Optional[int],
        sigma: float, seed: int, a: Optional[float] = None, b: Optional[float] = None,
        default_burn_in: int = 0) -> None:
    """执行 generate 命令的核心逻辑

    Args:
        source: 内置映射名或模型文件
        x0: 逗号分隔的初值，None 时使用内置映射默认初值
        burn_in: None 时取内置映射默认值与配置值中较大者
    """
    spec, default_x0, builtin_burn_in = load_map(source, "SOURCE", a=a, b=b)
    start = parse_vector(x0, "--x0", spec.dim) if x0 is not None else default_x0
    if n < 1:
        raise typer.BadParameter(f"n 必须 >= 1, 得到 {n}", param_hint="--n")
    if sigma < 0:
        raise typer.BadParameter(f"sigma 必须 >= 0, 得到 {sigma}", param_hint="--sigma")
    skip = burn_in if burn_in is not None else max(builtin_burn_in, default_burn_in)

    console.print(f"[bold cyan]📈 迭代 {source}: x0={start}, burn-in={skip}, n={n}[/]")
    try:
        with console.status("[bold green]正在迭代...[/]"):
            trajectory = iterate(spec, start, n, skip)
            if sigma > 0:
                trajectory = add_gaussian_noise(trajectory, sigma, seed)
        FileOps.write_trajectory(out, trajectory)
    except (SindyCryptError, OSError) as e:
        console.print(f"[bold red]❌ 生成失败:[/] {escape(str(e))}")
        raise typer.Exit(code=1)

    table = Table(title="轨迹概要")
    table.add_column("变量", style="cyan")
    table.add_column("min", justify="right")
    table.add_column("max", justify="right")
    table.add_column("mean", justify="right")
    for i, name in enumerate(spec.variables):
        col = trajectory.states[:, i]
        table.add_row(name, f"{np.min(col):.6f}", f"{np.max(col):.6f}", f"{np.mean(col):.6f}")
    console.print(table)
    if sigma > 0:
        console.print(f"[dim]已叠加高斯噪声 sigma={sigma}, seed={seed}[/]")
    console.print(f"[green]✓[/] 已写出 {len(trajectory)} 个状态: {out}")
