"""analyze 命令实现：统计安全性分析"""
from pathlib import Path
from typing import Optional

import typer
from rich.console import Console
from rich.markup import escape
from rich.table import Table

from sindycrypt.common.file_ops import FileOps
from sindycrypt.core.analysis import (
    Direction,
    correlation_scatter_dump,
    histogram,
    security_report,
)
from sindycrypt.core.cipher import GrayImage
from sindycrypt.core.errors import FormatError, SindyCryptError
from sindycrypt.core.rng import derive_seed


console = Console()


def _read(path: Path, hint: str) -> GrayImage:
    if not path.is_file():
        raise typer.BadParameter(f"文件不存在: {path}", param_hint=hint)
    try:
        return FileOps.read_pgm(path)
    except FormatError as e:
        console.print(f"[bold red]❌ PGM 解析失败:[/] {escape(str(e))}")
        raise typer.Exit(code=1)


def _fmt(value: Optional[float]) -> str:
    return "undefined" if value is None else f"{value:.4f}"


def _summary(report) -> Table:
    table = Table(title="安全性统计")
    table.add_column("指标", style="cyan")
    table.add_column("明文", justify="right")
    columns = [report.plain]
    if report.cipher is not None:
        table.add_column("密文", justify="right")
        columns.append(report.cipher)

    def row(label: str, pick) -> None:
        table.add_row(label, *(pick(s) for s in columns))

    row("信息熵", lambda s: f"{s.entropy:.4f}")
    row("χ² 统计量", lambda s: f"{s.chi_square.statistic:.4f}")
    row("χ² 通过", lambda s: "[green]是[/]" if s.chi_square.passed else "[red]否[/]")
    for direction in Direction:
        row(f"相关性 ({direction.value})",
            lambda s, d=direction.value: _fmt(getattr(s.correlations, d)))
    return table


def run(plain: Path, cipher: Optional[Path], out: Optional[Path], seed: int, pairs: int,
        hist: Optional[Path] = None, scatter: Optional[Path] = None) -> None:
    if pairs < 1:
        raise typer.BadParameter(f"pairs 必须 >= 1, 得到 {pairs}", param_hint="--pairs")
    plain_image = _read(plain, "PLAIN")
    cipher_image = _read(cipher, "CIPHER") if cipher is not None else None

    try:
        with console.status("[bold green]正在统计...[/]"):
            report = security_report(plain_image, cipher_image, pairs, seed)
    except SindyCryptError as e:
        console.print(f"[bold red]❌ 分析失败:[/] {escape(str(e))}")
        raise typer.Exit(code=1)

    images = {"plain": plain_image}
    if cipher_image is not None:
        images["cipher"] = cipher_image

    try:
        if out is not None:
            FileOps.write_json(out, report)
        if hist is not None:
            counts = {name: histogram(img) for name, img in images.items()}
            FileOps.write_csv(
                hist, ["gray", *counts],
                ([g, *(int(c[g]) for c in counts.values())] for g in range(256)),
            )
        if scatter is not None:
            scatter.mkdir(parents=True, exist_ok=True)
            for name, img in images.items():
                for index, direction in enumerate(Direction):
                    points = correlation_scatter_dump(img, direction, pairs, derive_seed(seed, index))
                    FileOps.write_csv(scatter / f"{name}_{direction.value}.csv", ["x", "y"], points)
    except OSError as e:
        console.print(f"[red]❌ 写出结果失败: {escape(str(e))}[/]")
        raise typer.Exit(code=1)

    if out is None:
        console.print_json(report.model_dump_json())
    else:
        console.print(_summary(report))
        if report.npcr is not None:
            console.print(f"NPCR={report.npcr:.4f}%  UACI={report.uaci:.4f}%  PSNR={report.psnr}")
        console.print(f"[green]✓[/] 报告已写出: {out}")
    if hist is not None:
        console.print(f"[green]✓[/] 直方图已写出: {hist}")
    if scatter is not None:
        console.print(f"[green]✓[/] 散点数据已写出: {scatter}")
