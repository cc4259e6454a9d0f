"""reproduce 命令实现：复现参考表格与扫描曲线"""
from pathlib import Path
from typing import Optional

import typer
from rich.console import Console
from rich.markup import escape
from rich.panel import Panel
from rich.table import Table

from sindycrypt.common.file_ops import FileOps
from sindycrypt.core.errors import FormatError
from sindycrypt.core.sample_image import moon_surface_standin
from sindycrypt.reproduce.executor import Executor
from sindycrypt.reproduce.targets import TARGETS, TargetReport


console = Console()

_VERDICT = {True: "[green]PASS[/]", False: "[red]FAIL[/]", None: "[dim]-[/]"}


def _render(report: TargetReport) -> Table:
    table = Table(title=f"{report.target}: {report.title}", title_justify="left")
    table.add_column("对照项", style="cyan")
    table.add_column("参考值", justify="right")
    table.add_column("实测", justify="right")
    table.add_column("结果", justify="center")
    for c in report.checks:
        table.add_row(c.quantity, c.reference, c.measured, _VERDICT[c.passed])
    return table


def run(target: str, workdir: Path, image: Optional[Path] = None, strict: bool = False) -> None:
    """执行 reproduce 命令的核心逻辑

    单个目标失败只中止该目标；全部目标都尝试之后，有目标失败则退出码为 1。
    strict 时任一对照项 FAIL 也以退出码 1 结束。
    """
    try:
        targets = Executor.expand(target)
    except ValueError as e:
        raise typer.BadParameter(str(e), param_hint="TARGET")

    if image is not None and not image.is_file():
        raise typer.BadParameter(f"文件不存在: {image}", param_hint="--image")
    try:
        workdir.mkdir(parents=True, exist_ok=True)
        plain = FileOps.read_pgm(image) if image is not None else moon_surface_standin()
    except (FormatError, OSError) as e:
        console.print(f"[bold red]❌ 准备输入失败:[/] {escape(str(e))}")
        raise typer.Exit(code=1)

    source = str(image) if image is not None else "内置合成图像 (非原始 Moon surface，明文数值仅供参考)"
    console.print(Panel.fit(f"目标: {', '.join(targets)}\n图像: {source}\n输出: {workdir}",
                            title="🧪 复现", border_style="cyan"))

    context = {"workdir": workdir, "image": plain, "original_image": image is not None}
    broken, failed_checks = [], 0
    for target_id in targets:
        try:
            with console.status(f"[bold green]正在运行 {target_id} ({TARGETS[target_id].title})...[/]"):
                report = Executor.dispatch_target(target_id, context)
        except RuntimeError as e:
            console.print(f"[bold red]❌[/] {escape(str(e))}")
            broken.append(target_id)
            continue
        console.print(_render(report))
        for path in report.files:
            console.print(f"  [dim]→ {path}[/]")
        failed_checks += sum(c.passed is False for c in report.checks)

    console.print()
    if broken:
        console.print(f"[bold red]❌ {len(broken)} 个目标执行失败: {', '.join(broken)}[/]")
        raise typer.Exit(code=1)
    if failed_checks:
        console.print(f"[yellow]⚠️  {failed_checks} 个对照项未通过容差。[/]")
        if strict:
            raise typer.Exit(code=1)
    else:
        console.print("[bold green]✨ 全部对照项通过！[/]")
