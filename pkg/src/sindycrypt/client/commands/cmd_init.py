"""init 命令实现：生成、检查并修改运行配置文件"""
from typing import List, Optional

import typer
import yaml
from rich.console import Console
from rich.markup import escape

from sindycrypt.common.config_ops import ConfigOps


console = Console()


def _report_errors(errors: List[str], hint: str) -> None:
    console.print("[yellow]⚠️  配置文件存在以下问题:[/]")
    for error in errors:
        console.print(f"  - {escape(error)}")
    console.print(f"[dim]{hint}[/]")
    raise typer.Exit(code=1)


def _apply(config_ops: ConfigOps, paths: List[str], updates: dict) -> None:
    """一次性应用全部修改；任何一条不合法时文件保持不变"""
    try:
        config_ops.update_config(updates)
    except (ValueError, yaml.YAMLError) as e:
        _report_errors(str(e).splitlines(), "未写入任何修改。")

    for path in paths:
        value = config_ops.get_config_value(path)
        console.print(f"[green]✓[/] {escape(path)} = {escape(repr(value))}")


def run(force: bool = False, assignments: Optional[List[str]] = None,
        config_ops: ConfigOps = None) -> None:
    """在工作目录创建默认配置

    检查流程：
    1. 配置文件不存在（或指定 --force）则写入默认模板
    2. 配置文件已存在则只做校验，列出问题项
    3. 给出 --set 时在上面的基础上逐条修改并重新校验
    """
    try:
        paths, updates = ConfigOps.parse_assignments(assignments or [])
    except ValueError as e:
        raise typer.BadParameter(str(e), param_hint="--set")
    config_ops = config_ops or ConfigOps()
    console.print("[bold blue]📦 正在检查运行配置...[/]")

    if config_ops.has_config() and not force:
        console.print(f"[green]✓[/] 配置文件已存在: {config_ops.config_name}")

        is_valid, errors = config_ops.validate_config()
        if not is_valid:
            _report_errors(errors, "修复后再使用，或执行 'sindycrypt init --force' 覆盖为默认值。")

        if assignments:
            _apply(config_ops, paths, updates)
        else:
            console.print("[dim]如需恢复默认值，请使用 --force[/]")
        return

    try:
        config_path = config_ops.create_default_config(overwrite=force)
    except OSError as e:
        console.print(f"[red]❌ 创建配置文件失败: {escape(str(e))}[/]")
        raise typer.Exit(code=1)

    console.print(f"[green]✓[/] 配置文件已创建: {config_path}")
    if assignments:
        _apply(config_ops, paths, updates)
    console.print("\n👉 通过 [bold cyan]sindycrypt --config {0} <命令>[/] 使用该配置".format(config_ops.config_name))
