"""encrypt / decrypt 命令实现"""
from pathlib import Path
from typing import Literal, Optional

import typer
from rich.console import Console
from rich.markup import escape

from sindycrypt.client.commands._shared import load_map, parse_vector
from sindycrypt.common.file_ops import FileOps
from sindycrypt.core.cipher import CipherConfig, decrypt_with_layout, encrypt_with_layout
from sindycrypt.core.errors import FormatError, SindyCryptError
from sindycrypt.core.keystream import Key


console = Console()


def _resolve_key(key: str, key_file: Optional[Path], dim: int) -> Key:
    """--key-file 优先于 --key；文件缺失或维度不符属于用法错误，内容无法解析属于运行错误"""
    if key_file is None:
        return Key(parse_vector(key, "--key", dim))
    if not key_file.is_file():
        raise typer.BadParameter(f"文件不存在: {key_file}", param_hint="--key-file")
    try:
        loaded = FileOps.read_key(key_file)
    except FormatError as e:
        console.print(f"[bold red]❌ 密钥文件无效:[/] {escape(str(e))}")
        raise typer.Exit(code=1)
    if loaded.dim != dim:
        raise typer.BadParameter(f"需要 {dim} 个分量, 得到 {loaded.dim} 个", param_hint="--key-file")
    return loaded


def run(mode: Literal["encrypt", "decrypt"], image: Path, out: Path, map_source: str,
        key: str, rounds: int, burn_in: int, dump_keystream: Optional[Path] = None,
        key_file: Optional[Path] = None, save_key: Optional[Path] = None) -> None:
    """加密与解密共用一条流程，只在最后一步分叉

    Raises:
        typer.BadParameter: 映射、密钥或轮数不合法 (退出码 2)
        typer.Exit: 读写或运算失败 (退出码 1)
    """
    spec, _, _ = load_map(map_source, "--map")
    key_value = _resolve_key(key, key_file, spec.dim)
    if rounds < 2 or rounds % 2:
        raise typer.BadParameter(f"rounds 必须是 >= 2 的偶数, 得到 {rounds}", param_hint="--rounds")
    if not image.is_file():
        raise typer.BadParameter(f"文件不存在: {image}", param_hint="IMAGE")

    try:
        cfg = CipherConfig(spec, key_value, rounds, burn_in)
    except SindyCryptError as e:
        raise typer.BadParameter(str(e), param_hint="--key")

    try:
        source = FileOps.read_pgm(image)
    except FormatError as e:
        console.print(f"[bold red]❌ PGM 解析失败:[/] {escape(str(e))}")
        raise typer.Exit(code=1)

    verb = "加密" if mode == "encrypt" else "解密"
    console.print(f"[bold cyan]🔑 {verb} {source.width}x{source.height} 图像, {rounds} 轮扩散[/]")
    try:
        with console.status(f"[bold green]正在生成密钥流并{verb}...[/]"):
            layout = cfg.layout(source.height, source.width)
            result = (encrypt_with_layout if mode == "encrypt" else decrypt_with_layout)(source, layout)
        FileOps.write_pgm(out, result)
        if dump_keystream is not None:
            FileOps.write_keystream(dump_keystream, layout)
        if save_key is not None:
            FileOps.write_key(save_key, key_value)
    except (SindyCryptError, OSError) as e:
        console.print(f"[bold red]❌ {verb}失败:[/] {escape(str(e))}")
        raise typer.Exit(code=1)

    console.print(f"[green]✓[/] 已写出: {out}")
    if dump_keystream is not None:
        console.print(f"[green]✓[/] 密钥流 ({layout.rounds} x {source.size} 字节) 已写出: {dump_keystream}")
    if save_key is not None:
        console.print(f"[green]✓[/] 密钥已写出: {save_key}")
