from pathlib import Path
from typing import List, Optional

import typer
from typing_extensions import Annotated
from rich.console import Console

from sindycrypt import __version__
from sindycrypt.common.config_ops import ConfigOps, RunConfig
from sindycrypt.client.commands import (
    cmd_init,
    cmd_generate,
    cmd_identify,
    cmd_crypt,
    cmd_analyze,
    cmd_reproduce,
)

console = Console() # 美化命令行输出

# 初始化主应用
app = typer.Typer(
    help="🔐 SindyCrypt - 数据驱动混沌映射辨识与图像加密工具",
    no_args_is_help=True,
    add_completion=False,
    rich_markup_mode="rich"
)


def _settings(ctx: typer.Context) -> RunConfig:
    return ctx.obj or RunConfig()


def _pick(value, fallback):
    """命令行参数优先，其次配置文件，最后内置默认值"""
    return fallback if value is None else value


@app.callback()
def main(
    ctx: typer.Context,
    config: Annotated[Optional[Path], typer.Option("--config", "-c", help="运行配置文件 (YAML)，不指定则使用内置默认值")] = None,
):
    if config is None:
        ctx.obj = RunConfig()
        return
    try:
        ctx.obj = ConfigOps.from_path(str(config)).load_run_config()
    except (FileNotFoundError, ValueError) as e:
        raise typer.BadParameter(str(e), param_hint="--config")


@app.command()
def init(
    force: Annotated[bool, typer.Option("--force", help="覆盖已存在的配置文件")] = False,
    set_: Annotated[Optional[List[str]], typer.Option("--set", help="修改配置项，如 --set identify.lambda=1e-3，可重复")] = None,
):
    """🛠️  在当前目录生成默认运行配置 sindycrypt-config.yaml"""
    cmd_init.run(force=force, assignments=set_)


@app.command()
def generate(
    ctx: typer.Context,
    source: Annotated[str, typer.Argument(help="内置映射名 (henon / lozi / logistic3d) 或模型文件路径")],
    out: Annotated[Path, typer.Option("--out", "-o", help="输出轨迹 CSV")] = Path("trajectory.csv"),
    x0: Annotated[Optional[str], typer.Option("--x0", help="初值，逗号分隔，如 0.1,0.1")] = None,
    n: Annotated[Optional[int], typer.Option("--n", help="输出状态个数")] = None,
    burn_in: Annotated[Optional[int], typer.Option("--burn-in", help="丢弃的前导迭代数")] = None,
    sigma: Annotated[Optional[float], typer.Option("--sigma", help="高斯噪声标准差")] = None,
    seed: Annotated[Optional[int], typer.Option("--seed", help="噪声种子")] = None,
    a: Annotated[Optional[float], typer.Option("--a", help="Hénon / Lozi 参数 a")] = None,
    b: Annotated[Optional[float], typer.Option("--b", help="Hénon / Lozi 参数 b")] = None,
):
    """
    📈 迭代映射生成训练轨迹

    \b
    1. 🗺️  [bold]选择映射[/]：内置映射或已辨识的模型文件。
    2. 🔁 [bold]循环迭代[/]：丢弃 burn-in 后输出 n 个状态 (不含初值)。
    3. 🌫️  [bold]可选加噪[/]：X + sigma·N(0,1)，种子固定即可复现。
    """
    s = _settings(ctx).generate
    cmd_generate.run(
        source=source,
        out=out,
        x0=_pick(x0, ",".join(map(repr, s.x0)) if s.x0 else None),
        n=_pick(n, s.n),
        burn_in=burn_in,
        sigma=_pick(sigma, s.sigma),
        seed=_pick(seed, s.seed),
        a=a,
        b=b,
        default_burn_in=s.burn_in,
    )


@app.command()
def identify(
    ctx: typer.Context,
    data: Annotated[Path, typer.Argument(help="轨迹 CSV")],
    out: Annotated[Optional[Path], typer.Option("--out", "-o", help="输出模型文件")] = None,
    max_degree: Annotated[Optional[int], typer.Option("--max-degree", help="候选库最高次数")] = None,
    lambda_: Annotated[Optional[float], typer.Option("--lambda", help="STLSQ 剪枝阈值")] = None,
    significance: Annotated[Optional[float], typer.Option("--significance", help="最终系数显著性阈值")] = None,
    include_abs: Annotated[Optional[bool], typer.Option("--abs/--no-abs", help="候选库加入 |v| 项")] = None,
    composite_lhs: Annotated[Optional[bool], typer.Option("--composite-lhs/--no-composite-lhs", help="加入 v_i'·v_j 形式的左端候选")] = None,
):
    """
    🔍 SINDy-PI 辨识：从轨迹恢复显式映射

    \b
    输出模型文件 (全精度系数)，并打印 4 位有效数字的方程与各坐标残差。
    """
    s = _settings(ctx).identify
    cmd_identify.run(
        data=data,
        out=out,
        max_degree=_pick(max_degree, s.max_degree),
        lambda_=_pick(lambda_, s.lambda_),
        significance=_pick(significance, s.significance),
        max_iter=s.max_iter,
        include_abs=_pick(include_abs, s.include_abs),
        composite_lhs=_pick(composite_lhs, s.composite_lhs),
    )


def _crypt_options(ctx: typer.Context, key: Optional[str], key_file: Optional[Path],
                   rounds: Optional[int]):
    if key is not None and key_file is not None:
        raise typer.BadParameter("--key 与 --key-file 只能二选一", param_hint="--key-file")
    s = _settings(ctx).cipher
    return _pick(key, ",".join(map(repr, s.key))), _pick(rounds, s.rounds), s.burn_in


@app.command()
def encrypt(
    ctx: typer.Context,
    image: Annotated[Path, typer.Argument(help="明文 P5 PGM")],
    out: Annotated[Path, typer.Option("--out", "-o", help="输出密文 PGM")] = Path("cipher.pgm"),
    map_source: Annotated[str, typer.Option("--map", "-m", help="内置映射名或模型文件")] = "henon",
    key: Annotated[Optional[str], typer.Option("--key", "-k", help="密钥 (初值)，逗号分隔")] = None,
    key_file: Annotated[Optional[Path], typer.Option("--key-file", help="从文件读取密钥")] = None,
    save_key: Annotated[Optional[Path], typer.Option("--save-key", help="把本次使用的密钥写入该文件")] = None,
    rounds: Annotated[Optional[int], typer.Option("--rounds", help="扩散轮数 (偶数)")] = None,
    dump_keystream: Annotated[Optional[Path], typer.Option("--dump-keystream", help="把 Q_1..Q_r 写入该文件")] = None,
):
    """🔒 置乱 + 多轮扩散加密"""
    key_text, rounds_value, burn_in = _crypt_options(ctx, key, key_file, rounds)
    cmd_crypt.run(
        mode="encrypt", image=image, out=out, map_source=map_source,
        key=key_text, rounds=rounds_value, burn_in=burn_in, dump_keystream=dump_keystream,
        key_file=key_file, save_key=save_key,
    )


@app.command()
def decrypt(
    ctx: typer.Context,
    image: Annotated[Path, typer.Argument(help="密文 P5 PGM")],
    out: Annotated[Path, typer.Option("--out", "-o", help="输出明文 PGM")] = Path("plain.pgm"),
    map_source: Annotated[str, typer.Option("--map", "-m", help="内置映射名或模型文件")] = "henon",
    key: Annotated[Optional[str], typer.Option("--key", "-k", help="密钥 (初值)，逗号分隔")] = None,
    key_file: Annotated[Optional[Path], typer.Option("--key-file", help="从文件读取密钥 (如 encrypt --save-key 的输出)")] = None,
    rounds: Annotated[Optional[int], typer.Option("--rounds", help="扩散轮数 (偶数)")] = None,
):
    """🔓 解密：逆扩散 + 逆置乱，与加密参数必须完全一致"""
    key_text, rounds_value, burn_in = _crypt_options(ctx, key, key_file, rounds)
    cmd_crypt.run(
        mode="decrypt", image=image, out=out, map_source=map_source,
        key=key_text, rounds=rounds_value, burn_in=burn_in, dump_keystream=None,
        key_file=key_file,
    )


@app.command()
def analyze(
    ctx: typer.Context,
    plain: Annotated[Path, typer.Argument(help="明文 PGM")],
    cipher: Annotated[Optional[Path], typer.Argument(help="密文 PGM (可选)")] = None,
    out: Annotated[Optional[Path], typer.Option("--out", "-o", help="JSON 报告路径，不指定则打印到终端")] = None,
    seed: Annotated[Optional[int], typer.Option("--seed", help="相关性抽样种子")] = None,
    pairs: Annotated[Optional[int], typer.Option("--pairs", help="相邻像素对数")] = None,
    hist: Annotated[Optional[Path], typer.Option("--hist", help="直方图 CSV 输出路径")] = None,
    scatter: Annotated[Optional[Path], typer.Option("--scatter", help="相邻像素散点 CSV 输出目录")] = None,
):
    """
    📊 统计安全性分析

    \b
    信息熵、χ² 检验、三方向相邻像素相关性；给出密文时追加 NPCR / UACI / PSNR。
    """
    s = _settings(ctx).analysis
    cmd_analyze.run(
        plain=plain, cipher=cipher, out=out,
        seed=_pick(seed, s.seed), pairs=_pick(pairs, s.pairs),
        hist=hist, scatter=scatter,
    )


@app.command()
def reproduce(
    target: Annotated[str, typer.Argument(help="t1..t9 / fig2 / fig3 / s57 / all")],
    workdir: Annotated[Path, typer.Option("--workdir", "-w", help="结果输出目录")] = Path("reproduce-out"),
    image: Annotated[Optional[Path], typer.Option("--image", help="替换内置测试图像的 PGM (例如原始 Moon surface)")] = None,
    strict: Annotated[bool, typer.Option("--strict", help="任一对照项 FAIL 时以退出码 1 结束")] = False,
):
    """
    🧪 复现参考表格与扫描曲线

    \b
    每个目标写出 CSV，并打印与参考值的对照 (PASS / FAIL)。
    """
    cmd_reproduce.run(target=target, workdir=workdir, image=image, strict=strict)


@app.command()
def version():
    """显示当前版本"""
    console.print(f"SindyCrypt [bold green]v{__version__}[/bold green]")
