"""运行配置管理工具类"""
import yaml
from pathlib import Path
from typing import Optional, Dict, Any, List, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator


# ==========================================
# 配置模型 (pydantic 强类型校验)
# ==========================================

class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class GenerateSettings(_Section):
    x0: Optional[List[float]] = None      # None 表示使用内置映射的默认初值
    n: int = Field(10000, ge=1)
    burn_in: int = Field(0, ge=0)
    sigma: float = Field(0.0, ge=0.0)
    seed: int = 7


class IdentifySettings(_Section):
    max_degree: int = Field(3, ge=1, le=5)
    lambda_: float = Field(0.01, gt=0.0, alias="lambda")
    significance: float = Field(1e-4, ge=0.0)
    max_iter: int = Field(20, ge=1)
    include_abs: bool = False
    composite_lhs: bool = False


class CipherSettings(_Section):
    key: List[float] = Field(default_factory=lambda: [0.2, 0.3])
    rounds: int = 4
    burn_in: int = Field(500, ge=0)

    @field_validator("rounds")
    @classmethod
    def _even_rounds(cls, v: int) -> int:
        if v < 2 or v % 2:
            raise ValueError("rounds 必须是 >= 2 的偶数")
        return v


class AnalysisSettings(_Section):
    pairs: int = Field(5000, ge=1)
    seed: int = 2024
    trials: int = Field(50, ge=1)


class RunConfig(_Section):
    generate: GenerateSettings = Field(default_factory=GenerateSettings)
    identify: IdentifySettings = Field(default_factory=IdentifySettings)
    cipher: CipherSettings = Field(default_factory=CipherSettings)
    analysis: AnalysisSettings = Field(default_factory=AnalysisSettings)


class ConfigOps:
    """配置文件管理工具类

    负责配置文件的创建、检查和读写操作。配置只在显式传入 --config 时读取。
    """

    DEFAULT_CONFIG_NAME = "sindycrypt-config.yaml"

    DEFAULT_CONFIG_TEMPLATE = {
        # 轨迹生成 (x0 留空则使用内置映射的默认初值)
        "generate": {
            "x0": None,
            "n": 10000,
            "burn_in": 0,
            "sigma": 0.0,
            "seed": 7,
        },

        # SINDy-PI 辨识超参数
        "identify": {
            "max_degree": 3,
            "lambda": 0.01,          # STLSQ 剪枝阈值
            "significance": 0.0001,  # 最终系数显著性阈值
            "max_iter": 20,
            "include_abs": False,    # Lozi 一类分段线性映射需要打开
            "composite_lhs": False,
        },

        # 加密参数
        "cipher": {
            "key": [0.2, 0.3],       # 显式密钥 = 映射初值
            "rounds": 4,             # 正向/反向交替，必须为偶数
            "burn_in": 500,
        },

        # 安全性分析
        "analysis": {
            "pairs": 5000,
            "seed": 2024,
            "trials": 50,
        },
    }

    def __init__(self, work_dir: Optional[str] = None,
                 config_name: Optional[str] = None):
        """初始化配置管理器

        Args:
            work_dir: 工作目录路径，默认为当前目录
            config_name: 配置文件名称，默认为 sindycrypt-config.yaml
        """
        self.work_dir = Path(work_dir).resolve() if work_dir else Path.cwd()
        self.config_name = config_name or self.DEFAULT_CONFIG_NAME
        self.config_path = self.work_dir / self.config_name

    @classmethod
    def from_path(cls, path: str) -> "ConfigOps":
        p = Path(path)
        return cls(work_dir=str(p.parent), config_name=p.name)

    def has_config(self) -> bool:
        """检查配置文件是否存在"""
        return self.config_path.exists() and self.config_path.is_file()

    def create_default_config(self, overwrite: bool = False) -> Path:
        """创建默认配置文件

        Args:
            overwrite: 如果文件已存在是否覆盖，默认为 False

        Returns:
            配置文件路径

        Raises:
            FileExistsError: 当文件已存在且 overwrite=False 时
        """
        if self.has_config() and not overwrite:
            raise FileExistsError(
                f"配置文件已存在: {self.config_path}。"
                "如需覆盖，请使用 --force"
            )

        self.work_dir.mkdir(parents=True, exist_ok=True)
        self.save_config(self.DEFAULT_CONFIG_TEMPLATE)
        return self.config_path

    def load_config(self) -> Dict[str, Any]:
        """加载配置文件

        Raises:
            FileNotFoundError: 当配置文件不存在时
            yaml.YAMLError: 当配置文件格式错误时
        """
        if not self.has_config():
            raise FileNotFoundError(
                f"配置文件不存在: {self.config_path}。"
                "请先运行 'sindycrypt init' 创建配置文件。"
            )

        with open(self.config_path, 'r', encoding='utf-8') as f:
            config = yaml.safe_load(f)

        return config or {}

    def save_config(self, config: Dict[str, Any]) -> None:
        with open(self.config_path, 'w', encoding='utf-8') as f:
            yaml.dump(
                config,
                f,
                allow_unicode=True,
                default_flow_style=False,
                sort_keys=False
            )

    def update_config(self, updates: Dict[str, Any]) -> Dict[str, Any]:
        """更新配置文件（部分更新），校验通过才写回，返回更新后的完整配置

        Raises:
            ValueError: 更新后的配置不合法，文件保持不变
        """
        config = self.load_config()
        self._deep_update(config, updates)
        try:
            RunConfig.model_validate(config)
        except ValidationError as e:
            raise ValueError(_format_errors(e)) from e
        self.save_config(config)
        return config

    @staticmethod
    def _deep_update(base: Dict[str, Any], updates: Dict[str, Any]) -> None:
        """深度更新字典（递归更新嵌套字典）"""
        for key, value in updates.items():
            if isinstance(value, dict) and isinstance(base.get(key), dict):
                ConfigOps._deep_update(base[key], value)
            else:
                base[key] = value

    @staticmethod
    def parse_assignment(text: str) -> Tuple[str, Dict[str, Any]]:
        """把 "identify.lambda=1e-3" 解析为 (点号路径, 嵌套更新字典)

        值按 YAML 标量解析；YAML 不认的科学计数法 (如 1e-3) 再按浮点数解析。

        Raises:
            ValueError: 缺少 '='、路径为空或值不是合法 YAML
        """
        path, sep, raw = text.partition("=")
        keys = [k.strip() for k in path.split(".")]
        if not sep or not all(keys):
            raise ValueError(f"应为 section.key=value 形式, 得到 {text!r}")
        try:
            value = yaml.safe_load(raw) if raw.strip() else None
        except yaml.YAMLError as e:
            raise ValueError(f"无法解析 {path} 的值 {raw!r}: {e}") from e
        if isinstance(value, str):
            try:
                value = float(value)
            except ValueError:
                pass
        update: Dict[str, Any] = {keys[-1]: value}
        for key in reversed(keys[:-1]):
            update = {key: update}
        return ".".join(keys), update

    @classmethod
    def parse_assignments(cls, texts: List[str]) -> Tuple[List[str], Dict[str, Any]]:
        """解析多条赋值并合并为一个更新字典，返回 (点号路径列表, 更新字典)"""
        paths: List[str] = []
        updates: Dict[str, Any] = {}
        for text in texts:
            path, update = cls.parse_assignment(text)
            paths.append(path)
            cls._deep_update(updates, update)
        return paths, updates

    def get_config_value(self, key_path: str, default: Any = None) -> Any:
        """获取配置值（支持点号路径）

        Example:
            config_ops.get_config_value("identify.lambda")
            config_ops.get_config_value("cipher.rounds", 4)
        """
        try:
            value = self.load_config()
            for key in key_path.split('.'):
                value = value[key]
            return value
        except (FileNotFoundError, KeyError, TypeError):
            return default

    def load_run_config(self) -> RunConfig:
        """加载并校验为 RunConfig

        Raises:
            FileNotFoundError: 配置文件不存在
            ValueError: 配置内容不合法 (pydantic 校验失败或 YAML 格式错误)
        """
        try:
            return RunConfig.model_validate(self.load_config())
        except yaml.YAMLError as e:
            raise ValueError(f"配置文件格式错误: {e}") from e
        except ValidationError as e:
            raise ValueError(_format_errors(e)) from e

    def validate_config(self) -> tuple[bool, list[str]]:
        """验证配置文件的完整性

        Returns:
            (是否有效, 错误信息列表)
        """
        if not self.has_config():
            return False, ["配置文件不存在"]

        try:
            RunConfig.model_validate(self.load_config())
        except yaml.YAMLError as e:
            return False, [f"配置文件格式错误: {e}"]
        except ValidationError as e:
            return False, _format_errors(e).splitlines()

        return True, []


def _format_errors(error: ValidationError) -> str:
    lines = []
    for item in error.errors():
        where = ".".join(str(part) for part in item["loc"])
        lines.append(f"{where}: {item['msg']}")
    return "\n".join(lines)
