from typing import Any, Dict, List

from sindycrypt.core.errors import SindyCryptError
# 引入目标注册表
from sindycrypt.reproduce.targets import TARGETS, TargetReport


class Executor:
    """执行器：负责目标分发"""

    @staticmethod
    def expand(target: str) -> List[str]:
        """把 all 展开为全部目标 id

        Raises:
            ValueError: 未知目标
        """
        if target == "all":
            return list(TARGETS)
        if target not in TARGETS:
            raise ValueError(f"未知目标: {target} (可选: {', '.join(TARGETS)}, all)")
        return [target]

    @staticmethod
    def dispatch_target(target: str, context: Dict[str, Any]) -> TargetReport:
        """
        分发单个目标

        Raises:
            ValueError: 未知目标
            RuntimeError: 目标执行过程中出错 (保留原始异常链)
        """
        if target not in TARGETS:
            raise ValueError(f"未知目标: {target}")

        try:
            return TARGETS[target].run(context)
        except (SindyCryptError, OSError) as e:
            # 抛出异常让上层捕获，其余目标不受影响
            raise RuntimeError(f"目标 {target} ({TARGETS[target].title}) 执行失败: {e}") from e
