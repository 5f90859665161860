import os
from dataclasses import dataclass, field, replace
from typing import Tuple

from .errors import ErrInvalidParameter

THREADS_ENV = "CAYLEY_SPECTRA_THREADS"


def _default_trace_schedule() -> Tuple[float, ...]:
    return tuple(4.0 ** (-j) for j in range(1, 9))


@dataclass(frozen=True)
class Options:
    """计算配置选项"""

    dense_cap: int = 4096  # 稠密特征值求解的最大维数
    max_ball_vertices: int = 2 ** 25  # 允许构造的球的最大顶点数
    threads: int = 1  # 实验并行线程数
    truncation_schedule: Tuple[int, ...] = (32, 64, 128, 256)  # 久期方程截断序列
    max_truncation_path: int = 1 << 16  # 路径型扰动截断上限
    max_truncation_radial: int = 512  # 子树径向截断上限
    secular_move_tol: float = 1e-8  # 外推根的移动阈值
    secular_root_tol: float = 1e-13  # 单个截断下的求根精度
    eig_tol: float = 1e-12  # 顶部特征对残差容差
    cg_rtol: float = 1e-12  # 共轭梯度相对残差
    cg_maxiter: int = 20000  # 共轭梯度最大迭代次数
    ids_tail_tol: float = 1e-10  # 态密度级数尾项容差
    trace_schedule: Tuple[float, ...] = field(default_factory=_default_trace_schedule)  # λ-λ* 序列
    json_indent: int = 2  # JSON 缩进

    def __post_init__(self):
        if self.dense_cap < 1:
            raise ErrInvalidParameter(f"dense_cap must be positive, got {self.dense_cap}")
        if self.threads < 1:
            raise ErrInvalidParameter(f"threads must be positive, got {self.threads}")
        schedule = self.truncation_schedule
        if not schedule or any(n < 1 for n in schedule) or list(schedule) != sorted(set(schedule)):
            raise ErrInvalidParameter(f"truncation schedule must be strictly increasing, got {schedule}")

    @classmethod
    def from_env(cls, **overrides) -> "Options":
        """从环境变量读取配置

        Args:
            **overrides: 显式覆盖的字段

        Returns:
            配置对象

        Raises:
            ErrInvalidParameter: 环境变量不是正整数
        """
        raw = os.environ.get(THREADS_ENV)
        if raw is not None and "threads" not in overrides:
            try:
                overrides["threads"] = int(raw)
            except ValueError:
                raise ErrInvalidParameter(f"{THREADS_ENV} must be an integer, got {raw!r}")
        return cls(**overrides)

    def with_changes(self, **changes) -> "Options":
        return replace(self, **changes)


DEFAULT_OPTIONS = Options()


def resolve(options=None) -> Options:
    return DEFAULT_OPTIONS if options is None else options
