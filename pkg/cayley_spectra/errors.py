"""错误定义模块

该模块定义了谱计算中可能遇到的各种错误类型。
"""


class ErrCayleySpectra(Exception):
    """所有错误的基类"""
    def __init__(self, message="Cayley spectra error"):
        self.message = message
        super().__init__(self.message)


class ErrInvalidParameter(ErrCayleySpectra, ValueError):
    """参数非法错误"""
    def __init__(self, message="Invalid parameter"):
        super().__init__(message)


class ErrVertexIndex(ErrCayleySpectra, IndexError):
    """顶点编号越界错误"""
    def __init__(self, message="Vertex id out of range"):
        super().__init__(message)


class ErrDomain(ErrCayleySpectra):
    """谱参数不在定义域内（例如 λ 位于谱内）"""
    def __init__(self, message="Spectral parameter outside the domain"):
        super().__init__(message)


class ErrCapacity(ErrCayleySpectra):
    """规模超出容量错误"""
    def __init__(self, message="Problem size exceeds capacity"):
        super().__init__(message)


class ErrSize(ErrInvalidParameter):
    """尺寸不匹配错误（扰动超出球，或超过稠密求解上限）"""
    def __init__(self, message="Size mismatch"):
        super().__init__(message)


class ErrContractViolation(ErrCayleySpectra):
    """前置条件不满足错误"""
    def __init__(self, message="Contract violation"):
        super().__init__(message)


class ErrNoHiddenSpectrum(ErrCayleySpectra):
    """扰动未能抬高算子范数"""
    def __init__(self, message="Perturbation does not raise the operator norm"):
        super().__init__(message)


class ErrRecurrentCase(ErrCayleySpectra):
    """常返情形，迹的极限发散"""
    def __init__(self, message="Recurrent case: the trace diverges"):
        super().__init__(message)


class ErrConvergence(ErrCayleySpectra):
    """迭代未收敛错误"""
    def __init__(self, message="Iteration did not converge", last_residual=None):
        self.last_residual = last_residual
        if last_residual is not None:
            message = f"{message} (last residual {last_residual:.3e})"
        super().__init__(message)


class ErrUnsupportedOperation(ErrCayleySpectra):
    """不支持的操作错误"""
    def __init__(self, message="Unsupported operation"):
        super().__init__(message)


class ErrTripletFormat(ErrCayleySpectra):
    """三元组文本格式错误"""
    def __init__(self, message="Malformed triplet text"):
        super().__init__(message)
