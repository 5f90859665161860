"""
cayley_spectra - 带自环扰动的 Cayley 树谱计算库
"""

__version__ = "0.1.0"
