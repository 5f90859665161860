#!/usr/bin/env python
"""
cayley-spectra 实验启动脚本
对照带自环扰动的 Cayley 树的闭式谱量与有限球数值，输出 JSON/CSV 报告

用法:
    python run.py norm --Q 3 --pert segment
    python run.py norm --Q 3 --pert root-loops --k 1
    python run.py classify --Q 4 --pert subtree --q 3
    python run.py report --out ./results [--fast] [--threads 8]
选项:
    --Q Q           树的度，默认为 3
    --pert NAME     扰动族 root-loops/segment/ray/subtree，默认为 segment
    --out DIR       输出目录，不指定时只打印结果
    --json          把报告打印为 JSON
"""

import sys

from cayley_spectra.experiments.cli import main

if __name__ == "__main__":
    sys.exit(main())
