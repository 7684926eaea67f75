"""
hcsketch - 超图模式计数的流式线性sketch
在带插入/删除的超图边流上 (1±ε) 近似模式H的出现次数，sketch可合并，附带暴力精确计数用于验证
"""

__version__ = "0.1.0"
