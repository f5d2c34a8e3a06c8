"""
核心计算模块
表示、理想、包络、本原性、mi-链、巢表示与穷举预言机
"""
