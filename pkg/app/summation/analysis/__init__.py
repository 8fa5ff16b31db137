"""
求和协议模块 - 统计实验与解析公式
"""
