"""
求和协议模块 - 数据模型
"""
