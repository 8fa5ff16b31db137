"""
求和协议模块 - 量子态代数与信道
"""
