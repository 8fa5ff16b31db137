"""
SQSum - 半量子求和协议模拟模块
"""
