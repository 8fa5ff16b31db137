"""
SQSum - 核心模块
"""
