"""
SQSum - 命令行模块
"""
