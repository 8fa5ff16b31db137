"""
SQSum - 两方半量子求和协议模拟器
"""
__version__ = "0.1.0"
__author__ = "SQSum Team"
