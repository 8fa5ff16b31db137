"""
TestMind AI - 单元测试包
"""
