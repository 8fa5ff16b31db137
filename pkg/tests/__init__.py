"""
TestMind AI - 测试包
"""
