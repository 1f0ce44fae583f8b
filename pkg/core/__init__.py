"""Core package - 可构造层计算核心"""
__version__ = '0.1.0'
