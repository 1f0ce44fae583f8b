"""Services package - 服务模块包：文件格式、报告渲染、样本生成"""
