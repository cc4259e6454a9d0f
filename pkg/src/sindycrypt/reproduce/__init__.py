"""参考数据复现目标"""
