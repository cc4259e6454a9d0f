"""数值核心：混沌映射、稀疏辨识、密钥流、置乱-扩散加密与安全性分析"""
