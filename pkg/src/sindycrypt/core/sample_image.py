"""内置测试图像

原始 "Moon surface" 图像不随仓库分发，这里用确定性生成的环形山地形代替：
低频起伏 + 若干陨石坑 (碗状凹陷 + 坑缘) + 细纹理，统计特性接近自然灰度图
(相邻像素强相关、直方图不均匀)。需要原图时用 --image 指定 PGM 文件。
"""
import numpy as np

from sindycrypt.core.cipher import GrayImage

DEFAULT_IMAGE_SEED = 20240601


def moon_surface_standin(size: int = 256, seed: int = DEFAULT_IMAGE_SEED) -> GrayImage:
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:size, 0:size] / float(size)

    relief = np.full((size, size), 0.52)
    for amplitude, fx, fy in ((0.14, 1.3, 0.4), (0.09, 0.7, -1.9), (0.05, 3.1, 2.3)):
        phase = rng.uniform(0.0, 2.0 * np.pi)
        relief += amplitude * np.sin(2.0 * np.pi * (fx * xx + fy * yy) + phase)

    for _ in range(36):
        cx, cy = rng.uniform(0.0, 1.0, size=2)
        radius = rng.uniform(0.015, 0.09)
        depth = rng.uniform(0.05, 0.16)
        d = np.hypot(xx - cx, yy - cy) / radius
        relief -= depth * np.clip(1.0 - d * d, 0.0, None)
        relief += 0.45 * depth * np.exp(-((d - 1.0) / 0.18) ** 2)

    texture = rng.normal(0.0, 0.012, size=(size, size))
    # 沿两个方向做一次三点平滑，让纹理带一点空间相关
    texture = (texture + np.roll(texture, 1, axis=0) + np.roll(texture, 1, axis=1)) / 3.0
    pixels = np.clip(np.rint((relief + texture) * 255.0), 0, 255).astype(np.uint8)
    return GrayImage(pixels)
