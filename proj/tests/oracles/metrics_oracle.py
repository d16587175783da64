"""Reference values for the metrics tests.

Builds a degraded copy of each test photo (written to tests/data/metrics) and
prints PSNR/SSIM between photo and copy, plus NIQE of both, using
scikit-image for SSIM and the BasicSR NIQE implementation
(BASICSR_DIR points at an unpacked basicsr source tree).
"""
import importlib.util
import os
import sys
import types

import numpy as np
from scipy.ndimage import gaussian_filter
from skimage import io
from skimage.metrics import structural_similarity

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(HERE, "..", "data")
PHOTOS = ["astronaut", "chelsea", "coffee", "rocket", "motorcycle"]


def load_module(name, path):
    spec = importlib.util.spec_from_file_location(name, path)
    mod = importlib.util.module_from_spec(spec)
    sys.modules[name] = mod
    spec.loader.exec_module(mod)
    return mod


def basicsr_niqe():
    root = os.environ.get("BASICSR_DIR", "/tmp/bsr/basicsr-1.4.2/basicsr")
    for pkg in ["basicsr", "basicsr.utils", "basicsr.metrics"]:
        sys.modules[pkg] = types.ModuleType(pkg)
    color = load_module("basicsr.utils.color_util", os.path.join(root, "utils", "color_util.py"))
    sys.modules["basicsr.utils"].bgr2ycbcr = color.bgr2ycbcr
    load_module("basicsr.utils.matlab_functions", os.path.join(root, "utils", "matlab_functions.py"))
    reg = types.ModuleType("basicsr.utils.registry")

    class _Reg:
        def register(self):
            return lambda f: f

    reg.METRIC_REGISTRY = _Reg()
    sys.modules["basicsr.utils.registry"] = reg
    load_module("basicsr.metrics.metric_util", os.path.join(root, "metrics", "metric_util.py"))
    return load_module("basicsr.metrics.niqe", os.path.join(root, "metrics", "niqe.py"))


def luma(img):
    return 0.299 * img[..., 0] + 0.587 * img[..., 1] + 0.114 * img[..., 2]


def degrade(img, seed):
    rng = np.random.default_rng(seed)
    out = np.stack([gaussian_filter(img[..., c], 0.8) for c in range(3)], axis=-1)
    out = out + rng.normal(0, 0.02, out.shape)
    return np.round(np.clip(out, 0, 1) * 255) / 255


def main():
    niqe = basicsr_niqe()
    os.makedirs(os.path.join(DATA, "metrics"), exist_ok=True)
    for i, name in enumerate(PHOTOS):
        a = io.imread(os.path.join(DATA, "photos", name + ".png"))[..., :3].astype(np.float64) / 255
        path = os.path.join(DATA, "metrics", name + "_degraded.png")
        if not os.path.exists(path):
            io.imsave(path, (degrade(a, i) * 255).round().astype(np.uint8), check_contrast=False)
        b = io.imread(path)[..., :3].astype(np.float64) / 255
        ya, yb = luma(a)[4:-4, 4:-4], luma(b)[4:-4, 4:-4]
        psnr = 10 * np.log10(1 / np.mean((ya - yb) ** 2))
        ssim = structural_similarity(ya, yb, gaussian_weights=True, sigma=1.5,
                                     use_sample_covariance=False, data_range=1.0)
        na = niqe.calculate_niqe(a[..., ::-1] * 255, 0)
        nb = niqe.calculate_niqe(b[..., ::-1] * 255, 0)
        print(f'{{"{name}", {psnr:.10f}, {ssim:.10f}, {na:.8f}, {nb:.8f}}},')


if __name__ == "__main__":
    main()
