"""Reference CIEDE2000 values from scikit-image for the color-loss tests.

Prints C++ initializer rows: {r1, g1, b1, r2, g2, b2, L1, a1, b1, deltaE}.
"""
import numpy as np
from skimage.color import rgb2lab, deltaE_ciede2000

rng = np.random.default_rng(20261016)
pairs = [
    ((0.5, 0.5, 0.5), (0.5, 0.5, 0.5)),
    ((0.5, 0.5, 0.5), (0.55, 0.5, 0.5)),
    ((0.9, 0.1, 0.1), (0.1, 0.9, 0.1)),
    ((0.2, 0.3, 0.8), (0.25, 0.3, 0.75)),
    ((0.0, 0.0, 0.0), (1.0, 1.0, 1.0)),
    ((0.02, 0.01, 0.03), (0.03, 0.02, 0.01)),
]
for _ in range(8):
    a = rng.uniform(0, 1, 3)
    b = np.clip(a + rng.normal(0, 0.15, 3), 0, 1)
    pairs.append((tuple(a), tuple(b)))
for a, b in pairs:
    la = rgb2lab(np.array(a, dtype=np.float64).reshape(1, 1, 3))[0, 0]
    lb = rgb2lab(np.array(b, dtype=np.float64).reshape(1, 1, 3))[0, 0]
    de = deltaE_ciede2000(la, lb)
    vals = list(a) + list(b) + list(la) + [de]
    print("    {" + ", ".join(f"{v:.10g}" for v in vals) + "},")
