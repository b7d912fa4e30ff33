# demo_cka.py
"""Linear CKA and RSA on small hand-made representations."""
import numpy as np

from guidance_lab.infrastructure.metrics import get_metric, linear_cka, rsa_similarity
from guidance_lab.shared.core import RngState, default_dtype

with default_dtype(np.float64):
    r = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    r_prime = np.array([[1.0], [2.0], [3.0]])
    print(f"CKA(R, R') = {linear_cka(r, r_prime).item():.5f}  (3 / (2 * sqrt(10)) = {3 / (2 * np.sqrt(10)):.5f})")

    rng = RngState(0)
    x = rng.standard_normal((16, 8))
    q, _ = np.linalg.qr(rng.standard_normal((8, 8)))
    print(f"CKA(X, 3 * X @ Q) = {linear_cka(x, 3.0 * x @ q).item():.6f}")
    print(f"RSA(X, X)         = {rsa_similarity(x, x).item():.6f}")

    y = rng.standard_normal((16, 4))
    for name in ("cka", "rsa"):
        metric = get_metric(name)
        print(f"{name} dissimilarity of unrelated representations: {metric.dissimilarity(x, y).item():.4f}")
