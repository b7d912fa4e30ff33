"""
guidance_lab package root.

Training laboratory for guidance: a target network is trained on its task loss
plus a layer-wise representational dissimilarity against a frozen guide.

Organized into domain, application, infrastructure and shared layers.
"""
__version__ = "0.3.0"

__all__ = ["domain", "application", "infrastructure", "shared"]
