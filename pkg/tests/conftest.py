"""
pytest configuration for the guidance-lab test suite.

Provides:
- Module path setup for imports
- Environment variable loading
- Shared fixtures: 64-bit tensor context, seeded RNG factory, tiny datasets
  and experiment configs
- Finite-difference gradient helpers
- The ``slow`` marker, skipped unless GUIDANCE_LAB_RUN_SLOW=1
"""
from __future__ import annotations

import logging
import os
import sys
from pathlib import Path
from typing import Callable

import numpy as np
import pytest
from dotenv import load_dotenv


# =============================================================================
# Path Setup
# =============================================================================

# Add project root to Python path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

# Add tests directory to path
tests_dir = Path(__file__).parent
sys.path.insert(0, str(tests_dir))


# =============================================================================
# Environment Setup
# =============================================================================

# Load environment variables for tests
load_dotenv()

RUN_SLOW = os.getenv("GUIDANCE_LAB_RUN_SLOW", "") == "1"

from guidance_lab.infrastructure.config import ExperimentConfig  # noqa: E402
from guidance_lab.infrastructure.datasets import ImageSynthSpec, load_image_dataset  # noqa: E402
from guidance_lab.shared.core import RngState, default_dtype  # noqa: E402


# =============================================================================
# Session-Scoped Fixtures
# =============================================================================

@pytest.fixture(scope="session")
def project_root_path():
    """Provide project root path to tests."""
    return project_root


@pytest.fixture(scope="session")
def tiny_image_split():
    """
    60 synthetic 1x8x8 images in 4 classes (48/6/6).

    Session-scoped: generation is deterministic and the split is immutable.
    """
    spec = ImageSynthSpec(classes=4, height=8, width=8, channels=1, n=60)
    return load_image_dataset(synth_spec=spec, seed=0)


# =============================================================================
# Function-Scoped Fixtures
# =============================================================================

@pytest.fixture(autouse=True)
def reset_package_logger():
    """Drop handlers that setup_logging() attached during a test."""
    yield
    package_logger = logging.getLogger("guidance_lab")
    for handler in list(package_logger.handlers):
        handler.close()
        package_logger.removeHandler(handler)
    package_logger.propagate = True
    package_logger.setLevel(logging.NOTSET)


@pytest.fixture
def float64():
    """Create tensors in 64-bit precision for the duration of the test."""
    with default_dtype(np.float64):
        yield np.float64


@pytest.fixture
def rng_factory() -> Callable[[int], RngState]:
    """
    Fresh seeded RNG streams.

    Example:
        def test_something(rng_factory):
            rng = rng_factory(3)
    """
    return RngState


@pytest.fixture
def tiny_config_factory(tmp_path):
    """
    Build small image-task ExperimentConfigs with top-level overrides applied
    on top of a two-block FCN target.

    Example:
        config = tiny_config_factory(epochs=2, guidance={"guide_mode": "untrained"})
    """
    def _make(**overrides) -> ExperimentConfig:
        document = {
            "experiment_id": "tiny",
            "task": "images",
            "data": {"n": 60, "seed": 0, "image_classes": 4, "image_size": 8},
            "target_spec": {
                "family": "fcn", "depth": 2, "width": 8, "classes": 4, "input_shape": [1, 8, 8],
            },
            "lr": 1e-2,
            "batch_size": 16,
            "epochs": 2,
            "seeds": [0],
            "output_dir": str(tmp_path / "runs"),
        }
        if overrides.get("guidance", {}).get("guide_mode", "none") != "none":
            document["guide_spec"] = {
                "family": "fcn", "depth": 1, "width": 8, "classes": 4, "input_shape": [1, 8, 8],
            }
        document.update(overrides)
        return ExperimentConfig.model_validate(document)

    return _make


# =============================================================================
# Test Helpers
# =============================================================================

def numeric_gradient(fn: Callable[[], float], array: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """
    Central finite differences of the scalar ``fn()`` with respect to ``array``.

    ``array`` is perturbed in place and restored; ``fn`` must read it on every call.
    """
    grad = np.zeros_like(array, dtype=np.float64)
    flat = array.reshape(-1)
    out = grad.reshape(-1)
    for i in range(flat.size):
        original = flat[i]
        flat[i] = original + h
        plus = fn()
        flat[i] = original - h
        minus = fn()
        flat[i] = original
        out[i] = (plus - minus) / (2 * h)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """||a - n|| / max(1e-8, ||a|| + ||n||) over the whole array."""
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    scale = max(1e-8, float(np.linalg.norm(analytic) + np.linalg.norm(numeric)))
    return float(np.linalg.norm(analytic - numeric) / scale)


@pytest.fixture
def grad_check():
    """
    Compare backward() gradients with central differences.

    Example:
        err = grad_check(lambda: (x * x).sum(), [x])
        assert err < 1e-6
    """
    from guidance_lab.shared.core import backward, no_grad, zero_grads

    def _value(build_loss) -> float:
        with no_grad():
            return float(build_loss().data)

    def _check(build_loss, leaves, h: float = 1e-6) -> float:
        zero_grads(leaves)
        backward(build_loss())
        worst = 0.0
        for leaf in leaves:
            numeric = numeric_gradient(lambda: _value(build_loss), leaf.data, h)
            worst = max(worst, relative_error(leaf.grad, numeric))
        return worst

    return _check


# =============================================================================
# Pytest Markers
# =============================================================================

def pytest_configure(config):
    """Register custom pytest markers."""
    config.addinivalue_line(
        "markers",
        "slow: end-to-end training runs; set GUIDANCE_LAB_RUN_SLOW=1 to enable"
    )


# =============================================================================
# Test Collection Hooks
# =============================================================================

def pytest_collection_modifyitems(config, items):
    """Skip tests marked @pytest.mark.slow unless GUIDANCE_LAB_RUN_SLOW=1."""
    skip_slow = pytest.mark.skip(reason="slow test; set GUIDANCE_LAB_RUN_SLOW=1")

    for item in items:
        if "slow" in item.keywords and not RUN_SLOW:
            item.add_marker(skip_slow)
