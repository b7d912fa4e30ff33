from .metric_interface import DissimilarityMetric
from .network_interface import NetworkInterface

__all__ = ["DissimilarityMetric", "NetworkInterface"]
