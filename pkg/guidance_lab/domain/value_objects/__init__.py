"""
Domain value objects package.

Small immutable enumerations shared by configs, networks and the harness.
"""
from .families import NetworkFamily, Activation, Readout
from .modes import GuideMode, GuideInput, MetricName, NormMode
from .tasks import TaskName, TaskLossName, OptimizerName

__all__ = [
    "NetworkFamily",
    "Activation",
    "Readout",
    "GuideMode",
    "GuideInput",
    "MetricName",
    "NormMode",
    "TaskName",
    "TaskLossName",
    "OptimizerName",
]
