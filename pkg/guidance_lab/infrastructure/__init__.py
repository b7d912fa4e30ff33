"""
Infrastructure layer package.

Concrete metrics, networks, datasets, configuration, file integrations and
the command-line interface.
"""
__all__ = ["cli", "config", "datasets", "integrations", "metrics", "networks"]
