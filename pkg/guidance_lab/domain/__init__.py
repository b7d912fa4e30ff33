"""
Domain layer package.

Contains pure data (entities, value objects, exceptions). This package must
not import numerics, networks or delivery mechanisms.
"""
from . import exceptions

__all__ = ["exceptions"]
