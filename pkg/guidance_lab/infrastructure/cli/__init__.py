"""
Command-line interface for guidance-lab.
"""
__all__ = ["main"]

from .guidance_cli import main
