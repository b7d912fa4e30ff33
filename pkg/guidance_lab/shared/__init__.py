"""
Shared layer: tensor core, constants and logging helpers.
"""
