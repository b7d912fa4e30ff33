"""
Application layer package.

Contains the guidance, training and analysis services, the experiment use
cases, and the interfaces (ABCs) the infrastructure layer implements.
"""
__all__ = ["interfaces", "services", "use_cases"]
