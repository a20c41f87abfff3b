"""
Core utilities and base classes.
"""
