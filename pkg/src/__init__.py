"""
Relative-Smoothness Toolkit - first-order convex optimization with reference functions.
"""
