"""
TilingForge - Source Package

Quivers with superpotential, brane tilings and the toric geometry they encode.
"""

__version__ = "0.1.0"
