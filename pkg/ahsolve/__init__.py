# -*- coding: utf-8 -*-
"""
__init__.py
AHSolve Package
=====================

Top-level package for AHSolve containing submodules:
- cli: command-line interface
- calculus: symmetric operators on eigenvalue cones
- geometry: periodic grids, almost Hermitian structures, eigenvalue pencils
- solver: Newton and continuity-path solves
- monitor: a priori estimate diagnostics
"""

__version__ = "0.1.0"
