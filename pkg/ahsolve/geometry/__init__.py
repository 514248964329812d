# -*- coding: utf-8 -*-
"""
__init__.py
Geometry Module
=====================

Periodic grids, almost Hermitian structures, ∂∂̄ and Hermitian pencils.
"""
