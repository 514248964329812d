# -*- coding: utf-8 -*-
"""
__init__.py
Calculus Module
=====================

Cones, symmetric operators and subsolution certificates on eigenvalue vectors.
"""
