# -*- coding: utf-8 -*-
"""
__init__.py
Solver Module
=====================

Problem definitions, the Newton solve for (u, c) and the continuity path.
"""
