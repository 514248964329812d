# -*- coding: utf-8 -*-
"""
__init__.py
Monitor Module
=====================

Read-only diagnostics of the a priori estimates along a solve.
"""
