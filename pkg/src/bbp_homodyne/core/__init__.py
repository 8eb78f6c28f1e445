#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""Fock spaces, states, optics, measurements and convergence studies."""
