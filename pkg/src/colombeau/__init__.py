"""Colombeau generalized functions as eps-nets: asymptotics, flows, symmetry criteria and invariance tests."""

__version__ = "0.1.0"
