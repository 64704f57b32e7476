"""Protest-duration prediction from topic-model features and decision-tree ensembles."""

__version__ = "0.1.0"
