"""Epistemic hyperparameter optimization: deception-resistant conclusions from HPO logs."""

__version__ = "0.1.0"
