"""Statevector laboratory for quantum summation and integration with randomized bit queries."""

__version__ = "0.1.0"

from .estimate import Estimate  # noqa: E402

__all__ = ["Estimate", "__version__"]
