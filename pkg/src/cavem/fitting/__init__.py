"""Nonlinear least-squares engine and the shared model library."""

from .engine import FitError, FitResult, nls_fit
from .models import Model, get_model, model_library

__all__ = ["FitError", "FitResult", "Model", "get_model", "model_library", "nls_fit"]
