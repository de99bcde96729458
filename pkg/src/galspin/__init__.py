"""Separable-kernel two-body model for nonrelativistic spin-s multispinor fields."""

from .form_factors import Family, FormFactor
from .spinor_algebra import SpinLabel
from .two_body import ModelParams, Normalization

__all__ = ["Family", "FormFactor", "ModelParams", "Normalization", "SpinLabel"]
__version__ = "0.1.0"
