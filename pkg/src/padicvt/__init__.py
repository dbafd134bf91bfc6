"""Fractional operator of Vladimirov-Taibleson type on Q_p^n, computed exactly on step functions."""
from .core import Ball, Cell, OpenSetDecomposition, PadicPoint, abs_value, ball_relation, haar_measure
from .operator import VTParams, apply_hypersingular, apply_spectral, kernel_constant
from .schwartz import RadialKernel, StepFunction, fourier, integrate, inverse_fourier

__version__ = "0.1.0"
