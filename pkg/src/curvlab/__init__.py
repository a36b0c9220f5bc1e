"""Monte Carlo laboratory for curvature polynomials of random real projective varieties."""

from .ensembles import PolynomialEnsemble, kostlan, mixture, quadric_with_delta
from .montecarlo import DEFAULT_SEED, EstimateRecord
from .series import CurvaturePolynomial, TubeCoefficients, expected_curvature_polynomial
from .special import gaussian_abs_moment, series_coefficient, sphere_volume, tube_integral
from .symmetric import SymmetricEnsemble

__all__ = [
    "CurvaturePolynomial",
    "DEFAULT_SEED",
    "EstimateRecord",
    "PolynomialEnsemble",
    "SymmetricEnsemble",
    "TubeCoefficients",
    "expected_curvature_polynomial",
    "gaussian_abs_moment",
    "kostlan",
    "mixture",
    "quadric_with_delta",
    "series_coefficient",
    "sphere_volume",
    "tube_integral",
]

__version__ = "0.1.0"
