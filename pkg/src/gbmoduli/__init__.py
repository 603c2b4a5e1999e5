"""Numerical Gauss-Bonnet toolkit with desk-scale moduli-space models."""
__version__ = "0.1.0"

from .assembly import GBReport, exhaustion_report, gauss_bonnet_2d_region, gauss_bonnet_closed, residual_bound
from .catalog import get_metric, metric_names
from .chart import MetricChart, christoffel, gauss_curvature, riemann_orthonormal
from .chi import bernoulli, chi_closed, chi_finite_cover, chi_punctured, chi_sp, teich_dim, zeta_neg
from .euler_form import gb_density, gb_density_perm, gb_density_pfaffian
from .integrate import QuadratureSpec, quad_box, quad_region
from .moduli import FrickeTriple, fricke_reduce, get_model, systole, thick_membership
from .polyhedra import Region, face_volume, outer_angle_measure, second_fundamental_form
from .regions import get_polygon

__all__ = [
    "GBReport", "exhaustion_report", "gauss_bonnet_2d_region", "gauss_bonnet_closed", "residual_bound",
    "get_metric", "metric_names", "MetricChart", "christoffel", "gauss_curvature", "riemann_orthonormal",
    "bernoulli", "chi_closed", "chi_finite_cover", "chi_punctured", "chi_sp", "teich_dim", "zeta_neg",
    "gb_density", "gb_density_perm", "gb_density_pfaffian", "QuadratureSpec", "quad_box", "quad_region",
    "FrickeTriple", "fricke_reduce", "get_model", "systole", "thick_membership",
    "Region", "face_volume", "outer_angle_measure", "second_fundamental_form", "get_polygon",
]
