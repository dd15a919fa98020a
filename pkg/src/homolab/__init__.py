"""Numerical laboratory for periodic homogenization with oscillating Robin data.

Subpackages
-----------
fields    : 1-periodic coefficient fields on the unit torus
cell      : corrector cell problems and effective tensors
geometry  : closed curves/surfaces, quadrature, non-resonance test
oscint    : oscillatory surface integrals, Weyl defects, decay-slope fits
mesh      : boundary-fitted triangulations of planar domains
fem       : P1 Robin / Neumann solvers, first-order expansion, norms
harness   : configuration-driven rate experiments and reports
"""

from homolab.fields import PeriodicField, EllipticityReport
from homolab.cell import CorrectorSet, HomogenizedTensor, solve_correctors, homogenize, cell_residual
from homolab.geometry import SurfaceChart, NonResonanceVerdict, check_non_resonance
from homolab.oscint import OscillatorySeries, oscillatory_integral, weyl_defect_series, m_epsilon, fit_decay_slope
from homolab.mesh import TriMesh, mesh_domain
from homolab.fem import RobinSystem, assemble_robin, solve, solve_neumann_aux, first_order_expansion, duality_check
from homolab.harness import ExperimentConfig, RateReport, run, compare_to_theory

__all__ = [
    "PeriodicField",
    "EllipticityReport",
    "CorrectorSet",
    "HomogenizedTensor",
    "solve_correctors",
    "homogenize",
    "cell_residual",
    "SurfaceChart",
    "NonResonanceVerdict",
    "check_non_resonance",
    "OscillatorySeries",
    "oscillatory_integral",
    "weyl_defect_series",
    "m_epsilon",
    "fit_decay_slope",
    "TriMesh",
    "mesh_domain",
    "RobinSystem",
    "assemble_robin",
    "solve",
    "solve_neumann_aux",
    "first_order_expansion",
    "duality_check",
    "ExperimentConfig",
    "RateReport",
    "run",
    "compare_to_theory",
]

__version__ = "0.1.0"
