"""Ramana exact duals for semidefinite programs.

Builds, verifies and solves the classical, strong and Ramana duals of
``sup c'x  s.t.  sum_i x_i A_i <= B``, with facial reduction, a dense
interior-point solver and SDPA/JSON input and output.
"""

from ._config import Tolerances, get_tolerances
from .duals import (GapReport, RamanaReport, RamanaSolution, StrongDualPoint, build_classical_dual,
                    build_ramana_dual, build_strong_dual, classical_dual_value,
                    embed_classical_dual_point, extract_strong_dual_point, gap_analysis,
                    lift_to_ramana, ramana_num_constraints, ramana_num_vars,
                    ramana_solution_from_x, ramana_solution_to_x, rescale_ramana_solution,
                    verify_ramana)
from .facial import (FacialCertificate, FacialReductionError, FacialReductionResult,
                     facial_reduction, gordan_pair, reduce_step, verify_certificate)
from .model import RescalingTransform, SdpInstance, rescale
from .sdpa import SdpaParseError, load_instance, parse_sdpa, parse_sdpa_program, write_sdpa
from .serialize import (AnalysisReport, analysis_report_from_json, analysis_report_to_json,
                        certificate_from_json, certificate_to_json, instance_digest,
                        ramana_solution_from_json, ramana_solution_to_json)
from .solver import ConicProgram, SolveResult, SolverOptions, Status, certify, solve
from .tangent import TangentWitness, compute_beta, tan_membership_algebraic, verify_witness

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
