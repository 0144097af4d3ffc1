"""Terrain-aware contact planning for quadruped locomotion.

Raw terrain polygons become convex contact surfaces (``terrain``), a
mixed-integer program picks a surface for each upcoming footstep
(``selection`` on top of ``solvers``), footsteps and swing curves are
refined by small QPs (``footstep``, ``swing``) and ``pipeline`` runs the
whole loop against a kinematic base.
"""

from .errors import (BigMTooSmall, DegenerateFit, Infeasible, MaxIterations, NoReachableSurface, OutOfDomain,
                     ParseError, PlanningError, Timeout, ValidationError)
from .footstep import RaibertParams, optimize_footstep, raibert_target
from .pipeline import Pipeline, PipelineConfig, RolloutTrace, Scene, filter_base, load_scenario, rollout
from .robot import FEET, GaitPattern, KinematicBox, RobotState
from .selection import SurfacePlan, extrapolate_configs, plan_surfaces, preselect_surfaces
from .solvers import MiqpProblem, MipSolution, QpProblem, QpSolution, enumerate_miqp, solve_miqp, solve_qp
from .swing import (BezierCurve, CollisionConstraintSet, ReferenceTrajectory, active_halfspaces, eval_bezier,
                    fit_bezier, reference_trajectory)
from .terrain import (HeightmapGrid, PlaneCoeffs, ProcessingConfig, RawSurface, Surface, Terrain, convex_decompose,
                      elevation, fit_plane, offset_contour, polygon_difference, process_surfaces, simplify_contour)

__version__ = "0.1.0"
