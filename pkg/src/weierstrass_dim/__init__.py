"""Numerics for Weierstrass graphs: the function, its baker-map dynamics,
strong stable fibres, the critical parameter lambda_b and dimension estimates."""

from .core import (DomainError, Ridge, RidgeFunction, SystemParams, WeierstrassFunction,
                   dimension_formula, eval_W, eval_ridge, functional_equation_residual)
from .critical import BracketError, CriticalResult, h_b, solve_lambda_b
from .dimension import (BoxNeighborhood, FitError, MeasureEstimate, ScalingFit, box_dimension,
                        fit_loglog, local_dimension_ratio, measure_scaling_exponent,
                        telescope_check, v_n_measure)
from .dynamics import (DigitWord, OrbitState, baker_backward, baker_forward, baker_map,
                       baker_map_inverse, k_n_exact, orbit_segment)
from .fibers import (FiberOffset, QuadratureError, ThetaEvaluator, X3, bernoulli_theta, delta,
                     delta_oracle, fiber_offset, theta_z)
from .measures import (EmpiricalDensity, TrivialRegime, TruncationSchedule, bernoulli_density,
                       capacity_H, concentration_scan, rescaled_increment,
                       sample_theta0_conditional, theta_truncated, truncation_schedule)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
