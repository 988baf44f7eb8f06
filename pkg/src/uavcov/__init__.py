"""Coverage analysis of low-altitude UAV networks over an urban grid."""

from .analytic import (AnalyticResult, LaplaceDerivatives, NumericsError,
                       ServingDensity, conditional_coverage,
                       coverage_probability, laplace_derivatives,
                       p_los_serving, serving_densities, serving_density,
                       thinned_intensity_integral)
from .config import (ConfigError, NumericsConfig, ScenarioConfig,
                     config_from_dict, parse_config, serialize_config,
                     table1_defaults)
from .environment import (BuildingGridRealization, UrbanEnvironment,
                          is_los_explicit, los_breakpoints, p_los,
                          p_los_sigmoid, sample_grid)
from .geometry import (LinkGeometry, antenna_gain, association_probability,
                       bound_los_given_nlos_serving,
                       bound_nlos_given_los_serving, cone_radius)
from .montecarlo import (McConfig, McEstimate, TrialResult, estimate,
                         estimate_conditional, run_trial)
from .specfun import (Hyp2f1Error, QuadratureError, QuadratureResult,
                      complete_bell, hyp2f1, integrate, pochhammer)

__version__ = "0.1.0"
