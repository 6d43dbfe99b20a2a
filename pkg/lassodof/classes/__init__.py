from .designs import (DesignSpec, SignalSpec, NoiseSpec, Design, GaussianDesign, ConvolutionDesign,
                      PartialFourierDesign, ExplicitDesign, design_mapping, make_design, make_signal, observe,
                      make_generator, spawn_streams)
from .solver import (Problem, SolverOptions, KKTReport, LassoSolution, ProximalGradientSolver, soft_threshold,
                     objective, response, detect_support, kkt_check, lipschitz_constant, polish, solve)
from .support import (ReducedSolution, reduce, translate, implicit_response, brute_force_min_support)
from .dof import (RiskReport, HyperplaneQuery, GMembership, DivergenceReport, dof_estimate, rank_dof_estimate,
                  sure, squared_error, risk_report, divergence_fd, divergence_fd_report, in_G_lambda,
                  local_affinity_check)
from .experiments import (SweepSpec, ExperimentConfig, LambdaAggregate, ExperimentRecord, LambdaSelection,
                          load_config, run, run_sweep, empirical_reliability, predicted_reliability,
                          oracle_reliability, reliability_bound, select_lambda, risk_curves, decay_slope,
                          write_outputs)
from .verification import CheckResult, run_checks, check_mapping
