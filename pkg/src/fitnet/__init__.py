"""fitnet: fitness-with-deletion network growth, estimation, and theory."""

from .distributions import (DeltaFitness, EmpiricalFitness, FitnessDistribution,
                            ModelParams, ParameterError,
                            TruncatedExponentialFitness, UniformFitness,
                            fitness_density, sample_fitness)
from .sampler import EmptySamplerError, SlotError, WeightedIndex
from .simulate import EmptyNetworkError, NodeRecord, Simulator, run_simulation
from .snapshots import (AccumulatedSeries, FormatError, IdCollisionError,
                        SeriesError, SnapshotSeries, TurnoverStats, accumulate,
                        cohort, read_series, snapshot_in_degrees, turnover)
from .estimator import (ExponentialFit, ExponentialFitter, FitError,
                        GrowthExponentEstimator, GrowthFit, PowerLawFit,
                        PowerLawFitter, fit_exponential, fit_growth,
                        fit_growth_table, fit_power_law, fitness_vs_experience,
                        measurable)
from .theory import (DomainError, SolverError, TheoryParams, WinnersReport,
                     accumulated_prefactor, empirical_winners,
                     fitness_from_growth, growth_exponent, power_law_density,
                     predicted_gamma, same_age_gamma, solve_A,
                     solve_normalization, truncated_exponential_ccdf, winners)
from .ranking import RankTable, base_scores, boost

__version__ = "0.1.0"
