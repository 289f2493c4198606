"""Baseline-free guided-wave damage detection and localization.

Train a Kolmogorov-Arnold autoencoder on pristine sensor-path signals, score
incoming signals by reconstruction error, and fuse per-path damage indices
into damage-probability maps and damage coordinates.
"""

from .autoencoder import KAEModel, default_widths, load_model, loss, save_model
from .errors import (CalibrationError, ConfigError, DataError, GeometryError, PersistenceError,
                     ShapeError, ToolkitError, TrainingError, UsageError)
from .health import (DamageIndexSet, HealthReport, calibrate_threshold, compute_di,
                     compute_di_set, compute_hi, detect, quantile)
from .imaging import (DamageMap, ImagingGrid, MRAPIDParams, Peak, PeakParams, ellipse_distance,
                      extract_peaks, fuse, select_paths, weight)
from .kan import BSplineGrid, KANEdge, KANLayer, bspline_basis, edge_activation, layer_backward, layer_forward
from .metrics import EvaluationPair, MetricConfig, evaluate, mape, match_pairs, mre, rmse
from .multidamage import (CandidateDamage, FinalDamage, MergeConfig, localize_all,
                          localize_region, merge_duplicates)
from .signals import (GWSignal, Rect, Region, SensingPath, Sensor, SensorLayout,
                      all_layout_paths, enumerate_paths, make_path, normalize_signal)
from .simulate import DamageSpec, ScenarioData, SimParams, generate_scenario, hanning_toneburst, simulate_path
from .training import AdamState, LossHistory, TrainConfig, adam_step, reconstruction_gradients, train

__version__ = "0.1.0"
