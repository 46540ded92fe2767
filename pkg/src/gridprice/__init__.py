"""Real-time electricity pricing under false-data-injection attacks.

Market model, attack models, closed-loop sensitivity analysis, a
disturbance-observer-based robust controller with meter-side low-pass
filtering, a CUSUM detector, and a scenario simulator tying them together.
"""

from .attacks import AttackSignal, AttackSpec, attacked_price, sensor_report_shift, victim_demand_shift
from .control import DisturbanceObserver, LowPassFilter, PriceController, design_lowpass
from .detection import Cusum, calibrate_alpha, cusum_path, detection_time
from .errors import (CalibrationError, ConfigError, DomainError, ModelError, NoEquilibriumError,
                     SignalError, SimulationError)
from .market import (LinearizedPlant, MarketParams, clearing_price, linearize, responsive_demand,
                     supply, total_demand)
from .sensitivity import (CURVES, LoopParams, SensitivityCurve, cutoff_frequency, sens_error_price,
                          sens_error_price_robust, sens_error_sensor, sens_error_sensor_robust,
                          sens_price_price, sens_price_sensor, sweep, worst_case_frequency)
from .simulation import (ControllerConfig, DetectorConfig, FilterConfig, Scenario, SimTrace, run,
                         run_many, synth_baseline)

__version__ = "0.1.0"
