"""Slow light and light-pulse storage in a driven three-level vapor.

Core pieces: vapor-cell constants (:mod:`polariton.medium`), steady-state
spectroscopy (:mod:`polariton.spectrum`), the time-domain Maxwell-Bloch
solver (:mod:`polariton.solver`), the closed-form dark-state polariton
maps that double as its oracle (:mod:`polariton.darkstate`), and packaged
experiment scenarios (:mod:`polariton.scenarios`).
"""

from .darkstate import (AdiabaticityReport, ReleasedField, StoredCoherence,
                        adiabaticity_report, bright_component, from_polariton,
                        ideal_propagate, mixing_angle, released_field,
                        stored_coherence, to_polariton)
from .drive import (ControlSchedule, Segment, SignalPulseSpec,
                    constant_schedule, storage_schedule)
from .exceptions import (BoundaryError, ConfigError, ContainmentError,
                         NoSignalError, NumericalError, PolaritonError,
                         SingularityError, ValidationError)
from .medium import (C_LIGHT, DerivedConstants, MediumParams,
                     absorption_profile, b_field_to_detuning, compute_kappa,
                     control_for_group_velocity, group_velocity)
from .scenarios import (SCENARIOS, Scenario, ScenarioResult, SweepResult,
                        SweepSpec, get_scenario, run_scenario, run_sweep)
from .solver import (CompressionResult, FieldState, Grid, RunResult,
                     Snapshot, evolve, measure_compression, measure_delay,
                     measure_retrieval_efficiency, measure_transmission,
                     stability_rate)
from .spectrum import (SpectrumCurve, SteadyStateInputs, calibrate_control,
                       measure_fwhm, steady_response, transmission,
                       transmission_spectrum, transparency_window)

__version__ = "0.1.0"
