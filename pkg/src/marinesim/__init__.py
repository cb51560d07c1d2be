"""Port-Hamiltonian marine craft models with virtual differential-passivity-based tracking."""
from . import control, geometry, references, sim, variational, vessel
from .control import ControllerGains, uuv_gains
from .errors import (ConfigError, DivergedPerturbation, EmptySampleSet, MarineSimError,
                     NonFiniteState, SingularAttitude)
from .sim import SimConfig, TrajectoryLog, simulate_closed_loop, simulate_open_loop
from .vessel import BodyState, InertialState, VesselParams, uuv_open_frame

__version__ = "0.1.0"
