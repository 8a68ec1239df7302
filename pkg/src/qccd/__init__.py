"""Compiler and discrete-event simulator for QCCD trapped-ion devices."""

from .bench import BenchSpec, gen
from .compiler import CompileError, compile_circuit, validate
from .device import HardwareConfig, load_hardware, make_grid, make_linear
from .ir import Circuit, Op, load_circuit, parse_qasm
from .models import GateImpl, PhysicsParams
from .sim import RunMetrics, simulate

__version__ = "0.1.0"
