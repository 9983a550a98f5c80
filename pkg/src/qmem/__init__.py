"""qmem: pulse-level compiler and simulator for ground-state quantum memory.

A four-level atom with a degenerate ground pair can hold the populations
and coherence of a decaying optical transition in its decoherence-free
ground pair. This package compiles the required unitary into two-level
rotations on the atom's addressable transitions, renders them as resonant
control pulses (only each pulse's area matters), and verifies the transfer
and retrieval numerically, with optional spontaneous decay on the optical
transitions.
"""

from ._kernels import active as kernel_backend
from .compiler import (
    DecompositionResult,
    PlanarRotation,
    decompose,
    decompose_on_system,
    ground_storage_unitary,
    memory_sequence,
    reverse_sequence,
    rotation_matrix,
    schedule_rotations,
    schedule_unitary,
    sequence_product,
)
from .dynamics import (
    DecayChannel,
    StorageComparison,
    Trajectory,
    assemble_hamiltonian,
    impulse_limit_check,
    propagate_lindblad,
    propagate_unitary,
    realized_unitary,
    storage_comparison,
    symmetric_decay_channels,
)
from .errors import (
    DimensionMismatchError,
    IntegrationError,
    QmemError,
    ScenarioError,
    ScheduleError,
    StateValidationError,
    SystemModelError,
)
from .pulses import (
    Pulse,
    PulseEnvelope,
    PulseSchedule,
    calibrate_amplitude,
    ideal_rotation,
    pulse_area,
)
from .states import (
    DensityMatrix,
    PureState,
    UnitaryOperator,
    apply_unitary,
    density_from_pure,
    fidelity,
)
from .system import (
    Level,
    LevelSystem,
    Transition,
    ValidationReport,
    addressable_edges,
    four_level_system,
    validate,
)

__version__ = "0.1.0"
