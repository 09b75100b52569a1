"""Two cavity modes in a shared dissipative environment.

Simulation and closed-form toolkit for cross decay rates, robust
slow-decaying states, and the decoherence-free limit r = k.
"""

__version__ = "0.1.0"

from .liouvillian import (  # noqa: F401
    DecayParameters,
    EnvironmentSpec,
    SymmetricDecayParameters,
    build_general_liouvillian,
    build_symmetric_liouvillian,
    cross_rates_from_environment,
    decompose_symmetric,
    normal_mode_transform,
)
from .tensor import (  # noqa: F401
    DensityMatrix,
    Ket,
    Operator,
    SpaceSignature,
    make_space,
)
