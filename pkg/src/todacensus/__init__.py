"""Census machinery for SU(3) Toda systems on flat tori.

The pipeline: derive local exponent data from puncture multiplicities
(`apparency`), generate the apparent-singularity polynomial systems exactly
(`polyring` + `apparency`), count and classify their numerical solutions
(`solver`), and verify candidate solutions through the monodromy of the
associated third-order ODE (`monodromy`).  `elliptic` supplies Weierstrass
functions and lattice invariants; `cli` is the command line front end.
"""

from .errors import (
    CriticalParametersError,
    EvaluationError,
    EvenNonexistenceError,
    InconclusiveError,
    NearPoleError,
    PathClearanceError,
    StructuralError,
)

__version__ = "0.1.0"

__all__ = [
    "CriticalParametersError",
    "EvaluationError",
    "EvenNonexistenceError",
    "InconclusiveError",
    "NearPoleError",
    "PathClearanceError",
    "StructuralError",
    "__version__",
]
