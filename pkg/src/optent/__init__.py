"""
optent
======

Optimal estimation of entanglement for pairs of polarization qubits.

Submodules
----------
core         two-qubit linear algebra: partial transpose, negativity, fidelity
models       decoherence and Werner state families
estimation   classical and quantum Fisher information, SLD, Cramer-Rao bounds
measurement  polarizer projectors and Poissonian coincidence-count simulation
estimators   visibility estimators of negativity and mixing, error propagation
tomography   J16 / R16 linear-inversion tomography with bootstrap errors
experiments  seeded sweeps behind the ``optent`` command line
"""
from . import core, estimation, estimators, experiments, measurement, models, tomography
from .core import negativity, partial_transpose_A, fidelity, eigendecompose
from .errors import (ConfigError, ContinuityError, DomainError, NumericError,
                     SingularModelError, ValidationError)
from .measurement import CoincidenceVector, MeasurementSetting, SourceConfig
from .models import ModelKind, ModelPoint, PhasePoint

__version__ = "0.1.0"
