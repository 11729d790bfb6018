# Models package - exports all models
from ..database import Base

from .run import CandidateViolation, ExperimentRun

__all__ = [
    'Base',
    'ExperimentRun', 'CandidateViolation',
]
