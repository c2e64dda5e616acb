"""Discrete-time coined quantum walks on welded trees.

Submodules: ``scalars`` (exact amplitudes), ``graph`` (instances and the
adjacency oracle), ``reduced`` (the layer-uniform model), ``edgewalk`` (the
walk on a concrete instance), ``spectrum`` (closed-form eigenpairs and gap
bounds), ``amplify`` (deterministic exit finding) and ``cli``.
"""

from .graph import QueryLedger, WeldedTree, generate
from .reduced import ReducedModel, predetermine_T, target_amplitude
from .scalars import ExactAmplitude

__version__ = "0.1.0"

__all__ = [
    "ExactAmplitude",
    "QueryLedger",
    "ReducedModel",
    "WeldedTree",
    "generate",
    "predetermine_T",
    "target_amplitude",
]
