"""Modular-theory tools for recovery maps on finite-dimensional matrix algebras."""
from .algebra import InclusionSpec, State, embed, restrict, random_state
from .kernels import BACKEND as KERNEL_BACKEND

__all__ = ["InclusionSpec", "State", "embed", "restrict", "random_state", "KERNEL_BACKEND"]
__version__ = "0.1.0"
