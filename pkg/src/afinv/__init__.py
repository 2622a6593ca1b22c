"""Series inversion for the Aomoto-Forrester Hamiltonian system.

Subpackages follow the computation: :mod:`afinv.scalar` (exact and
high-precision arithmetic, series), :mod:`afinv.oned` and
:mod:`afinv.dynamics` (one degree of freedom), :mod:`afinv.arrangement`,
:mod:`afinv.trees` and :mod:`afinv.inverse` (hyperplane arrangements and the
Hamilton-Jacobi tree expansion of the inverse map).
"""

__version__ = "0.1.0"
