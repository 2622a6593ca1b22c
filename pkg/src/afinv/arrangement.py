"""Real hyperplane arrangements and the deformed Aomoto-Forrester map.

Each hyperplane carries ``f_h(z) = u0 + <u, z>`` and a weight ``lam > 0``.
The potential is ``P = sum_h lam_h log|f_h|`` and the map is
``F_t(z) = z - t grad P(z)``.

Hyperplane data are stored exactly (Fractions).  Evaluations stay exact when
the point (and t) are rational, and switch to mpf reals at the current
working precision as soon as any input is an mpf or float.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath
from mpmath import mpf

from .scalar import parse_rational, to_real

DEFAULT_WALL_TOL = Fraction(1, 10**20)


class OnWallError(ValueError):
    """The point lies on (or too close to) a hyperplane of the arrangement."""


def _as_exact(v):
    return v if isinstance(v, mpf) else parse_rational(v)


@dataclass(frozen=True)
class Hyperplane:
    u0: object
    u: tuple
    lam: object = 1

    def __post_init__(self):
        object.__setattr__(self, "u0", _as_exact(self.u0))
        object.__setattr__(self, "u", tuple(_as_exact(c) for c in self.u))
        object.__setattr__(self, "lam", _as_exact(self.lam))
        if all(c == 0 for c in self.u):
            raise ValueError("hyperplane normal must be nonzero")
        if not self.lam > 0:
            raise ValueError(f"hyperplane weight must be positive, got {self.lam}")

    def real(self) -> "Hyperplane":
        return Hyperplane(to_real(self.u0), tuple(to_real(c) for c in self.u), to_real(self.lam))


@dataclass(frozen=True)
class Arrangement:
    hyperplanes: tuple

    def __post_init__(self):
        hs = tuple(self.hyperplanes)
        if not hs:
            raise ValueError("an arrangement needs at least one hyperplane")
        n = len(hs[0].u)
        for i, h in enumerate(hs):
            if len(h.u) != n:
                raise ValueError(f"hyperplane {i} has normal of length {len(h.u)}, expected {n}")
        object.__setattr__(self, "hyperplanes", hs)

    @classmethod
    def from_data(cls, rows: Sequence) -> "Arrangement":
        """Build from ``(u0, u, lam)`` triples."""
        return cls(tuple(Hyperplane(u0, tuple(u), lam) for u0, u, lam in rows))

    @property
    def n(self) -> int:
        return len(self.hyperplanes[0].u)

    def __len__(self) -> int:
        return len(self.hyperplanes)

    def is_exact(self) -> bool:
        return not any(isinstance(h.lam, mpf) or isinstance(h.u0, mpf) for h in self.hyperplanes)

    def real(self) -> "Arrangement":
        return Arrangement(tuple(h.real() for h in self.hyperplanes))

    def scaled(self, s) -> "Arrangement":
        """Same hyperplanes with every weight multiplied by ``s``."""
        return Arrangement(tuple(Hyperplane(h.u0, h.u, h.lam * s) for h in self.hyperplanes))


def _is_exact_scalar(v) -> bool:
    return isinstance(v, (int, Fraction)) and not isinstance(v, bool)


def coerce(arr: Arrangement, *values):
    """Common arithmetic for an evaluation: exact if everything is rational, else mpf.

    Returns the arrangement and the values (points as tuples, scalars as is)
    converted to the chosen kind.
    """
    flat = []
    for v in values:
        flat.extend(v if isinstance(v, (tuple, list)) else [v])
    exact = arr.is_exact() and all(_is_exact_scalar(v) for v in flat)
    conv = Fraction if exact else to_real
    out = []
    for v in values:
        if isinstance(v, (tuple, list)):
            out.append(tuple(conv(c) for c in v))
        else:
            out.append(conv(v))
    return (arr if exact else arr.real()), out


def dot(a, b):
    acc = 0
    for x, y in zip(a, b):
        acc += x * y
    return acc


def norm(v) -> mpf:
    return mpmath.sqrt(sum(to_real(c) ** 2 for c in v))


def linear_form(h: Hyperplane, z):
    return h.u0 + dot(h.u, z)


def _forms(arr: Arrangement, z):
    if len(z) != arr.n:
        raise ValueError(f"point has {len(z)} coordinates, arrangement dimension is {arr.n}")
    fs = tuple(linear_form(h, z) for h in arr.hyperplanes)
    for i, f in enumerate(fs):
        if f == 0:
            raise OnWallError(f"point lies on hyperplane {i}")
    return fs


def potential_P(arr: Arrangement, z) -> mpf:
    """``sum_h lam_h log|f_h(z)|`` (always a real number)."""
    arr, (z,) = coerce(arr, tuple(z))
    fs = _forms(arr, z)
    return mpmath.fsum(to_real(h.lam) * mpmath.log(abs(to_real(f))) for h, f in zip(arr.hyperplanes, fs))


def grad_P(arr: Arrangement, z) -> tuple:
    """Component i is ``sum_h lam_h u_{h,i} / f_h(z)``."""
    arr, (z,) = coerce(arr, tuple(z))
    fs = _forms(arr, z)
    out = [0] * arr.n
    for h, f in zip(arr.hyperplanes, fs):
        c = h.lam / f
        for i, ui in enumerate(h.u):
            out[i] += c * ui
    return tuple(out)


def hessian_P(arr: Arrangement, z) -> tuple:
    """Entries ``-sum_h lam_h u_{h,i} u_{h,j} / f_h(z)**2``."""
    arr, (z,) = coerce(arr, tuple(z))
    fs = _forms(arr, z)
    n = arr.n
    out = [[0] * n for _ in range(n)]
    for h, f in zip(arr.hyperplanes, fs):
        c = h.lam / (f * f)
        for i in range(n):
            for j in range(n):
                out[i][j] -= c * h.u[i] * h.u[j]
    return tuple(tuple(r) for r in out)


def F_t_eval(arr: Arrangement, z, t) -> tuple:
    """``z - t grad P(z)``; ``t = 1`` gives the undeformed map."""
    arr, (z, t) = coerce(arr, tuple(z), t)
    g = grad_P(arr, z)
    return tuple(zi - t * gi for zi, gi in zip(z, g))


def jacobian_F_t(arr: Arrangement, z, t) -> tuple:
    """``I - t Hess P``."""
    arr, (z, t) = coerce(arr, tuple(z), t)
    H = hessian_P(arr, z)
    n = arr.n
    return tuple(tuple((1 if i == j else 0) - t * H[i][j] for j in range(n)) for i in range(n))


def hamiltonian_nd(arr: Arrangement, x, y):
    """``|y|^2/2 + |F_1(x)|^2/2``."""
    w = F_t_eval(arr, x, 1)
    return (dot(y, y) + dot(w, w)) / 2


@dataclass(frozen=True)
class ChamberSignature:
    signs: tuple

    def __str__(self) -> str:
        return "".join("+" if s > 0 else "-" for s in self.signs)


def chamber_signature(arr: Arrangement, z, tol=None) -> ChamberSignature:
    tol = DEFAULT_WALL_TOL if tol is None else tol
    arr, (z,) = coerce(arr, tuple(z))
    signs = []
    for i, h in enumerate(arr.hyperplanes):
        f = linear_form(h, z)
        if f == 0 or to_real(abs(f)) <= to_real(tol):
            raise OnWallError(f"point is within {mpmath.nstr(to_real(tol), 3)} of hyperplane {i}")
        signs.append(1 if f > 0 else -1)
    return ChamberSignature(tuple(signs))
