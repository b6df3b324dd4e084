"""Lance-Williams linkage schemes.

Every scheme updates the dissimilarity of a merged cluster ``A u B`` to a
third cluster ``C`` as::

    d(A u B, C) = a1 d(A, C) + a2 d(B, C) + b d(A, B) + g |d(A, C) - d(B, C)|

The functions here accept scalars or numpy arrays (broadcast over ``C``).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

KINDS = (
    "single",
    "complete",
    "group_average",
    "weighted_average",
    "centroid",
    "median",
    "ward",
    "min_variance",
    "flexible_beta",
)

ALIASES = {
    "upgma": "group_average",
    "average": "group_average",
    "wpgma": "weighted_average",
    "upgmc": "centroid",
    "wpgmc": "median",
    "mivar": "min_variance",
    "minimum_variance": "min_variance",
}

_SQUARED_INPUT = frozenset({"centroid", "median", "ward", "min_variance"})


@dataclass(frozen=True)
class LinkageScheme:
    kind: str
    beta: Optional[float] = None

    def __post_init__(self):
        kind = ALIASES.get(self.kind.lower(), self.kind.lower())
        if kind not in KINDS:
            raise ValueError(f"unknown linkage {self.kind!r} (valid: {', '.join(KINDS)})")
        object.__setattr__(self, "kind", kind)
        if kind == "flexible_beta":
            beta = -0.25 if self.beta is None else float(self.beta)
            if not -1.0 < beta < 1.0:
                raise ValueError(f"flexible_beta requires -1 < beta < 1, got {beta}")
            object.__setattr__(self, "beta", beta)
        elif self.beta is not None:
            raise ValueError(f"beta only applies to flexible_beta, not {kind}")

    @property
    def squared_input_expected(self) -> bool:
        """True for schemes whose geometry only holds on squared Euclidean input."""
        return self.kind in _SQUARED_INPUT

    @property
    def reducible(self) -> bool:
        """Whether merging never brings the union closer than both parts.

        Minimum variance is excluded: on three equidistant points the
        merged distance drops to 2/3 of the original.
        """
        if self.kind in ("centroid", "median", "min_variance"):
            return False
        if self.kind == "flexible_beta":
            return self.beta <= 0
        return True

    def __str__(self):
        if self.kind == "flexible_beta":
            return f"flexible_beta({self.beta:g})"
        return self.kind


def scheme(value: "LinkageScheme | str", beta: Optional[float] = None) -> LinkageScheme:
    if isinstance(value, LinkageScheme):
        return value
    return LinkageScheme(value, beta)


class LwCoefficients(NamedTuple):
    alpha1: object
    alpha2: object
    beta: object
    gamma: object


def _check_sizes(*sizes):
    for s in sizes:
        if np.any(np.asarray(s) < 1):
            raise ValueError("cluster sizes must be at least 1")


def coefficients(s: "LinkageScheme | str", size_a, size_b, size_c) -> LwCoefficients:
    s = scheme(s)
    _check_sizes(size_a, size_b, size_c)
    na = np.asarray(size_a, dtype=float)
    nb = np.asarray(size_b, dtype=float)
    nc = np.asarray(size_c, dtype=float)
    kind = s.kind
    if kind == "single":
        c = (0.5, 0.5, 0.0, -0.5)
    elif kind == "complete":
        c = (0.5, 0.5, 0.0, 0.5)
    elif kind == "group_average":
        nab = na + nb
        c = (na / nab, nb / nab, 0.0, 0.0)
    elif kind == "weighted_average":
        c = (0.5, 0.5, 0.0, 0.0)
    elif kind == "centroid":
        nab = na + nb
        c = (na / nab, nb / nab, -(na * nb) / (nab * nab), 0.0)
    elif kind == "median":
        c = (0.5, 0.5, -0.25, 0.0)
    elif kind == "ward":
        t = na + nb + nc
        c = ((na + nc) / t, (nb + nc) / t, -nc / t, 0.0)
    elif kind == "min_variance":
        t = na + nb + nc
        c = (((na + nc) / t) ** 2, ((nb + nc) / t) ** 2, -nc * (na + nb) / (t * t), 0.0)
    else:
        half = (1.0 - s.beta) / 2.0
        c = (half, half, s.beta, 0.0)
    return LwCoefficients(*(v if np.ndim(v) else float(v) for v in c))


def combine(s: "LinkageScheme | str", d_ac, d_bc, d_ab, size_a, size_b, size_c):
    """Dissimilarity of ``A u B`` to ``C`` from the three pre-merge values."""
    s = scheme(s)
    r = _combine(s, d_ac, d_bc, d_ab, size_a, size_b, size_c)
    return float(r) if np.ndim(r) == 0 else r


def _combine(s, d_ac, d_bc, d_ab, size_a, size_b, size_c):
    # min/max are exact; the coefficient form would round
    if s.kind == "single":
        _check_sizes(size_a, size_b, size_c)
        return np.minimum(d_ac, d_bc)
    if s.kind == "complete":
        _check_sizes(size_a, size_b, size_c)
        return np.maximum(d_ac, d_bc)
    a1, a2, b, _ = coefficients(s, size_a, size_b, size_c)
    if s.kind == "min_variance":
        # numerator-over-T^2 form keeps integer weights exact
        na, nb, nc = (np.asarray(v, dtype=float) for v in (size_a, size_b, size_c))
        t = na + nb + nc
        return ((na + nc) ** 2 * d_ac + (nb + nc) ** 2 * d_bc - nc * (na + nb) * d_ab) / (t * t)
    return a1 * d_ac + a2 * d_bc + b * d_ab
