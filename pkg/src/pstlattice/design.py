"""Forward and inverse coupling design.

Generates mirror-symmetric transfer couplings, fits the exponential
coupling-vs-separation law from directional-coupler data, converts couplings
to waveguide separations and checks how far the nearest-neighbour picture can
be trusted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .lattice import CouplingLaw, Geometry, ValidationError


class InfeasibleGeometryError(ValueError):
    """A requested coupling cannot be realized by any positive separation."""

    def __init__(self, index: int, coupling: float, alpha: float):
        super().__init__(
            f"gap {index}: coupling {coupling:.6g} cm^-1 >= alpha {alpha:.6g} cm^-1 "
            "requires a non-positive separation"
        )
        self.index = index


class UnderdeterminedFitError(ValueError):
    pass


@dataclass(frozen=True)
class CouplerMeasurement:
    separation: float  # um
    coupling: float  # cm^-1
    wavelength_nm: float | None = None

    def __post_init__(self):
        if not self.separation > 0:
            raise ValidationError("separation", f"must be > 0, got {self.separation}")
        if not self.coupling > 0:
            raise ValidationError("coupling", f"must be > 0, got {self.coupling}")


@dataclass(frozen=True)
class CouplingFit:
    law: CouplingLaw
    rms_log_residual: float
    n_points: int


@dataclass(frozen=True)
class NNValidity:
    epsilon: float
    d_min: float  # um
    max_sites_bound: int


def pst_couplings(n_sites: int, c0: float) -> np.ndarray:
    """Couplings c0 * sqrt(k (N - k)) for k = 1..N-1."""
    if n_sites < 2:
        raise ValidationError("n_sites", f"a transfer channel needs >= 2 sites, got {n_sites}")
    if not c0 > 0:
        raise ValidationError("c0", f"must be > 0, got {c0}")
    k = np.arange(1, n_sites, dtype=float)
    return c0 * np.sqrt(k * (n_sites - k))


def transfer_length(c0: float) -> float:
    """Mirror-transfer distance pi / (2 c0) in cm."""
    if not c0 > 0:
        raise ValidationError("c0", f"must be > 0, got {c0}")
    return math.pi / (2.0 * c0)


def c0_for_length(length_cm: float) -> float:
    """Coupling scale that completes the transfer exactly at ``length_cm``."""
    if not length_cm > 0:
        raise ValidationError("length_cm", f"must be > 0, got {length_cm}")
    return math.pi / (2.0 * length_cm)


def fit_coupling_law(measurements: Iterable[CouplerMeasurement]) -> CouplingFit:
    """Ordinary least squares of ln C = ln alpha - beta d.

    The returned residual is the root-mean-square of the log-space residuals.
    """
    ms = list(measurements)
    d = np.array([m.separation for m in ms], dtype=float)
    c = np.array([m.coupling for m in ms], dtype=float)
    if np.any(c <= 0):
        raise ValidationError("coupling", "all measured couplings must be > 0")
    if len(np.unique(d)) < 2:
        raise UnderdeterminedFitError(
            f"need at least 2 distinct separations, got {len(np.unique(d))}"
        )
    y = np.log(c)
    a = np.column_stack([np.ones_like(d), -d])
    (ln_alpha, beta), *_ = np.linalg.lstsq(a, y, rcond=None)
    resid = y - a @ np.array([ln_alpha, beta])
    rms = float(np.sqrt(np.mean(resid**2)))
    return CouplingFit(CouplingLaw(float(np.exp(ln_alpha)), float(beta)), rms, len(ms))


def read_measurements(path: str | Path) -> list[CouplerMeasurement]:
    """Read ``separation_um, coupling_per_cm`` records; ``#`` lines are comments."""
    out = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        parts = [p.strip() for p in s.split(",")]
        if len(parts) != 2:
            raise ValidationError(f"line {lineno}", f"expected 2 fields, got {len(parts)}")
        try:
            sep, coup = float(parts[0]), float(parts[1])
        except ValueError as exc:
            raise ValidationError(f"line {lineno}", str(exc)) from None
        out.append(CouplerMeasurement(sep, coup))
    return out


def coupling_from_separation(law: CouplingLaw, d) -> np.ndarray | float:
    d_arr = np.asarray(d, dtype=float)
    if np.any(~(d_arr > 0)):
        raise ValidationError("d", "separations must be > 0")
    c = law.alpha * np.exp(-law.beta * d_arr)
    return float(c) if c.ndim == 0 else c


def design_separations(couplings: Sequence[float], law: CouplingLaw) -> Geometry:
    """Separations d = ln(alpha / C) / beta realizing each coupling."""
    c = np.asarray(couplings, dtype=float).reshape(-1)
    for i, ci in enumerate(c, start=1):
        if not ci > 0:
            raise ValidationError(f"couplings[{i}]", f"must be > 0, got {ci}")
        if ci >= law.alpha:
            raise InfeasibleGeometryError(i, float(ci), law.alpha)
    return Geometry(np.log(law.alpha / c) / law.beta)


def max_sites(length_cm: float, alpha: float, epsilon: float) -> int:
    """Largest N with N <= 4 L alpha epsilon / pi."""
    return int(math.floor(4.0 * length_cm * alpha * epsilon / math.pi))


def nn_validity(geometry: Geometry, law: CouplingLaw, length_cm: float) -> NNValidity:
    d_min = float(np.min(geometry.separations))
    eps = math.exp(-law.beta * d_min)
    return NNValidity(eps, d_min, max_sites(length_cm, law.alpha, eps))
