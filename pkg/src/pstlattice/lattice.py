"""Core lattice types and Hamiltonian construction.

Units are fixed across the package: propagation distance and device length in
cm, waveguide separations in um, couplings and loss rates in cm^-1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

DEFAULT_COUPLING_CUTOFF = 1e-6  # cm^-1


class ValidationError(ValueError):
    """Invalid input; ``field`` names the offending attribute."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class CouplingLaw:
    """Exponential separation-to-coupling map C(d) = alpha * exp(-beta * d)."""

    alpha: float  # cm^-1
    beta: float  # um^-1

    def __post_init__(self):
        if not np.isfinite(self.alpha) or self.alpha <= 0:
            raise ValidationError("alpha", f"must be > 0, got {self.alpha}")
        if not np.isfinite(self.beta) or self.beta <= 0:
            raise ValidationError("beta", f"must be > 0, got {self.beta}")


@dataclass(frozen=True)
class PST:
    """Mirror-symmetric profile c0 * sqrt(k (N - k))."""

    c0: float


@dataclass(frozen=True)
class Uniform:
    c: float


@dataclass(frozen=True)
class Harmonic:
    """Glauber-Fock profile c0 * sqrt(k)."""

    c0: float


@dataclass(frozen=True)
class Custom:
    couplings: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "couplings", tuple(float(c) for c in self.couplings))


Profile = Union[PST, Uniform, Harmonic, Custom]


@dataclass(frozen=True)
class ChannelSpec:
    n_sites: int
    length_cm: float
    profile: Profile

    def __post_init__(self):
        if int(self.n_sites) != self.n_sites or self.n_sites < 1:
            raise ValidationError("n_sites", f"must be a positive integer, got {self.n_sites}")
        if not np.isfinite(self.length_cm) or self.length_cm <= 0:
            raise ValidationError("length_cm", f"must be > 0, got {self.length_cm}")
        p = self.profile
        if isinstance(p, Custom):
            if len(p.couplings) != self.n_sites - 1:
                raise ValidationError(
                    "profile.couplings",
                    f"expected {self.n_sites - 1} values for {self.n_sites} sites, got {len(p.couplings)}",
                )
        elif isinstance(p, (PST, Harmonic)):
            if p.c0 < 0:
                raise ValidationError("profile.c0", f"must be >= 0, got {p.c0}")
        elif isinstance(p, Uniform):
            if p.c < 0:
                raise ValidationError("profile.c", f"must be >= 0, got {p.c}")
        else:
            raise ValidationError("profile", f"unknown profile {p!r}")
        c = self.couplings()
        if np.any(c < 0) or not np.all(np.isfinite(c)):
            raise ValidationError("profile.couplings", "all couplings must be finite and >= 0")

    def couplings(self) -> np.ndarray:
        """Nearest-neighbour couplings C_{k,k+1}, k = 1..N-1."""
        n = self.n_sites
        k = np.arange(1, n, dtype=float)
        p = self.profile
        if isinstance(p, PST):
            return p.c0 * np.sqrt(k * (n - k))
        if isinstance(p, Uniform):
            return np.full(n - 1, float(p.c))
        if isinstance(p, Harmonic):
            return p.c0 * np.sqrt(k)
        return np.asarray(p.couplings, dtype=float)


@dataclass(frozen=True)
class Geometry:
    separations: np.ndarray  # um, N-1 adjacent gaps

    def __post_init__(self):
        d = np.asarray(self.separations, dtype=float).reshape(-1)
        if not np.all(np.isfinite(d)) or np.any(d <= 0):
            raise ValidationError("separations", "all separations must be finite and > 0")
        object.__setattr__(self, "separations", _frozen(d))

    @property
    def n_sites(self) -> int:
        return len(self.separations) + 1

    def positions(self) -> np.ndarray:
        """Absolute waveguide positions in um, first guide at 0."""
        return np.concatenate([[0.0], np.cumsum(self.separations)])


@dataclass(frozen=True)
class Hamiltonian:
    """Coupling matrix plus complex on-site terms (detuning - i * loss / 2)."""

    couplings: np.ndarray
    diagonal: np.ndarray | None = None

    def __post_init__(self):
        c = np.asarray(self.couplings, dtype=float)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValidationError("couplings", f"must be a square matrix, got shape {c.shape}")
        if not np.array_equal(c, c.T):
            raise ValidationError("couplings", "matrix must be exactly symmetric")
        if np.any(np.diag(c) != 0):
            raise ValidationError("couplings", "on-site terms belong in the diagonal field")
        n = c.shape[0]
        d = np.zeros(n, dtype=complex) if self.diagonal is None else np.asarray(self.diagonal, dtype=complex)
        if d.shape != (n,):
            raise ValidationError("diagonal", f"expected {n} entries, got shape {d.shape}")
        if np.any(d.imag > 0):
            raise ValidationError("diagonal", "imaginary parts (-loss/2) must be <= 0")
        object.__setattr__(self, "couplings", _frozen(c))
        object.__setattr__(self, "diagonal", _frozen(d))

    @property
    def size(self) -> int:
        return self.couplings.shape[0]

    @property
    def is_hermitian(self) -> bool:
        return not np.any(self.diagonal.imag)

    def hermitian_part(self) -> np.ndarray:
        """Real symmetric matrix: couplings plus detunings."""
        return self.couplings + np.diag(self.diagonal.real)

    def matrix(self) -> np.ndarray:
        return self.couplings + np.diag(self.diagonal)

    def uniform_loss_rate(self) -> float | None:
        """Intensity loss rate gamma if it is the same on every site, else None."""
        g = -2.0 * self.diagonal.imag
        if np.all(g == g[0]):
            return float(g[0])
        return None

    def max_entry(self) -> float:
        return float(np.max(np.abs(self.matrix())))

    def nn_couplings(self) -> np.ndarray:
        return np.diag(self.couplings, 1).copy()


def tridiagonal(couplings: Sequence[float], diagonal=None) -> Hamiltonian:
    c = np.asarray(couplings, dtype=float)
    n = len(c) + 1
    m = np.zeros((n, n))
    idx = np.arange(n - 1)
    m[idx, idx + 1] = c
    m[idx + 1, idx] = c
    return Hamiltonian(m, diagonal)


def build_hamiltonian(spec: ChannelSpec) -> Hamiltonian:
    """Nearest-neighbour Hamiltonian with zero on-site terms."""
    return tridiagonal(spec.couplings())


def build_hamiltonian_from_geometry(
    geometry: Geometry,
    law: CouplingLaw,
    coupling_cutoff: float = DEFAULT_COUPLING_CUTOFF,
    diagonal=None,
) -> Hamiltonian:
    """All-pairs couplings alpha * exp(-beta * |x_k - x_l|), zeroed below the cutoff."""
    if not coupling_cutoff >= 0:
        raise ValidationError("coupling_cutoff", f"must be >= 0, got {coupling_cutoff}")
    x = geometry.positions()
    dist = np.abs(x[:, None] - x[None, :])
    c = law.alpha * np.exp(-law.beta * dist)
    c[c < coupling_cutoff] = 0.0
    np.fill_diagonal(c, 0.0)
    # exp of identical distances is identical, but force exact symmetry anyway
    c = np.triu(c, 1)
    c = c + c.T
    return Hamiltonian(c, diagonal)
