"""Finite one-dimensional periodic lattice: cell and quasimomentum grids,
reciprocal vectors, and the model potential.

Units are natural, hbar^2/(2m) = 1, and the default cell width is a = 1, so
kinetic energies are squared wavenumbers and the recoil energy of a lattice
with cell width ``a`` is (pi/a)^2. The cosine potential
V(x) = -(V0/2) cos(2 pi x / a) places its minima on the site grid
{0, a, ..., (N-1) a}, so localized orbitals center on lattice sites.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

PLANE_WAVE = "plane_wave"
TIGHT_BINDING = "tight_binding"
MODES = (PLANE_WAVE, TIGHT_BINDING)

_CONFIG_KEYS = (
    "n_cells",
    "lattice_constant",
    "potential_depth",
    "pw_cutoff",
    "n_bands",
    "mode",
)


def recoil_energy(lattice_constant: float = 1.0) -> float:
    """Recoil energy (pi/a)^2 in the natural units used throughout."""
    return (np.pi / lattice_constant) ** 2


def _require_int(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    return int(value)


def _require_real(value, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float, np.integer, np.floating)):
        raise ConfigError(f"{name} must be a real number, got {value!r}")
    out = float(value)
    if not np.isfinite(out):
        raise ConfigError(f"{name} must be finite, got {out!r}")
    return out


@dataclass(frozen=True, eq=False)
class LatticeConfig:
    """Immutable definition of a ring of ``n_cells`` identical cells.

    ``pw_cutoff`` M truncates the reciprocal lattice to G_j = 2 pi j / a with
    j in [-M, M]; plane-wave calculations therefore work with matrices of size
    2M+1 per quasimomentum. ``n_bands`` defaults to min(4, 2M+1) in plane_wave
    mode and to 1 in tight_binding mode, where the single band carries the
    analytic dispersion -2 J cos(k a) with hopping J = ``potential_depth``.
    """

    n_cells: int
    lattice_constant: float = 1.0
    potential_depth: float = 8.0
    pw_cutoff: int = 8
    n_bands: int | None = None
    mode: str = PLANE_WAVE

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        object.__setattr__(self, "n_cells", _require_int(self.n_cells, "n_cells"))
        if self.n_cells < 2:
            raise ConfigError(f"n_cells must be >= 2 (got {self.n_cells}); a single cell degenerates the k-grid")
        object.__setattr__(self, "lattice_constant", _require_real(self.lattice_constant, "lattice_constant"))
        if self.lattice_constant <= 0:
            raise ConfigError(f"lattice_constant must be > 0, got {self.lattice_constant}")
        object.__setattr__(self, "potential_depth", _require_real(self.potential_depth, "potential_depth"))
        if self.potential_depth < 0:
            raise ConfigError(f"potential_depth must be >= 0, got {self.potential_depth}")
        object.__setattr__(self, "pw_cutoff", _require_int(self.pw_cutoff, "pw_cutoff"))
        if self.pw_cutoff < 0:
            raise ConfigError(f"pw_cutoff must be >= 0, got {self.pw_cutoff}")

        if self.n_bands is None:
            default = 1 if self.mode == TIGHT_BINDING else min(4, 2 * self.pw_cutoff + 1)
            object.__setattr__(self, "n_bands", default)
        else:
            object.__setattr__(self, "n_bands", _require_int(self.n_bands, "n_bands"))
        if self.n_bands < 1:
            raise ConfigError(f"n_bands must be >= 1, got {self.n_bands}")
        if self.mode == TIGHT_BINDING and self.n_bands != 1:
            raise ConfigError(f"n_bands must be 1 in tight_binding mode, got {self.n_bands}")
        if self.mode == PLANE_WAVE and self.n_bands > 2 * self.pw_cutoff + 1:
            raise ConfigError(
                f"n_bands must be <= 2*pw_cutoff+1 = {2 * self.pw_cutoff + 1}, got {self.n_bands}"
            )

    @property
    def sector_dim(self) -> int:
        """Dimension of one quasimomentum sector (2M+1 plane waves, or N sites)."""
        return 2 * self.pw_cutoff + 1 if self.mode == PLANE_WAVE else self.n_cells

    @classmethod
    def from_dict(cls, data: dict) -> "LatticeConfig":
        if not isinstance(data, dict):
            raise ConfigError(f"lattice config must be a JSON object, got {type(data).__name__}")
        unknown = sorted(set(data) - set(_CONFIG_KEYS))
        if unknown:
            raise ConfigError(f"unknown lattice config keys: {', '.join(unknown)}")
        if "n_cells" not in data:
            raise ConfigError("lattice config is missing required key n_cells")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "LatticeConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as err:
            raise ConfigError(f"lattice config is not valid JSON: {err}") from err
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {
            "n_cells": self.n_cells,
            "lattice_constant": self.lattice_constant,
            "potential_depth": self.potential_depth,
            "pw_cutoff": self.pw_cutoff,
            "n_bands": self.n_bands,
            "mode": self.mode,
        }


@dataclass(frozen=True, eq=False)
class KGrid:
    """Quasimomentum grid k_l = 2 pi l / (N a), l = 0..N-1."""

    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size < 2:
            raise ConfigError("KGrid needs at least two values")
        if not np.all(np.diff(values) > 0):
            raise ConfigError("KGrid values must be strictly increasing")
        if values[0] != 0.0:
            raise ConfigError("KGrid must start at k = 0")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size

    @property
    def spacing(self) -> float:
        return self.values[1] - self.values[0]


@dataclass(frozen=True, eq=False)
class RGrid:
    """Site grid R_j = j a, j = 0..N-1."""

    sites: np.ndarray

    def __post_init__(self) -> None:
        sites = np.asarray(self.sites, dtype=float)
        if sites.ndim != 1 or sites.size < 2:
            raise ConfigError("RGrid needs at least two sites")
        sites.setflags(write=False)
        object.__setattr__(self, "sites", sites)

    def __len__(self) -> int:
        return self.sites.size

    @property
    def spacing(self) -> float:
        return self.sites[1] - self.sites[0]

    def index_of(self, position: float, tol: float = 1e-9) -> int:
        """Site index of ``position``, which must be an integer multiple of the cell width."""
        ratio = position / self.spacing
        j = int(np.rint(ratio))
        if abs(ratio - j) > tol or j < 0 or j >= len(self):
            raise ValueError(
                f"position {position!r} is not on the site grid "
                f"{{0, {self.spacing:g}, ..., {(len(self) - 1) * self.spacing:g}}}"
            )
        return j


def make_kgrid(config: LatticeConfig) -> KGrid:
    """Quasimomentum grid of the N-cell ring: {2 pi l / (N a)}."""
    n, a = config.n_cells, config.lattice_constant
    return KGrid(values=2.0 * np.pi * np.arange(n) / (n * a))


def make_rgrid(config: LatticeConfig) -> RGrid:
    """Site positions {0, a, ..., (N-1) a}."""
    return RGrid(sites=config.lattice_constant * np.arange(config.n_cells, dtype=float))


def potential_fourier(config: LatticeConfig) -> dict[int, complex]:
    """Fourier components of V(x) = -(V0/2) cos(2 pi x / a) over reciprocal indices.

    The cosine has weight only on j = +-1, each with amplitude -V0/4; the map
    omits vanishing components, so V0 = 0 yields an empty map. Hermitian
    symmetry V_{-j} = conj(V_j) holds exactly since the amplitudes are real.
    """
    if config.mode != PLANE_WAVE:
        raise ConfigError("potential_fourier requires plane_wave mode; tight_binding has no continuum potential")
    if config.potential_depth == 0.0:
        return {}
    amp = complex(-config.potential_depth / 4.0)
    return {1: amp, -1: amp}
