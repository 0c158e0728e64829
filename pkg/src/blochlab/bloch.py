"""Bloch Hamiltonian construction, diagonalization, and gauge fixing.

Each quasimomentum k_l carries an independent eigenproblem. In plane_wave mode
the Hamiltonian in the truncated plane-wave expansion reads
H_{jj'}(k) = (k + 2 pi j / a)^2 delta_{jj'} + V_{j-j'}; in tight_binding mode
the single-band basis is analytic, E(k) = -2 J cos(k a) with site amplitudes
e^{i k R} / sqrt(N), and serves as an exact oracle for everything downstream.

Bloch states carry a per-(band, k) phase freedom. A deterministic Kohn-style
gauge pins it: the real-space value at an anchor point (default x0 = 0, the
potential minimum) is made real and non-negative, falling back to the
derivative when the value vanishes there. For the inversion-symmetric cosine
potential this gauge yields localized, real Wannier functions.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, GaugeFixError
from .lattice import (
    PLANE_WAVE,
    TIGHT_BINDING,
    KGrid,
    LatticeConfig,
    make_kgrid,
    potential_fourier,
)

NORM_TOL = 1e-12
ORTHO_TOL = 1e-10
VALUE_FLOOR = 1e-8


@dataclass(frozen=True, eq=False)
class BlochState:
    """One energy eigenstate labeled by (band, k_index).

    ``coeffs`` are the expansion coefficients in the state's quasimomentum
    sector: plane-wave amplitudes over reciprocal indices j = -M..M in
    plane_wave mode, site amplitudes in tight_binding mode. Unit norm.
    """

    band: int
    k_index: int
    energy: float
    coeffs: np.ndarray
    gauge_tag: str

    def __post_init__(self) -> None:
        coeffs = np.asarray(self.coeffs, dtype=complex)
        norm = np.linalg.norm(coeffs)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"BlochState (n={self.band}, l={self.k_index}) norm {norm!r} is not 1")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)


@dataclass(frozen=True, eq=False)
class BlochBasis:
    """The full gauged Bloch set over (band, k_index).

    ``energies`` has shape (n_bands, N); ``coeffs`` has shape
    (n_bands, N, sector_dim) with unit-norm rows. States at different k are
    orthogonal by construction (disjoint plane-wave sectors); states at the
    same k are orthonormal to eigensolver accuracy.
    """

    config: LatticeConfig
    kgrid: KGrid
    energies: np.ndarray
    coeffs: np.ndarray
    gauge_tag: str = "raw"

    def __post_init__(self) -> None:
        energies = np.asarray(self.energies, dtype=float)
        coeffs = np.asarray(self.coeffs, dtype=complex)
        nb, n = self.config.n_bands, self.config.n_cells
        if energies.shape != (nb, n):
            raise ValueError(f"energies shape {energies.shape} != {(nb, n)}")
        if coeffs.shape != (nb, n, self.config.sector_dim):
            raise ValueError(f"coeffs shape {coeffs.shape} != {(nb, n, self.config.sector_dim)}")
        norms = np.linalg.norm(coeffs, axis=2)
        if np.max(np.abs(norms - 1.0)) > NORM_TOL:
            raise ValueError("Bloch coefficient vectors must have unit norm")
        for l in range(n):
            gram = coeffs[:, l, :].conj() @ coeffs[:, l, :].T
            if np.max(np.abs(gram - np.eye(nb))) > ORTHO_TOL:
                raise ValueError(f"bands at k-index {l} are not orthonormal")
        energies.setflags(write=False)
        coeffs.setflags(write=False)
        object.__setattr__(self, "energies", energies)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def n_bands(self) -> int:
        return self.config.n_bands

    @property
    def n_cells(self) -> int:
        return self.config.n_cells

    @property
    def ambient_dim(self) -> int:
        return self.n_cells * self.config.sector_dim if self.config.mode == PLANE_WAVE else self.n_cells

    def state(self, band: int, k_index: int) -> BlochState:
        return BlochState(
            band=band,
            k_index=k_index,
            energy=float(self.energies[band, k_index]),
            coeffs=self.coeffs[band, k_index],
            gauge_tag=self.gauge_tag,
        )

    def ambient_matrix(self) -> np.ndarray:
        """All Bloch states as columns of one matrix in a common ambient basis.

        Columns are ordered by flat index n*N + l. In plane_wave mode the
        ambient space stacks the N disjoint sectors {e^{i(k_l + G_j)x}}, so
        states at different k have exactly disjoint support; in tight_binding
        mode the ambient space is the N-site basis.
        """
        nb, n = self.n_bands, self.n_cells
        d = self.config.sector_dim
        out = np.zeros((self.ambient_dim, nb * n), dtype=complex)
        for band in range(nb):
            for l in range(n):
                col = band * n + l
                if self.config.mode == PLANE_WAVE:
                    out[l * d : (l + 1) * d, col] = self.coeffs[band, l]
                else:
                    out[:, col] = self.coeffs[band, l]
        return out

    def psi_x(self, band: int, k_index: int, x: np.ndarray) -> np.ndarray:
        """Real-space wavefunction psi_{n l}(x), normalized over the ring of length N a."""
        if self.config.mode != PLANE_WAVE:
            raise ConfigError("real-space evaluation requires plane_wave mode")
        x = np.asarray(x, dtype=float)
        waves = _sector_wavenumbers(self.kgrid.values[k_index], self.config)
        phases = np.exp(1j * np.outer(x, waves))
        return phases @ self.coeffs[band, k_index] / np.sqrt(self.n_cells * self.config.lattice_constant)


def _sector_wavenumbers(k: float, config: LatticeConfig) -> np.ndarray:
    m = config.pw_cutoff
    return k + 2.0 * np.pi * np.arange(-m, m + 1) / config.lattice_constant


def build_bloch_hamiltonian(k: float, config: LatticeConfig) -> np.ndarray:
    """Plane-wave Hamiltonian at quasimomentum k: kinetic diagonal plus potential Toeplitz.

    Rows/columns follow reciprocal indices j = -M..M, so entry (p, q)
    corresponds to V_{j_p - j_q}. Exactly Hermitian by construction.
    """
    if config.mode != PLANE_WAVE:
        raise ConfigError("build_bloch_hamiltonian requires plane_wave mode")
    dim = config.sector_dim
    h = np.zeros((dim, dim), dtype=complex)
    np.fill_diagonal(h, _sector_wavenumbers(k, config) ** 2)
    for j, amp in potential_fourier(config).items():
        if abs(j) < dim:
            h += amp * np.eye(dim, k=-j)
    return h


def diagonalize_hermitian(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvector columns of a Hermitian matrix.

    Rejects non-Hermitian input, reporting the measured asymmetry. Within a
    degenerate eigenvalue cluster the columns are reordered deterministically:
    descending magnitude of the first nonzero coefficient, then by the row
    index of that coefficient.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    asym = float(np.max(np.abs(h - h.conj().T))) if h.size else 0.0
    if asym > 1e-12:
        raise ValueError(f"matrix is not Hermitian: max|H - H^dagger| = {asym:.3e}")
    evals, evecs = np.linalg.eigh(h)
    evals = np.asarray(evals, dtype=float)
    _reorder_degenerate(evals, evecs)
    return evals, evecs


def _reorder_degenerate(evals: np.ndarray, evecs: np.ndarray) -> None:
    scale = max(1.0, float(np.max(np.abs(evals))) if evals.size else 1.0)
    tol = 1e-10 * scale
    i = 0
    while i < evals.size:
        j = i + 1
        while j < evals.size and evals[j] - evals[j - 1] <= tol:
            j += 1
        if j - i > 1:
            block = evecs[:, i:j]
            keys = []
            for c in range(block.shape[1]):
                nz = np.flatnonzero(np.abs(block[:, c]) > 1e-8)
                first = int(nz[0]) if nz.size else 0
                keys.append((-abs(block[first, c]), first, c))
            order = [key[2] for key in sorted(keys)]
            evecs[:, i:j] = block[:, order]
        i = j


def solve_bands(config: LatticeConfig, gauge_anchor: float = 0.0) -> BlochBasis:
    """Diagonalize every k-sector and return the lowest ``n_bands`` gauged eigenpairs.

    In tight_binding mode the analytic single-band basis is returned, with
    hopping J taken from ``config.potential_depth``.
    """
    if config.mode == TIGHT_BINDING:
        basis = tight_binding_basis(
            config.n_cells, config.potential_depth, config.lattice_constant
        )
        basis = dataclasses.replace(basis, config=config)
        return fix_gauge(basis, gauge_anchor)

    kgrid = make_kgrid(config)
    nb, n = config.n_bands, config.n_cells
    energies = np.zeros((nb, n))
    coeffs = np.zeros((nb, n, config.sector_dim), dtype=complex)
    for l in range(n):
        evals, evecs = diagonalize_hermitian(build_bloch_hamiltonian(kgrid.values[l], config))
        energies[:, l] = evals[:nb]
        coeffs[:, l, :] = evecs[:, :nb].T
    basis = BlochBasis(config=config, kgrid=kgrid, energies=energies, coeffs=coeffs, gauge_tag="raw")
    return fix_gauge(basis, gauge_anchor)


def tight_binding_basis(n_cells: int, hopping: float, lattice_constant: float = 1.0) -> BlochBasis:
    """Analytic single-band ring basis: E(k) = -2 J cos(k a), amplitudes e^{i k R}/sqrt(N)."""
    if n_cells < 2:
        raise ConfigError(f"n_cells must be >= 2, got {n_cells}")
    config = LatticeConfig(
        n_cells=n_cells,
        lattice_constant=lattice_constant,
        potential_depth=hopping,
        pw_cutoff=0,
        n_bands=1,
        mode=TIGHT_BINDING,
    )
    kgrid = make_kgrid(config)
    sites = lattice_constant * np.arange(n_cells)
    energies = -2.0 * hopping * np.cos(kgrid.values * lattice_constant)[None, :]
    coeffs = np.exp(1j * np.outer(kgrid.values, sites))[None, :, :] / np.sqrt(n_cells)
    return BlochBasis(config=config, kgrid=kgrid, energies=energies, coeffs=coeffs, gauge_tag="analytic")


def _anchor_values(basis: BlochBasis, band: int, k_index: int, x0: float) -> tuple[complex, complex]:
    """Wavefunction value and derivative at the gauge anchor."""
    if basis.config.mode == PLANE_WAVE:
        waves = _sector_wavenumbers(basis.kgrid.values[k_index], basis.config)
        phases = np.exp(1j * waves * x0)
        scale = 1.0 / np.sqrt(basis.n_cells * basis.config.lattice_constant)
        c = basis.coeffs[band, k_index]
        return scale * np.sum(c * phases), scale * np.sum(c * 1j * waves * phases)
    j0 = int(np.rint(x0 / basis.config.lattice_constant)) % basis.n_cells
    return complex(basis.coeffs[band, k_index, j0]), 0.0


def fix_gauge(basis: BlochBasis, x0: float = 0.0) -> BlochBasis:
    """Rephase every state so its value at ``x0`` is real and non-negative.

    States whose value at ``x0`` is below the floor are pinned through the
    derivative instead; if both vanish the state cannot be gauged this way
    and a GaugeFixError names it. Idempotent, and purely a phase change: no
    physical quantity is affected.
    """
    coeffs = np.array(basis.coeffs, dtype=complex)
    for band in range(basis.n_bands):
        for l in range(basis.n_cells):
            value, derivative = _anchor_values(basis, band, l, x0)
            if abs(value) >= VALUE_FLOOR:
                anchor = value
            elif abs(derivative) >= VALUE_FLOOR:
                anchor = derivative
            else:
                raise GaugeFixError(
                    f"cannot fix gauge of state (n={band}, l={l}): "
                    f"|psi(x0)| = {abs(value):.2e} and |psi'(x0)| = {abs(derivative):.2e} at x0 = {x0:g}"
                )
            coeffs[band, l] *= np.exp(-1j * np.angle(anchor))
    return dataclasses.replace(basis, coeffs=coeffs, gauge_tag=f"kohn(x0={x0:g})")


def with_phases(basis: BlochBasis, phases: np.ndarray) -> BlochBasis:
    """Multiply each state (n, l) by a unit-modulus phase; used to probe gauge dependence."""
    phases = np.asarray(phases, dtype=complex)
    if phases.shape != (basis.n_bands, basis.n_cells):
        raise ValueError(f"phases shape {phases.shape} != {(basis.n_bands, basis.n_cells)}")
    if np.max(np.abs(np.abs(phases) - 1.0)) > 1e-12:
        raise ValueError("phases must have unit modulus")
    return dataclasses.replace(basis, coeffs=basis.coeffs * phases[:, :, None], gauge_tag="custom")


def export_bands_csv(basis: BlochBasis, path) -> None:
    """Band structure as CSV with columns (l, k, n, E), full precision."""
    lines = ["l,k,n,E"]
    for l in range(basis.n_cells):
        for n in range(basis.n_bands):
            lines.append(f"{l},{basis.kgrid.values[l]:.17e},{n},{basis.energies[n, l]:.17e}")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
