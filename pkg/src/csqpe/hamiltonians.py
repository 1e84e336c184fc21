"""Benchmark Hamiltonians and their spectra.

Builds the two lattice models used throughout (a transverse-field Ising
ring and an open Fermi-Hubbard chain mapped to qubits by a parity-string
encoding), rescales them so all eigenvalues land in [pi/4, 3pi/4], and
packages eigenvalues plus initial-state overlap weights as a `Spectrum`.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from csqpe.errors import ConfigurationError

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
# annihilator in the number basis |0>, |1>
_ANNIHILATE = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)

HERMITICITY_RTOL = 1e-12


@dataclass(frozen=True)
class DenseHamiltonian:
    """Dense Hermitian matrix on a register of qubit/fermion modes."""

    entries: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.entries, dtype=complex)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ConfigurationError(f"Hamiltonian must be square, got shape {h.shape}")
        dim = h.shape[0]
        if dim < 2 or dim & (dim - 1):
            raise ConfigurationError(f"Hamiltonian dimension must be a power of two, got {dim}")
        scale = max(float(np.max(np.abs(h))), 1.0)
        if np.max(np.abs(h - h.conj().T)) > HERMITICITY_RTOL * scale:
            raise ConfigurationError("Hamiltonian is not Hermitian")
        object.__setattr__(self, "entries", h)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenenergies paired with initial-state overlap weights."""

    energies: np.ndarray
    overlaps: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=float)
        p = np.asarray(self.overlaps, dtype=float)
        if e.ndim != 1 or p.shape != e.shape:
            raise ConfigurationError("energies and overlaps must be 1-d vectors of equal length")
        if np.any(np.diff(e) < 0):
            raise ConfigurationError("energies must be non-decreasing")
        if np.any(p < -1e-15) or np.any(p > 1 + 1e-12):
            raise ConfigurationError("overlaps must lie in [0, 1]")
        if abs(p.sum() - 1.0) > 1e-10:
            raise ConfigurationError(f"overlaps must sum to 1, got {p.sum()!r}")
        object.__setattr__(self, "energies", e)
        object.__setattr__(self, "overlaps", p)

    def dominant(self, threshold: float) -> np.ndarray:
        """Indices of levels whose weight reaches `threshold`."""
        return np.nonzero(self.overlaps >= threshold)[0]


def _kron_chain(mats) -> np.ndarray:
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def _single_site(op: np.ndarray, site: int, n_sites: int) -> np.ndarray:
    mats = [_I2] * n_sites
    mats[site] = op
    return _kron_chain(mats)


def build_tfi(sites: int) -> DenseHamiltonian:
    """Transverse-field Ising ring: -sum Z_j Z_{j+1} (periodic) - 4 sum X_j.

    The wrap bond is always included, so two sites get a doubled ZZ
    coupling (both orientations of the single bond).
    """
    if not 2 <= sites <= 12:
        raise ConfigurationError(f"tfi sites must be in [2, 12], got {sites}")
    dim = 2**sites
    h = np.zeros((dim, dim), dtype=complex)
    for j in range(sites):
        h -= _single_site(_Z, j, sites) @ _single_site(_Z, (j + 1) % sites, sites)
        h -= 4.0 * _single_site(_X, j, sites)
    return DenseHamiltonian(h)


def _mode_operator(mode: int, n_modes: int) -> np.ndarray:
    """Annihilator for one fermionic mode under the parity-string encoding."""
    mats = [_Z] * mode + [_ANNIHILATE] + [_I2] * (n_modes - mode - 1)
    return _kron_chain(mats)


def build_fermi_hubbard(sites: int, interaction: float) -> DenseHamiltonian:
    """Open-chain Fermi-Hubbard model on 2*sites fermionic modes.

    Hopping -sum_{j,s} (c+_{j,s} c_{j+1,s} + h.c.) plus on-site
    interaction U * sum_j (n_up - 1/2)(n_dn - 1/2).  Mode ordering is
    site-major, spin-minor; any consistent ordering is isospectral.
    """
    if not 1 <= sites <= 5:
        raise ConfigurationError(f"fermi-hubbard sites must be in [1, 5], got {sites}")
    n_modes = 2 * sites
    dim = 2**n_modes
    c = [_mode_operator(m, n_modes) for m in range(n_modes)]

    def mode(site: int, spin: int) -> int:
        return 2 * site + spin

    h = np.zeros((dim, dim), dtype=complex)
    for j in range(sites - 1):
        for spin in (0, 1):
            a, b = c[mode(j, spin)], c[mode(j + 1, spin)]
            hop = a.conj().T @ b
            h -= hop + hop.conj().T
    half = 0.5 * np.eye(dim)
    for j in range(sites):
        n_up = c[mode(j, 0)].conj().T @ c[mode(j, 0)]
        n_dn = c[mode(j, 1)].conj().T @ c[mode(j, 1)]
        h += interaction * (n_up - half) @ (n_dn - half)
    return DenseHamiltonian(h)


def eigensystem(h: DenseHamiltonian) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and gauge-fixed eigenvectors.

    Each eigenvector is rotated by a global phase so its first component
    of significant magnitude has positive real part; with the stable
    ascending sort this makes the decomposition reproducible.
    """
    evals, evecs = np.linalg.eigh(h.entries)
    order = np.argsort(evals, kind="stable")
    evals = evals[order]
    evecs = evecs[:, order]
    for i in range(evecs.shape[1]):
        v = evecs[:, i]
        idx = np.nonzero(np.abs(v) > 1e-10)[0]
        if idx.size:
            pivot = v[idx[0]]
            evecs[:, i] = v * (np.conj(pivot) / abs(pivot))
    return evals, evecs


def spectral_norm(h: DenseHamiltonian) -> float:
    """Largest |eigenvalue|, from the dense eigendecomposition."""
    evals, _ = eigensystem(h)
    return float(np.max(np.abs(evals)))


def normalize_and_shift(h: DenseHamiltonian) -> DenseHamiltonian:
    """Rescale to pi*H / (4*||H||) then shift by pi/2, landing in [pi/4, 3pi/4]."""
    norm = spectral_norm(h)
    if norm == 0.0:
        raise ZeroDivisionError("cannot normalize the zero Hamiltonian (spectral norm is 0)")
    dim = h.dim
    out = (np.pi / (4.0 * norm)) * h.entries + (np.pi / 2.0) * np.eye(dim)
    return DenseHamiltonian(out)


def spectrum_for_alpha(h: DenseHamiltonian, alpha: float, levels: int = 10) -> Spectrum:
    """Spectrum for the geometric initial-state family.

    Weight (1-alpha)*alpha^l / (1-alpha^levels) goes to the l-th lowest
    eigenstate for l < levels, zero elsewhere.  `h` must already be
    normalized and shifted.
    """
    if not 0.0 < alpha < 1.0:
        raise ConfigurationError(f"alpha must be in (0, 1), got {alpha}")
    if not 1 <= levels <= h.dim:
        raise ConfigurationError(f"levels must be in [1, {h.dim}], got {levels}")
    evals, _ = eigensystem(h)
    if evals[0] < np.pi / 4 - 1e-9 or evals[-1] > 3 * np.pi / 4 + 1e-9:
        raise ConfigurationError(
            "spectrum_for_alpha expects a normalized-and-shifted Hamiltonian "
            f"(eigenvalues in [pi/4, 3pi/4], got [{evals[0]:.6f}, {evals[-1]:.6f}])"
        )
    p = np.zeros_like(evals)
    ell = np.arange(levels)
    p[:levels] = (1.0 - alpha) * alpha**ell / (1.0 - alpha**levels)
    return Spectrum(energies=evals, overlaps=p)


def load_dense_hamiltonian(path: str | Path) -> DenseHamiltonian:
    """Load a custom dense Hermitian matrix.

    `.npy` files hold the complex matrix directly; text files hold one
    row per line as whitespace-separated (re, im) pairs, row-major.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"Hamiltonian file not found: {path}")
    if path.suffix == ".npy":
        mat = np.load(path)
    else:
        raw = np.loadtxt(path, dtype=float, ndmin=2)
        if raw.shape[1] % 2:
            raise ConfigurationError(
                f"text matrix must have an even column count of (re, im) pairs, got {raw.shape[1]}"
            )
        mat = raw[:, 0::2] + 1j * raw[:, 1::2]
    return DenseHamiltonian(np.asarray(mat, dtype=complex))
