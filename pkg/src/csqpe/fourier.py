"""Shifted Fourier operators, the Dirichlet kernel, and grid decompositions.

The shifted transform has entries exp(-i 2 pi (k + nu) n / N) for time n
and bin k, both zero-based.  A complex signal decomposes uniquely as
y = F_nu (x_re + i x_im); the shift that minimizes ||x_im||_2 defines
the optimal grid decomposition, whose residual controls how well an
off-grid line spectrum is represented by on-grid atoms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from csqpe.errors import ConfigurationError

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def dirichlet(n: int, v) -> np.ndarray | float:
    """Normalized Dirichlet kernel: 1 at v=0, else sin(pi v) / (N sin(pi v / N)).

    Evaluated as sinc(v)/sinc(v/N) so the v=0 case is exact.  At the
    removable singularities v = m*N (m nonzero) the geometric-sum limit
    (-1)^(m(N-1)) is used.
    """
    v_arr = np.asarray(v, dtype=float)
    num = np.sinc(v_arr)
    den = np.sinc(v_arr / n)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = num / den
    singular = np.isclose(den, 0.0, atol=1e-300)
    if np.any(singular):
        m = np.rint(v_arr / n)
        limit = np.where((m.astype(np.int64) * (n - 1)) % 2 == 0, 1.0, -1.0)
        out = np.where(singular, limit, out)
    if np.isscalar(v) or np.ndim(v) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class ShiftedFourierOp:
    """F_nu, optionally restricted to a subset of time rows."""

    n: int
    nu: float
    rows: np.ndarray | None = None

    def __post_init__(self):
        if self.n < 2:
            raise ConfigurationError(f"signal length must be >= 2, got {self.n}")
        if self.rows is not None:
            rows = np.asarray(self.rows, dtype=np.int64)
            if rows.ndim != 1 or rows.size == 0:
                raise ConfigurationError("rows must be a non-empty 1-d index array")
            if np.any(rows < 0) or np.any(rows >= self.n):
                raise ConfigurationError("row indices must lie in [0, N)")
            if np.any(np.diff(rows) <= 0):
                raise ConfigurationError("row indices must be strictly increasing")
            object.__setattr__(self, "rows", rows)

    @property
    def row_indices(self) -> np.ndarray:
        return np.arange(self.n) if self.rows is None else self.rows

    def matrix(self) -> np.ndarray:
        """Dense |rows| x N complex matrix."""
        t = self.row_indices
        k = np.arange(self.n)
        return np.exp(-2j * np.pi * np.outer(t, k + self.nu) / self.n)

    def apply(self, s) -> np.ndarray:
        """Rows t of F_nu s.

        Full operators go through the FFT (the shift is a diagonal phase
        in time); row-restricted operators evaluate directly.
        """
        s = np.asarray(s)
        if s.shape != (self.n,):
            raise ValueError(f"expected a length-{self.n} vector, got shape {s.shape}")
        if self.rows is None:
            t = np.arange(self.n)
            return np.exp(-2j * np.pi * self.nu * t / self.n) * np.fft.fft(s)
        return self.matrix() @ s

    def adjoint(self, y) -> np.ndarray:
        """F_nu^dagger applied to a vector over the operator's rows."""
        y = np.asarray(y, dtype=complex)
        t = self.row_indices
        if y.shape != t.shape:
            raise ValueError(f"expected a length-{t.size} vector, got shape {y.shape}")
        if self.rows is None:
            return self.n * np.fft.ifft(y * np.exp(2j * np.pi * self.nu * t / self.n))
        return self.matrix().conj().T @ y

    def stacked_real(self) -> np.ndarray:
        """[Re A; Im A] for real-unknown least-squares / solver use."""
        a = self.matrix()
        return np.vstack([a.real, a.imag])


@dataclass(frozen=True)
class GridDecomposition:
    """Real/imaginary split of the shifted-basis coefficients of a signal."""

    nu: float
    x_re: np.ndarray
    x_im: np.ndarray

    @property
    def n(self) -> int:
        return self.x_re.size

    def reconstruct(self) -> np.ndarray:
        op = ShiftedFourierOp(self.n, self.nu)
        return op.apply(self.x_re + 1j * self.x_im)

    def off_grid_sup(self) -> float:
        """sup-norm of the off-grid component F_nu x_im."""
        op = ShiftedFourierOp(self.n, self.nu)
        return float(np.max(np.abs(op.apply(self.x_im + 0j))))


def grid_decompose(y, nu: float) -> GridDecomposition:
    """Unique decomposition y = F_nu (x_re + i x_im) with real x_re, x_im."""
    y = np.asarray(y, dtype=complex)
    if y.ndim != 1 or y.size < 2:
        raise ConfigurationError("signal must be a 1-d vector of length >= 2")
    op = ShiftedFourierOp(y.size, nu)
    x = op.adjoint(y) / y.size
    return GridDecomposition(nu=nu, x_re=x.real.copy(), x_im=x.imag.copy())


def _imag_norm(y: np.ndarray, nu: float) -> float:
    n = y.size
    t = np.arange(n)
    x = np.fft.ifft(y * np.exp(2j * np.pi * nu * t / n))
    return float(np.linalg.norm(x.imag)) * n


def optimal_grid_shift(
    y, grid_points: int = 512, refine_tol: float = 1e-10
) -> tuple[float, GridDecomposition]:
    """Shift minimizing the imaginary-part norm of the decomposition.

    Coarse scan over [-1/2, 1/2) (the objective is 1-periodic and can
    have several local minima) followed by golden-section refinement of
    the best bracket.  Minimizing ||x_im||_2 is equivalent to minimizing
    ||F_nu x_im||_2 = sqrt(N) ||x_im||_2.
    """
    y = np.asarray(y, dtype=complex)
    if grid_points < 8:
        raise ConfigurationError(f"grid_points must be >= 8, got {grid_points}")
    nus = -0.5 + np.arange(grid_points) / grid_points
    vals = np.array([_imag_norm(y, nu) for nu in nus])
    i = int(np.argmin(vals))
    step = 1.0 / grid_points
    a, b = nus[i] - step, nus[i] + step

    fa, fb = _imag_norm(y, a), _imag_norm(y, b)
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = _imag_norm(y, c), _imag_norm(y, d)
    while (b - a) > refine_tol:
        if fc < fd:
            b, fb = d, fd
            d, fd = c, fc
            c = b - GOLDEN * (b - a)
            fc = _imag_norm(y, c)
        else:
            a, fa = c, fc
            c, fc = d, fd
            d = a + GOLDEN * (b - a)
            fd = _imag_norm(y, d)
    u = 0.5 * (a + b)
    # wrap back into [-1/2, 1/2]
    if u < -0.5:
        u += 1.0
    elif u > 0.5:
        u -= 1.0
    return u, grid_decompose(y, u)


def cx_bound(x) -> float:
    """Sharpness coefficient [(4 + 2 pi^2/N) ||x||_2^2 - 2 pi^2 ||x||_1^2 / N]^(1/2).

    The bracket is clamped at zero: the quantity is only used as a
    lower-bound coefficient and is positive in the intended regime
    ||x||_2 >> ||x||_1 / sqrt(N).
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    l1 = np.abs(x).sum()
    l2sq = float(x @ x)
    bracket = (4.0 + 2.0 * np.pi**2 / n) * l2sq - 2.0 * np.pi**2 * l1**2 / n
    return float(np.sqrt(max(bracket, 0.0)))


def cs_vectors(n: int, nu: float) -> tuple[np.ndarray, np.ndarray]:
    """Cosine- and sine-weighted kernel vectors of a pure shift.

    Entry k is cos/sin of pi (1 - 1/N) (k + nu) times the Dirichlet
    kernel at (k + nu); these are the decomposition coefficients of a
    single frequency offset by nu from the grid.
    """
    if n < 2:
        raise ConfigurationError(f"n must be >= 2, got {n}")
    k = np.arange(n)
    pi_n = np.pi * (1.0 - 1.0 / n)
    d = dirichlet(n, k + nu)
    return np.cos(pi_n * (k + nu)) * d, np.sin(pi_n * (k + nu)) * d
