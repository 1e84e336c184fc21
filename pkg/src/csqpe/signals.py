"""Time-domain signal synthesis and the simulated measurement channel.

The exact signal is y0(t) = sum_l p_l * exp(-i E_l tau t).  Measurement
emulates the one-ancilla circuit: the real and imaginary parts are means
of m_h independent +/-1 outcomes whose success probabilities are
(1 +/- Re y0)/2 and (1 +/- Im y0)/2.  A runtime ledger tracks the
shot-weighted total evolution time alongside the maximum single
evolution time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from csqpe.errors import ConfigurationError
from csqpe.hamiltonians import Spectrum
from csqpe.rng import SeededStreams, as_streams


@dataclass(frozen=True)
class RuntimeLedger:
    """Accounting of simulated quantum runtime.

    t_total is the shot-weighted sum of |t|*tau over all sampled times;
    t_max is the largest single |t|*tau (circuit-depth proxy).
    """

    t_total: float
    t_max: float
    n_distinct_times: int

    def merged(self, other: "RuntimeLedger") -> "RuntimeLedger":
        return RuntimeLedger(
            t_total=self.t_total + other.t_total,
            t_max=max(self.t_max, other.t_max),
            n_distinct_times=self.n_distinct_times + other.n_distinct_times,
        )


def runtime_ledger(times, tau: float, shots: int) -> RuntimeLedger:
    t = np.abs(np.asarray(times, dtype=float)) * tau
    return RuntimeLedger(
        t_total=float(shots * t.sum()),
        t_max=float(t.max()) if t.size else 0.0,
        n_distinct_times=int(t.size),
    )


@dataclass(frozen=True)
class TimeSeries:
    """Complex samples on integer time indices, with per-point shot count."""

    indices: np.ndarray
    values: np.ndarray
    tau: float
    shots_per_point: int

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        val = np.asarray(self.values, dtype=complex)
        if idx.ndim != 1 or val.shape != idx.shape:
            raise ConfigurationError("indices and values must be 1-d arrays of equal length")
        if np.any(np.diff(idx) <= 0):
            raise ConfigurationError("indices must be strictly increasing")
        if np.any(idx < 0):
            raise ConfigurationError("time indices must be non-negative")
        if np.max(np.abs(val.real), initial=0.0) > 1 + 1e-9 or np.max(np.abs(val.imag), initial=0.0) > 1 + 1e-9:
            raise ConfigurationError("sampled values must have |Re|, |Im| <= 1")
        if self.shots_per_point < 1:
            raise ConfigurationError("shots_per_point must be >= 1")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", val)

    def __len__(self) -> int:
        return self.indices.size

    def value_at(self, t: int) -> complex:
        pos = np.searchsorted(self.indices, t)
        if pos >= self.indices.size or self.indices[pos] != t:
            raise KeyError(t)
        return complex(self.values[pos])

    def to_text(self) -> str:
        """Serialize as one `t,re,im,shots` line per sample (17 significant digits)."""
        lines = [
            f"{int(t)},{v.real:.17g},{v.imag:.17g},{self.shots_per_point}"
            for t, v in zip(self.indices, self.values)
        ]
        header = f"# tau={self.tau:.17g}"
        return "\n".join([header] + lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "TimeSeries":
        tau = 1.0
        idx, val, shots = [], [], 1
        for line in text.strip().splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if "tau=" in line:
                    tau = float(line.split("tau=")[1])
                continue
            t_s, re_s, im_s, shots_s = line.split(",")
            idx.append(int(t_s))
            val.append(float(re_s) + 1j * float(im_s))
            shots = int(shots_s)
        return cls(
            indices=np.asarray(idx, dtype=np.int64),
            values=np.asarray(val, dtype=complex),
            tau=tau,
            shots_per_point=shots,
        )


def exact_signal_many(spectrum: Spectrum, tau: float, times) -> np.ndarray:
    """Vectorized y0 over an array of (possibly non-integer) time indices."""
    t = np.asarray(times, dtype=float)
    live = spectrum.overlaps > 0
    phases = np.exp(-1j * np.outer(t, spectrum.energies[live]) * tau)
    return phases @ spectrum.overlaps[live]


def exact_signal(spectrum: Spectrum, tau: float, t: int) -> complex:
    """y0(t) = sum_l p_l exp(-i E_l tau t); always has modulus <= 1."""
    return complex(exact_signal_many(spectrum, tau, [t])[0])


def _mean_of_pm_one(prob_plus: float, m_h: int, gen: np.random.Generator) -> float:
    """Mean of m_h draws of +/-1 with the given success probability."""
    p = min(max(prob_plus, 0.0), 1.0)
    k = gen.binomial(m_h, p)
    return 2.0 * k / m_h - 1.0


def hadamard_sample(
    spectrum: Spectrum, tau: float, t: int, m_h: int, rng: np.random.Generator
) -> complex:
    """One measured point: means of m_h +/-1 outcomes for each quadrature.

    Expectation equals exact_signal; the real part is drawn first, the
    imaginary second, both from `rng`.
    """
    if m_h < 1:
        raise ConfigurationError(f"m_h must be >= 1, got {m_h}")
    y0 = exact_signal(spectrum, tau, t)
    re = _mean_of_pm_one((1.0 + y0.real) / 2.0, m_h, rng)
    im = _mean_of_pm_one((1.0 + y0.imag) / 2.0, m_h, rng)
    return complex(re, im)


def shots_from_tolerance(n_times: int, sigma_h: float, delta: float) -> int:
    """Per-point shot count ceil(ln(2|T|/delta) / sigma_h^2) (natural log)."""
    if sigma_h <= 0 or delta <= 0:
        raise ConfigurationError("sigma_h and delta must be positive")
    return int(math.ceil(math.log(2.0 * n_times / delta) / sigma_h**2))


class SignalSource:
    """Measurement access to a spectrum's time signal.

    `noiseless=True` short-circuits the channel and returns exact values
    (the runtime ledger still uses the nominal shot count).
    """

    def __init__(self, spectrum: Spectrum, noiseless: bool = False):
        self.spectrum = spectrum
        self.noiseless = noiseless

    def exact(self, times, tau: float) -> np.ndarray:
        return exact_signal_many(self.spectrum, tau, times)

    def sample_integer_times(
        self, indices, tau: float, m_h: int, streams: SeededStreams, label: str = "acq"
    ) -> TimeSeries:
        """Measure each integer time through the channel.

        Each (t, quadrature) pair draws from its own substream, so the
        result is independent of evaluation order.
        """
        idx = np.asarray(indices, dtype=np.int64)
        if self.noiseless:
            vals = self.exact(idx, tau)
        else:
            y0 = self.exact(idx, tau)
            vals = np.empty(idx.size, dtype=complex)
            for i, t in enumerate(idx):
                re = _mean_of_pm_one(
                    (1.0 + y0[i].real) / 2.0, m_h, streams.generator(label, int(t), 0)
                )
                im = _mean_of_pm_one(
                    (1.0 + y0[i].imag) / 2.0, m_h, streams.generator(label, int(t), 1)
                )
                vals[i] = complex(re, im)
        return TimeSeries(indices=idx, values=vals, tau=tau, shots_per_point=m_h)

    def sample_continuous(self, times, tau: float, shots: int, gen: np.random.Generator) -> np.ndarray:
        """Measure arbitrary real times sequentially from one generator."""
        y0 = self.exact(times, tau)
        if self.noiseless:
            return y0
        out = np.empty(y0.size, dtype=complex)
        for i, v in enumerate(y0):
            re = _mean_of_pm_one((1.0 + v.real) / 2.0, shots, gen)
            im = _mean_of_pm_one((1.0 + v.imag) / 2.0, shots, gen)
            out[i] = complex(re, im)
        return out


def acquire(
    sample_set,
    tau: float,
    spectrum: Spectrum,
    sigma_h: float = 0.1,
    delta: float = 0.01,
    m_h_override: int | None = None,
    rng=0,
) -> tuple[TimeSeries, RuntimeLedger]:
    """Measure a whole sample set and account for the runtime spent.

    The shot count per point is `m_h_override` when given, otherwise
    derived from the target per-point tolerance via shots_from_tolerance.
    """
    indices = np.asarray(getattr(sample_set, "indices", sample_set), dtype=np.int64)
    if indices.size == 0:
        raise ConfigurationError("cannot acquire an empty sample set")
    if m_h_override is not None:
        if m_h_override < 1:
            raise ConfigurationError("m_h_override must be >= 1")
        m_h = int(m_h_override)
    else:
        m_h = shots_from_tolerance(indices.size, sigma_h, delta)
    streams = as_streams(rng)
    series = SignalSource(spectrum).sample_integer_times(indices, tau, m_h, streams)
    return series, runtime_ledger(indices, tau, m_h)


def line_spectrum(freqs, weights, tau: float = 1.0) -> Spectrum:
    """Synthetic spectrum with lines at the given cyclic frequencies.

    Maps each frequency f in [0, 1) to energy 2*pi*f / tau, so the
    signal at integer t is sum_f w_f exp(-i 2 pi f t).
    """
    f = np.asarray(freqs, dtype=float)
    w = np.asarray(weights, dtype=float)
    order = np.argsort(f, kind="stable")
    return Spectrum(energies=2.0 * np.pi * f[order] / tau, overlaps=w[order])
