"""Grid-shift sweep estimator and its hold-out validation test.

The pipeline draws a Bernoulli sample of integer times, measures the
signal there, then for each trial shift nu_j = -1/2 + j/J solves the
constrained l1 recovery in the shifted basis.  A second, independent
sample set optionally screens each candidate by its hold-out residual;
the surviving candidate with the smallest l1 norm determines the energy
estimate E* = 2 pi (min K + nu*) / (N tau).
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field, asdict

import numpy as np

from csqpe.errors import ConfigurationError
from csqpe.fourier import ShiftedFourierOp
from csqpe.rng import as_streams
from csqpe.signals import RuntimeLedger, SignalSource, TimeSeries, runtime_ledger, shots_from_tolerance
from csqpe.solver import BpdnSolution, SolverOptions, solve_bpdn_batch

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class SampleSet:
    """Distinct integer time indices drawn by the Bernoulli(r) scheme."""

    n: int
    indices: np.ndarray
    ratio: float

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        if idx.ndim != 1:
            raise ConfigurationError("indices must be 1-d")
        if idx.size and (np.any(np.diff(idx) <= 0) or idx[0] < 0 or idx[-1] >= self.n):
            raise ConfigurationError("indices must be strictly increasing in [0, N)")
        object.__setattr__(self, "indices", idx)

    def __len__(self) -> int:
        return self.indices.size


def draw_sample_set(n: int, r: float, rng: np.random.Generator) -> SampleSet:
    """Include each index of {0, ..., N-1} independently with probability r.

    An empty draw is retried with fresh randomness from the same
    generator (and logged); r = 1 always returns the full range.
    """
    if not 0.0 < r <= 1.0:
        raise ConfigurationError(f"sampling ratio must be in (0, 1], got {r}")
    if n < 1:
        raise ConfigurationError(f"signal length must be >= 1, got {n}")
    attempt = 0
    while True:
        mask = rng.random(n) < r
        if mask.any():
            return SampleSet(n=n, indices=np.nonzero(mask)[0], ratio=r)
        attempt += 1
        logger.info("empty Bernoulli draw (attempt %d), retrying with fresh substream", attempt)


def test_another_sampling(nu: float, s: np.ndarray, y2: TimeSeries, sigma_test: float) -> int:
    """Hold-out screen: 1 if the fit explains the fresh samples, else 0.

    Fails (returns 0) exactly when the summed squared discrepancy reaches
    |T2| * sigma_test^2.
    """
    if len(y2) == 0:
        raise ConfigurationError("hold-out series must be non-empty")
    s = np.asarray(s, dtype=float)
    op = ShiftedFourierOp(s.size, nu, rows=y2.indices)
    err = float(np.sum(np.abs(op.apply(s) - y2.values) ** 2))
    return 0 if err >= len(y2) * sigma_test**2 else 1


def auto_sigma_test(sigma: float, s_sparsity: int, n: int, c0: float, eta: float) -> float:
    """Hold-out threshold from the recovery analysis, with headroom c = 1.1.

    Uses the eta-dependent recovery constants; requires eta in
    (0, sqrt(2) - 1) for those to be positive.  Linear in sigma.
    """
    if not 0.0 < eta < SQRT2 - 1.0:
        raise ConfigurationError(f"eta must be in (0, sqrt(2)-1), got {eta}")
    if s_sparsity < 1 or n < 2:
        raise ConfigurationError("s_sparsity must be >= 1 and n >= 2")
    log_n = math.log(n)
    denom = 1.0 - (SQRT2 + 1.0) * eta
    c1 = (2.0 + 2.0 * (SQRT2 - 1.0) * eta) / denom
    c2 = 4.0 * math.sqrt(1.0 + eta) / denom
    c3 = 2.0 * c1 + c2 * math.pi + (2.0 * math.pi / log_n) * math.sqrt(s_sparsity / 3.0)
    bracket = math.sqrt(c3**2 + 8.0 * math.pi**2 * s_sparsity / (3.0 * log_n**2)) + c0
    return 1.1 * math.sqrt(1.5) * bracket * sigma


@dataclass(frozen=True)
class EstimatorConfig:
    """Configuration of one sweep run (names follow the run-config schema)."""

    n: int
    r: float
    sigma: float
    j_trials: int
    p_min: float
    s_sparsity: int = 1
    tau: float = 1.0
    sigma_h: float = 0.1
    sigma_test: float | str = "off"
    delta: float = 0.01
    m_h_override: int | None = None
    k_rule: str = "threshold"
    eta: float = 0.2
    c0: float = 1.0
    solver: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self):
        if self.n < 2:
            raise ConfigurationError(f"n must be >= 2, got {self.n}")
        if self.j_trials < 1:
            raise ConfigurationError(f"j_trials must be >= 1, got {self.j_trials}")
        if self.sigma < 0:
            raise ConfigurationError(f"sigma must be >= 0, got {self.sigma}")
        if self.tau <= 0:
            raise ConfigurationError(f"tau must be > 0, got {self.tau}")
        if self.k_rule not in ("threshold", "argmax"):
            raise ConfigurationError(f"k_rule must be 'threshold' or 'argmax', got {self.k_rule!r}")
        if isinstance(self.sigma_test, str) and self.sigma_test not in ("off", "auto"):
            raise ConfigurationError(
                f"sigma_test must be a number, 'auto', or 'off', got {self.sigma_test!r}"
            )

    @classmethod
    def from_dict(cls, d: dict) -> "EstimatorConfig":
        d = dict(d)
        solver = SolverOptions.from_dict(d.pop("solver", None))
        allowed = {f for f in cls.__dataclass_fields__ if f != "solver"}
        unknown = set(d) - allowed
        if unknown:
            raise ConfigurationError(f"unknown estimator config keys: {sorted(unknown)}")
        missing = {"n", "r", "sigma", "j_trials", "p_min"} - set(d)
        if missing:
            raise ConfigurationError(f"missing estimator config keys: {sorted(missing)}")
        return cls(solver=solver, **d)


@dataclass(frozen=True)
class TrialRecord:
    j: int
    nu: float
    l1_norm: float
    outcome: int
    score: float
    solver_status: str
    iterations: int
    residual_norm: float


@dataclass(frozen=True)
class EstimateReport:
    """Everything the sweep produced, plus the merged runtime ledger."""

    n: int
    tau: float
    nu_star: float
    s_star: np.ndarray
    k_set: list[int]
    e_star: float | None
    status: str  # ok | empty_k | all_trials_failed
    trial_log: list[TrialRecord]
    ledger: RuntimeLedger
    sample_counts: tuple[int, int]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "tau": self.tau,
            "nu_star": self.nu_star,
            "s_star": [float(v) for v in self.s_star],
            "k_set": [int(k) for k in self.k_set],
            "e_star": self.e_star,
            "status": self.status,
            "trial_log": [asdict(t) for t in self.trial_log],
            "ledger": asdict(self.ledger),
            "sample_counts": list(self.sample_counts),
        }


def _resolve_sigma_test(cfg: EstimatorConfig) -> float | None:
    if cfg.sigma_test == "off":
        return None
    if cfg.sigma_test == "auto":
        return auto_sigma_test(cfg.sigma, cfg.s_sparsity, cfg.n, cfg.c0, cfg.eta)
    return float(cfg.sigma_test)


def _stacked_sweep_ops(base: np.ndarray, times: np.ndarray, nus: np.ndarray, n: int) -> np.ndarray:
    """Prestack [Re A_nu; Im A_nu] for all shifts; A_nu has per-row phases."""
    phases = np.exp(-2j * np.pi * np.outer(nus, times) / n)  # (J, m)
    a = base[None, :, :] * phases[:, :, None]  # (J, m, N)
    m = times.size
    out = np.empty((nus.size, 2 * m, n))
    out[:, :m, :] = a.real
    out[:, m:, :] = a.imag
    return out


def run_cs_qpe(cfg: EstimatorConfig, signal_source: SignalSource, rng) -> EstimateReport:
    """Execute the full sweep: sample, measure, solve per shift, select.

    `rng` is an integer master seed or a SeededStreams; every random
    choice (both sample sets, every measurement outcome) comes from a
    named substream, so results are reproducible and order-independent.
    The J solves run as one batched operation.
    """
    if 4.0 * math.pi * math.sqrt(cfg.s_sparsity) >= math.sqrt(3.0) * math.log(cfg.n):
        warnings.warn(
            "sparsity/length combination is outside the analyzed parameter regime "
            f"(4*pi*sqrt(S) >= sqrt(3)*ln(N) at S={cfg.s_sparsity}, N={cfg.n}); "
            "proceeding anyway",
            stacklevel=2,
        )
    streams = as_streams(rng)
    n, tau, j_trials = cfg.n, cfg.tau, cfg.j_trials

    tset1 = draw_sample_set(n, cfg.r, streams.generator("sample-set", 1))
    if cfg.m_h_override is not None:
        m_h = int(cfg.m_h_override)
    else:
        m_h = shots_from_tolerance(len(tset1), cfg.sigma_h, cfg.delta)
    series1 = signal_source.sample_integer_times(
        tset1.indices, tau, m_h, streams.scoped("acq", 1)
    )
    ledger = runtime_ledger(tset1.indices, tau, m_h)

    nus = -0.5 + np.arange(j_trials) / j_trials
    base = np.exp(-2j * np.pi * np.outer(tset1.indices, np.arange(n)) / n)
    ats = _stacked_sweep_ops(base, tset1.indices, nus, n)
    radius = math.sqrt(len(tset1)) * cfg.sigma
    solutions: list[BpdnSolution] = solve_bpdn_batch(
        ats, np.tile(series1.values, (j_trials, 1)), radius, cfg.solver
    )
    sols = np.empty((j_trials, n))
    for j, sol in enumerate(solutions):
        sols[j] = np.ones(n) if sol.status == "infeasible" else sol.s

    tset2 = draw_sample_set(n, cfg.r, streams.generator("sample-set", 2))
    m_h2 = m_h if cfg.m_h_override is not None else shots_from_tolerance(
        len(tset2), cfg.sigma_h, cfg.delta
    )
    series2 = signal_source.sample_integer_times(
        tset2.indices, tau, m_h2, streams.scoped("acq", 2)
    )
    ledger = ledger.merged(runtime_ledger(tset2.indices, tau, m_h2))

    sigma_test = _resolve_sigma_test(cfg)
    if sigma_test is None:
        outcomes = np.ones(j_trials, dtype=int)
    else:
        # E_j = sum_t |(F_nu s_j)_t - y2_t|^2, batched over j
        base2 = np.exp(-2j * np.pi * np.outer(tset2.indices, np.arange(n)) / n)
        f0 = sols @ base2.T  # (J, m2): unshifted transform rows
        phases2 = np.exp(-2j * np.pi * np.outer(nus, tset2.indices) / n)
        errs = np.sum(np.abs(phases2 * f0 - series2.values[None, :]) ** 2, axis=1)
        outcomes = (errs < len(tset2) * sigma_test**2).astype(int)

    l1 = np.abs(sols).sum(axis=1)
    scores = np.where(outcomes == 1, l1, float(n + 1))
    j_star = int(np.argmin(scores))  # ties resolve to the smallest j
    nu_star = float(nus[j_star])
    s_star = sols[j_star]

    if cfg.k_rule == "argmax":
        k_set = [int(np.argmax(s_star))]
    else:
        k_set = [int(k) for k in np.nonzero(s_star >= cfg.p_min)[0]]

    all_failed = sigma_test is not None and not outcomes.any()
    if all_failed:
        status, e_star = "all_trials_failed", None
    elif not k_set:
        status, e_star = "empty_k", None
    else:
        status = "ok"
        e_star = 2.0 * math.pi * (min(k_set) + nu_star) / (n * tau)

    trial_log = [
        TrialRecord(
            j=j,
            nu=float(nus[j]),
            l1_norm=float(l1[j]),
            outcome=int(outcomes[j]),
            score=float(scores[j]),
            solver_status=solutions[j].status,
            iterations=solutions[j].iterations,
            residual_norm=float(solutions[j].residual_norm),
        )
        for j in range(j_trials)
    ]
    return EstimateReport(
        n=n,
        tau=tau,
        nu_star=nu_star,
        s_star=s_star,
        k_set=k_set,
        e_star=e_star,
        status=status,
        trial_log=trial_log,
        ledger=ledger,
        sample_counts=(len(tset1), len(tset2)),
    )
