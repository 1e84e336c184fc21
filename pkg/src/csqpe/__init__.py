"""Eigenenergy estimation by grid-shifted compressed sensing.

Reconstructs Hamiltonian eigenenergies from simulated Hadamard-test
measurement records.  A sparse set of integer evolution times is drawn,
the complex signal is sampled through a binomial measurement channel,
and the dominant frequencies are recovered by basis-pursuit denoising
over a sweep of fractional grid shifts.  Baseline estimators and
numeric verification suites for the supporting kernel/bound identities
are included, plus a benchmark harness and a command-line front end.
"""

from csqpe.errors import ConfigurationError
from csqpe.hamiltonians import (
    DenseHamiltonian,
    Spectrum,
    build_fermi_hubbard,
    build_tfi,
    normalize_and_shift,
    spectrum_for_alpha,
)
from csqpe.signals import (
    RuntimeLedger,
    SignalSource,
    TimeSeries,
    acquire,
    exact_signal,
    hadamard_sample,
    line_spectrum,
)
from csqpe.fourier import (
    GridDecomposition,
    ShiftedFourierOp,
    cs_vectors,
    cx_bound,
    dirichlet,
    grid_decompose,
    optimal_grid_shift,
)
from csqpe.solver import BpdnProblem, BpdnSolution, reference_solve_bpdn, solve_bpdn
from csqpe.estimator import (
    EstimateReport,
    EstimatorConfig,
    SampleSet,
    auto_sigma_test,
    draw_sample_set,
    run_cs_qpe,
    test_another_sampling,
)
from csqpe.rng import SeededStreams

__version__ = "0.1.0"

__all__ = [
    "BpdnProblem",
    "BpdnSolution",
    "ConfigurationError",
    "DenseHamiltonian",
    "EstimateReport",
    "EstimatorConfig",
    "GridDecomposition",
    "RuntimeLedger",
    "SampleSet",
    "SeededStreams",
    "ShiftedFourierOp",
    "SignalSource",
    "Spectrum",
    "TimeSeries",
    "acquire",
    "auto_sigma_test",
    "build_fermi_hubbard",
    "build_tfi",
    "cs_vectors",
    "cx_bound",
    "dirichlet",
    "draw_sample_set",
    "exact_signal",
    "grid_decompose",
    "hadamard_sample",
    "line_spectrum",
    "normalize_and_shift",
    "optimal_grid_shift",
    "reference_solve_bpdn",
    "run_cs_qpe",
    "solve_bpdn",
    "spectrum_for_alpha",
    "test_another_sampling",
]
