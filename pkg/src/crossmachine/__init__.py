"""Fair comparison of optimization algorithms run on different machines.

Runtimes published for one machine are carried over to another through CPU
benchmark scores, shrunk so that overshooting the true equivalent runtime is
rare, and the resulting paired results are judged with a one-sided sign test
whose p-value is corrected for that residual overshoot risk.
"""

from ._kernels import BACKEND
from .binom import BinomialSpec, binom_cdf, binom_pmf
from .runtime_model import (
    CalibrationModel,
    GammaCurve,
    MachineScore,
    RuntimeMatrix,
    biased_estimate,
    build_gamma_curve,
    centered_estimate,
    check_applicability,
    estimate_p_longer,
    fit_reference_regression,
    gamma_for,
    load_calibration,
)
from .signtest import (
    PairedObservation,
    SignTestResult,
    corrected_p_value,
    corrected_p_value_oracle,
    run_comparison,
    sign_statistic,
    sign_test_p_value,
)

__version__ = "0.1.0"
