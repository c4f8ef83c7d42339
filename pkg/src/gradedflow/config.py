"""Numerical settings used across the package.

Every tolerance, bound and sampling knob lives in :class:`Config`, so a single
object fully determines the outcome of a computation.
"""

from dataclasses import dataclass, field, replace


@dataclass(frozen=True)
class Config:
    weight_cap: int = 4

    # pointwise equality of coefficient expressions
    zero_tol: float = 1e-9
    n_zero_samples: int = 20
    sample_low: float = 0.25
    sample_high: float = 1.25

    # ODE integration
    atol: float = 1e-9
    rtol: float = 1e-8
    state_bound: float = 1e8
    min_step: float = 1e-12
    t_max: float = 1.0
    max_condition: float = 1e8

    # numeric verdicts: pass below, fail above, indeterminate between
    pass_threshold: float = 1e-6
    fail_threshold: float = 1e-3

    # verification sampling
    seed: int = 0
    samples: int = 4
    base_points: tuple = field(default_factory=tuple)
    t_range: float = 0.8
    fd_step: float = 1e-2
    check_atol: float = 1e-12
    check_rtol: float = 1e-11

    def replace(self, **changes):
        return replace(self, **changes)

    def tight(self):
        """Copy with the integrator tolerances used by verification checks."""
        return replace(self, atol=self.check_atol, rtol=self.check_rtol)


DEFAULT = Config()
