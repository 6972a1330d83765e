"""Exception types shared across the package.

Grouped by origin: configuration/shape problems, algebraic degeneracies
detected while building coefficient data, and numerical failures raised
by root solvers and integrators.  Numerical failures carry enough state
(residuals, partial records) to diagnose the run that produced them.
"""
from __future__ import annotations


class FastslideError(Exception):
    """Base class for all package-specific errors."""


# --- configuration / shape -------------------------------------------------

class ConfigError(FastslideError):
    """A system configuration file could not be parsed or validated."""


class DimensionMismatch(ConfigError):
    def __init__(self, which: str, expected, got):
        self.which = which
        self.expected = expected
        self.got = got
        super().__init__(f"{which}: expected shape {expected}, got {got}")


# --- expression language ---------------------------------------------------

class ExprError(FastslideError):
    """Base class for expression-language errors; carries a byte offset."""

    def __init__(self, message: str, offset: int = -1):
        self.offset = offset
        super().__init__(message if offset < 0 else f"{message} (at offset {offset})")


class ExprSyntaxError(ExprError):
    def __init__(self, offset: int, expected: str):
        self.expected = expected
        super().__init__(f"syntax error, expected {expected}", offset)


class UnknownIdentifier(ExprError):
    def __init__(self, name: str, offset: int):
        self.name = name
        super().__init__(f"unknown identifier '{name}'", offset)


class IndexOutOfRange(ExprError):
    def __init__(self, name: str, offset: int, limit: int):
        self.name = name
        self.limit = limit
        super().__init__(f"variable '{name}' out of range (max index {limit})", offset)


class NonFinite(ExprError):
    def __init__(self, offset: int, detail: str = "expression evaluated to a non-finite value"):
        super().__init__(detail, offset)


# --- coefficient algebra ---------------------------------------------------

class SingularGy(FastslideError):
    """g_y is numerically singular; slow-manifold quantities are undefined."""

    def __init__(self, rcond: float):
        self.rcond = rcond
        super().__init__(f"fast Jacobian g_y is numerically singular (rcond ~ {rcond:.3e})")


class DegenerateSliding(FastslideError):
    """The sliding-field denominator vanishes (two-fold-like degeneracy)."""


class AssumptionViolated(FastslideError):
    """One of the standing assumptions fails at the expansion point."""

    def __init__(self, message: str, report=None):
        self.report = report
        super().__init__(message)


class OffManifold(FastslideError):
    def __init__(self, residual: float):
        self.residual = residual
        super().__init__(f"expansion point is off the reduced switching manifold (|h_rd| = {residual:.3e})")


# --- numerics --------------------------------------------------------------

class NumericalFailure(FastslideError):
    """Base class for solver/integrator failures (CLI exit code 3)."""


class NoConvergence(NumericalFailure):
    def __init__(self, iterations: int, residual: float):
        self.iterations = iterations
        self.residual = residual
        super().__init__(f"Newton iteration did not converge after {iterations} steps (residual {residual:.3e})")


class SingularJacobian(NumericalFailure):
    pass


class NoRoot(NumericalFailure):
    def __init__(self, t_max: float, last_value: float):
        self.t_max = t_max
        self.last_value = last_value
        super().__init__(f"switching value did not re-cross zero before t = {t_max:.3g} (last value {last_value:.3e})")


class TangencyAtStart(NumericalFailure):
    def __init__(self, slope: float):
        self.slope = slope
        super().__init__(f"flow is tangent to the switching subspace at the start (slope {slope:.3e})")


class PreconditionH0Plus(NumericalFailure):
    """Start point is not in the admissible half of the switching subspace."""


class NotScalarFast(FastslideError):
    def __init__(self, m: int):
        self.m = m
        super().__init__(f"operation requires a one-dimensional fast variable, got m = {m}")


class NoSignChange(NumericalFailure):
    """Fixed-point scan found no sign change; carries the scan table."""

    def __init__(self, message: str, scan_table):
        self.scan_table = scan_table
        super().__init__(message)


class TimeCap(NumericalFailure):
    def __init__(self, t_cap: float):
        self.t_cap = t_cap
        super().__init__(f"trajectory did not reach the crossing set within t = {t_cap:.3g}")


class StepUnderflow(NumericalFailure):
    pass


class EventLoop(NumericalFailure):
    def __init__(self, n_events: int):
        self.n_events = n_events
        super().__init__(f"event count exceeded the configured maximum ({n_events})")


class OrbitFailure(NumericalFailure):
    """Raised when orbit iteration fails mid-run; carries the partial record."""

    def __init__(self, step: int, cause: Exception, record):
        self.step = step
        self.cause = cause
        self.record = record
        super().__init__(f"return map failed at orbit step {step}: {cause}")
