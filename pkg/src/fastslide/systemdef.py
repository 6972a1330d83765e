"""Data model for slow-fast Filippov systems and their standing assumptions.

Two levels of description live here.  ``FullSystemSpec`` is the user's
nonlinear system: evaluators for the two vector fields, the fast field,
the switching function and their Jacobians (symbolic via :mod:`exprlang`
or finite-difference fallbacks).  ``NormalFormCoeffs`` is the affine data
of the truncated system at an expansion point on the intersection of the
switching and slow manifolds; everything downstream (classification,
flows, return maps) consumes only the coefficients.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import exprlang
from .errors import AssumptionViolated, ConfigError, DimensionMismatch, SingularGy

__all__ = [
    "Domain", "Jacobians", "FullSystemSpec", "NormalFormCoeffs",
    "AssumptionReport", "ValidationResult", "validate_spec", "check_assumptions",
    "DEFAULT_C_STAB", "GY_RCOND_MIN",
]

DEFAULT_C_STAB = 1e-6      # stability margin on the spectral abscissa of g_y
GY_RCOND_MIN = 1e-12       # reciprocal condition estimate below which g_y counts as singular


def _vec(v, length, name) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(v, dtype=float))
    if arr.shape != (length,):
        raise DimensionMismatch(name, (length,), arr.shape)
    return arr


def _mat(v, shape, name) -> np.ndarray:
    arr = np.atleast_2d(np.asarray(v, dtype=float))
    if arr.shape != shape:
        raise DimensionMismatch(name, shape, arr.shape)
    return arr


@dataclass(frozen=True)
class Domain:
    """Rectangular domain of interest on which evaluators must be total."""
    x_min: np.ndarray
    x_max: np.ndarray
    y_min: np.ndarray
    y_max: np.ndarray

    @classmethod
    def box(cls, n: int, m: int, half_width: float = 5.0) -> "Domain":
        return cls(-half_width * np.ones(n), half_width * np.ones(n),
                   -half_width * np.ones(m), half_width * np.ones(m))

    def center(self) -> tuple[np.ndarray, np.ndarray]:
        return 0.5 * (self.x_min + self.x_max), 0.5 * (self.y_min + self.y_max)

    def sample_points(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """Center plus the two extreme corners; used by validation."""
        cx, cy = self.center()
        return [(cx, cy), (self.x_min.copy(), self.y_min.copy()),
                (self.x_max.copy(), self.y_max.copy())]


@dataclass(frozen=True)
class Jacobians:
    """Jacobian evaluators of h and g at a point (x, y, eps)."""
    h_x: object   # -> (n,)
    h_y: object   # -> (m,)
    h_eps: object  # -> float
    g_x: object   # -> (m, n)
    g_y: object   # -> (m, m)
    g_eps: object  # -> (m,)


def finite_difference_jacobians(g, h, n: int, m: int) -> Jacobians:
    """Central-difference fallback with step max(1e-6, 1e-8*|value|)."""

    def step(value: float) -> float:
        return max(1e-6, 1e-8 * abs(value))

    def d_x(f, x, y, eps, width):
        cols = []
        for j in range(n):
            dx = step(x[j])
            xp = np.array(x, dtype=float); xp[j] += dx
            xm = np.array(x, dtype=float); xm[j] -= dx
            cols.append((np.asarray(f(xp, y, eps)) - np.asarray(f(xm, y, eps))) / (2 * dx))
        return np.array(cols, dtype=float).T.reshape(width, n)

    def d_y(f, x, y, eps, width):
        cols = []
        for j in range(m):
            dy = step(y[j])
            yp = np.array(y, dtype=float); yp[j] += dy
            ym = np.array(y, dtype=float); ym[j] -= dy
            cols.append((np.asarray(f(x, yp, eps)) - np.asarray(f(x, ym, eps))) / (2 * dy))
        return np.array(cols, dtype=float).T.reshape(width, m)

    def d_eps(f, x, y, eps, width):
        de = step(eps)
        out = (np.asarray(f(x, y, eps + de)) - np.asarray(f(x, y, eps - de))) / (2 * de)
        return out.reshape(width) if width > 1 else out

    return Jacobians(
        h_x=lambda x, y, eps: d_x(h, x, y, eps, 1).reshape(n),
        h_y=lambda x, y, eps: d_y(h, x, y, eps, 1).reshape(m),
        h_eps=lambda x, y, eps: float(np.asarray(d_eps(h, x, y, eps, 1)).reshape(())),
        g_x=lambda x, y, eps: d_x(g, x, y, eps, m),
        g_y=lambda x, y, eps: d_y(g, x, y, eps, m),
        g_eps=lambda x, y, eps: np.asarray(d_eps(g, x, y, eps, m)).reshape(m),
    )


@dataclass(frozen=True)
class FullSystemSpec:
    """User-defined nonlinear slow-fast Filippov system."""
    n: int
    m: int
    eps: float
    f_plus: object    # (x, y, eps) -> (n,)
    f_minus: object   # (x, y, eps) -> (n,)
    g: object         # (x, y, eps) -> (m,)
    h: object         # (x, y, eps) -> float
    jacobians: Jacobians
    domain: Domain

    @classmethod
    def from_callables(cls, n, m, eps, f_plus, f_minus, g, h,
                       jacobians=None, domain=None) -> "FullSystemSpec":
        if jacobians is None:
            jacobians = finite_difference_jacobians(g, h, n, m)
        if domain is None:
            domain = Domain.box(n, m)
        return cls(int(n), int(m), float(eps), f_plus, f_minus, g, h, jacobians, domain)

    @classmethod
    def from_expressions(cls, n, m, eps, f_plus, f_minus, g, h,
                         domain=None) -> "FullSystemSpec":
        """Build a system from expression strings with symbolic Jacobians.

        ``f_plus``, ``f_minus`` are length-n lists, ``g`` a length-m list
        and ``h`` a single expression, all over x1..xn, y1..ym, eps.
        """
        n, m = int(n), int(m)
        fp = [exprlang.parse(src, n, m) for src in f_plus]
        fm = [exprlang.parse(src, n, m) for src in f_minus]
        ga = [exprlang.parse(src, n, m) for src in g]
        ha = exprlang.parse(h, n, m)
        if len(fp) != n:
            raise DimensionMismatch("f_plus", (n,), (len(fp),))
        if len(fm) != n:
            raise DimensionMismatch("f_minus", (n,), (len(fm),))
        if len(ga) != m:
            raise DimensionMismatch("g", (m,), (len(ga),))

        def vec_eval(asts):
            def call(x, y, eps_):
                env = exprlang.EvalEnv.of(x, y, eps_)
                return np.array([exprlang.evaluate(a, env) for a in asts])
            return call

        def scalar_eval(ast):
            def call(x, y, eps_):
                return exprlang.evaluate(ast, exprlang.EvalEnv.of(x, y, eps_))
            return call

        h_x_asts = [exprlang.differentiate(ha, "x", j) for j in range(n)]
        h_y_asts = [exprlang.differentiate(ha, "y", j) for j in range(m)]
        h_e_ast = exprlang.differentiate(ha, "eps")
        g_x_asts = [[exprlang.differentiate(gi, "x", j) for j in range(n)] for gi in ga]
        g_y_asts = [[exprlang.differentiate(gi, "y", j) for j in range(m)] for gi in ga]
        g_e_asts = [exprlang.differentiate(gi, "eps") for gi in ga]

        def mat_eval(rows):
            def call(x, y, eps_):
                env = exprlang.EvalEnv.of(x, y, eps_)
                return np.array([[exprlang.evaluate(a, env) for a in row] for row in rows])
            return call

        jac = Jacobians(
            h_x=vec_eval(h_x_asts),
            h_y=vec_eval(h_y_asts),
            h_eps=scalar_eval(h_e_ast),
            g_x=mat_eval(g_x_asts),
            g_y=mat_eval(g_y_asts),
            g_eps=vec_eval(g_e_asts),
        )
        return cls(n, m, float(eps), vec_eval(fp), vec_eval(fm), vec_eval(ga),
                   scalar_eval(ha), jac, domain or Domain.box(n, m))

    @classmethod
    def from_affine(cls, eps, f_plus0, f_minus0, g_x0, g_y0, h_x0, h_y0,
                    h_eps0=0.0, g_eps0=None, domain=None) -> "FullSystemSpec":
        """Affine full system: g = g_x x + g_y y + g_eps eps, h likewise."""
        f_plus0 = np.atleast_1d(np.asarray(f_plus0, dtype=float))
        f_minus0 = np.atleast_1d(np.asarray(f_minus0, dtype=float))
        g_x0 = np.atleast_2d(np.asarray(g_x0, dtype=float))
        g_y0 = np.atleast_2d(np.asarray(g_y0, dtype=float))
        h_x0 = np.atleast_1d(np.asarray(h_x0, dtype=float))
        h_y0 = np.atleast_1d(np.asarray(h_y0, dtype=float))
        m, n = g_x0.shape
        g_eps0 = np.zeros(m) if g_eps0 is None else _vec(g_eps0, m, "g_eps0")
        h_eps0 = float(h_eps0)

        jac = Jacobians(
            h_x=lambda x, y, e: h_x0.copy(),
            h_y=lambda x, y, e: h_y0.copy(),
            h_eps=lambda x, y, e: h_eps0,
            g_x=lambda x, y, e: g_x0.copy(),
            g_y=lambda x, y, e: g_y0.copy(),
            g_eps=lambda x, y, e: g_eps0.copy(),
        )
        return cls(
            n, m, float(eps),
            f_plus=lambda x, y, e: f_plus0.copy(),
            f_minus=lambda x, y, e: f_minus0.copy(),
            g=lambda x, y, e: g_x0 @ np.asarray(x, dtype=float) + g_y0 @ np.asarray(y, dtype=float) + g_eps0 * e,
            h=lambda x, y, e: float(h_x0 @ np.asarray(x, dtype=float) + h_y0 @ np.asarray(y, dtype=float) + h_eps0 * e),
            jacobians=jac,
            domain=domain or Domain.box(n, m),
        )


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    messages: tuple


def validate_spec(spec: FullSystemSpec) -> ValidationResult:
    """Check dimensions of all evaluator outputs and Jacobians.

    Raises DimensionMismatch on shape violations and ConfigError for
    invalid scalar parameters; returns a summary on success.
    """
    if spec.n < 1 or spec.m < 1:
        raise ConfigError("dimensions must satisfy n >= 1 and m >= 1")
    if not spec.eps > 0:
        raise ConfigError("eps must be positive")

    checks = [
        ("f_plus", spec.f_plus, (spec.n,)),
        ("f_minus", spec.f_minus, (spec.n,)),
        ("g", spec.g, (spec.m,)),
        ("jacobians.h_x", spec.jacobians.h_x, (spec.n,)),
        ("jacobians.h_y", spec.jacobians.h_y, (spec.m,)),
        ("jacobians.g_x", spec.jacobians.g_x, (spec.m, spec.n)),
        ("jacobians.g_y", spec.jacobians.g_y, (spec.m, spec.m)),
        ("jacobians.g_eps", spec.jacobians.g_eps, (spec.m,)),
    ]
    messages = []
    for x, y in spec.domain.sample_points():
        for name, fn, expected in checks:
            got = np.asarray(fn(x, y, spec.eps))
            if got.shape != expected:
                raise DimensionMismatch(name, expected, got.shape)
        for name, fn in (("h", spec.h), ("jacobians.h_eps", spec.jacobians.h_eps)):
            got = np.asarray(fn(x, y, spec.eps))
            if got.shape not in ((), (1,)):
                raise DimensionMismatch(name, "scalar", got.shape)
    messages.append(f"evaluators verified at {len(spec.domain.sample_points())} domain points")
    return ValidationResult(True, tuple(messages))


def _solve_gy(g_y0: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve g_y0 @ out = rhs, guarding against near-singular g_y0."""
    rcond = 1.0 / np.linalg.cond(g_y0)
    if not np.isfinite(rcond) or rcond < GY_RCOND_MIN:
        raise SingularGy(float(rcond) if np.isfinite(rcond) else 0.0)
    return np.linalg.solve(g_y0, rhs)


@dataclass(frozen=True)
class NormalFormCoeffs:
    """Affine data of the truncated system at an expansion point.

    Matrices are stored with numpy conventions: row vectors h_x0, h_y0,
    h_rd_x0 are 1-d arrays of length n or m.  Derived fields satisfy
    h_rd_x0 = h_x0 - h_y0 [g_y0]^-1 g_x0,  y_sl_pm = [g_y0]^-1 g_x0 f_pm0,
    T_pm = h_x0 f_pm0,  S_pm = h_y0 y_sl_pm.
    """
    f_plus0: np.ndarray
    f_minus0: np.ndarray
    g_x0: np.ndarray
    g_y0: np.ndarray
    h_x0: np.ndarray
    h_y0: np.ndarray
    h_rd_x0: np.ndarray
    gyinv_gx: np.ndarray      # [g_y0]^-1 g_x0, shape (m, n)
    hy_gyinv: np.ndarray      # h_y0 [g_y0]^-1, shape (m,)
    y_sl_plus: np.ndarray
    y_sl_minus: np.ndarray
    T_plus: float
    T_minus: float
    S_plus: float
    S_minus: float
    delta_x: np.ndarray
    delta_y: np.ndarray
    delta_h: float
    expansion_point: tuple = field(default=None)

    @property
    def n(self) -> int:
        return self.f_plus0.shape[0]

    @property
    def m(self) -> int:
        return self.g_y0.shape[0]

    @property
    def a(self) -> float:
        """For m = 1: the decay rate a with g_y0 = -a, a > 0."""
        if self.m != 1:
            raise ValueError("a is defined only for one-dimensional fast dynamics")
        return -float(self.g_y0[0, 0])

    def f0(self, sign: int) -> np.ndarray:
        return self.f_plus0 if sign > 0 else self.f_minus0

    def y_sl(self, sign: int) -> np.ndarray:
        return self.y_sl_plus if sign > 0 else self.y_sl_minus

    def T(self, sign: int) -> float:
        return self.T_plus if sign > 0 else self.T_minus

    def S(self, sign: int) -> float:
        return self.S_plus if sign > 0 else self.S_minus

    def beta(self, sign: int) -> float:
        """h_rd_x0 . f_sign0 = T_sign - S_sign."""
        return self.T(sign) - self.S(sign)

    @property
    def ts_scale(self) -> float:
        return max(abs(self.T_plus), abs(self.T_minus), abs(self.S_plus), abs(self.S_minus), 1.0)

    @classmethod
    def from_matrices(cls, f_plus0, f_minus0, g_x0, g_y0, h_y0,
                      h_x0=None, h_rd_x0=None, h_eps0=0.0, g_eps0=None,
                      expansion_point=None) -> "NormalFormCoeffs":
        """Assemble coefficients from raw matrices.

        Exactly one of ``h_x0`` / ``h_rd_x0`` must be given; the other is
        derived through h_rd_x0 = h_x0 - h_y0 [g_y0]^-1 g_x0.
        """
        g_x0 = np.atleast_2d(np.asarray(g_x0, dtype=float))
        g_y0 = np.atleast_2d(np.asarray(g_y0, dtype=float))
        m, n = g_x0.shape
        if g_y0.shape != (m, m):
            raise DimensionMismatch("g_y0", (m, m), g_y0.shape)
        f_plus0 = _vec(f_plus0, n, "f_plus0")
        f_minus0 = _vec(f_minus0, n, "f_minus0")
        h_y0 = _vec(h_y0, m, "h_y0")

        gyinv_gx = _solve_gy(g_y0, g_x0)
        hy_gyinv = np.linalg.solve(g_y0.T, h_y0)

        if (h_x0 is None) == (h_rd_x0 is None):
            raise ConfigError("give exactly one of h_x0 and h_rd_x0")
        if h_x0 is not None:
            h_x0 = _vec(h_x0, n, "h_x0")
            h_rd_x0 = h_x0 - hy_gyinv @ g_x0
        else:
            h_rd_x0 = _vec(h_rd_x0, n, "h_rd_x0")
            h_x0 = h_rd_x0 + hy_gyinv @ g_x0

        y_sl_plus = gyinv_gx @ f_plus0
        y_sl_minus = gyinv_gx @ f_minus0
        T_plus = float(h_x0 @ f_plus0)
        T_minus = float(h_x0 @ f_minus0)
        S_plus = float(h_y0 @ y_sl_plus)
        S_minus = float(h_y0 @ y_sl_minus)

        g_eps0 = np.zeros(m) if g_eps0 is None else _vec(g_eps0, m, "g_eps0")
        h_eps0 = float(h_eps0)
        nrm2 = float(h_rd_x0 @ h_rd_x0)
        if nrm2 == 0.0:
            raise AssumptionViolated("transversality fails: h_rd_x0 = 0")
        delta_h = (float(hy_gyinv @ g_eps0) - h_eps0) / nrm2
        delta_x = delta_h * h_rd_x0
        delta_y = -_solve_gy(g_y0, g_x0 @ delta_x + g_eps0)

        return cls(
            f_plus0=f_plus0, f_minus0=f_minus0, g_x0=g_x0, g_y0=g_y0,
            h_x0=h_x0, h_y0=h_y0, h_rd_x0=h_rd_x0,
            gyinv_gx=gyinv_gx, hy_gyinv=hy_gyinv,
            y_sl_plus=y_sl_plus, y_sl_minus=y_sl_minus,
            T_plus=T_plus, T_minus=T_minus, S_plus=S_plus, S_minus=S_minus,
            delta_x=delta_x, delta_y=delta_y, delta_h=float(delta_h),
            expansion_point=expansion_point,
        )

    def relabeled(self) -> "NormalFormCoeffs":
        """Interchange the two vector fields (and flip h to keep conventions)."""
        return NormalFormCoeffs.from_matrices(
            f_plus0=self.f_minus0, f_minus0=self.f_plus0,
            g_x0=self.g_x0, g_y0=self.g_y0,
            h_x0=-self.h_x0, h_y0=-self.h_y0,
            expansion_point=self.expansion_point,
        )

    def to_dict(self) -> dict:
        return {
            "f_plus0": self.f_plus0.tolist(),
            "f_minus0": self.f_minus0.tolist(),
            "g_x0": self.g_x0.tolist(),
            "g_y0": self.g_y0.tolist(),
            "h_x0": self.h_x0.tolist(),
            "h_y0": self.h_y0.tolist(),
            "h_rd_x0": self.h_rd_x0.tolist(),
            "y_sl_plus": self.y_sl_plus.tolist(),
            "y_sl_minus": self.y_sl_minus.tolist(),
            "T_plus": self.T_plus, "T_minus": self.T_minus,
            "S_plus": self.S_plus, "S_minus": self.S_minus,
            "delta_x": self.delta_x.tolist(),
            "delta_y": self.delta_y.tolist(),
            "delta_h": self.delta_h,
        }


@dataclass(frozen=True)
class AssumptionReport:
    spectral_abscissa: float
    c_stab_margin: float
    attracting_sliding: bool
    transversal: bool
    generic_full: bool
    messages: tuple

    @property
    def all_ok(self) -> bool:
        return (self.c_stab_margin > 0) and self.attracting_sliding and self.transversal

    def to_dict(self) -> dict:
        return {
            "spectral_abscissa": self.spectral_abscissa,
            "c_stab_margin": self.c_stab_margin,
            "attracting_sliding": self.attracting_sliding,
            "transversal": self.transversal,
            "generic_full": self.generic_full,
            "all_ok": self.all_ok,
            "messages": list(self.messages),
        }


def check_assumptions(coeffs: NormalFormCoeffs, c_stab: float = DEFAULT_C_STAB) -> AssumptionReport:
    """Evaluate the three standing assumptions at the expansion point.

    Assumption 1: spectrum of g_y0 left of -c_stab.  Assumption 2:
    attracting sliding of the reduced system, equivalent to T_+ < S_+ and
    S_- < T_-.  Assumption 3 (here): transversality h_rd_x0 != 0.  The
    genericity condition h_x0 (f_+0 - f_-0) != 0 of the full system is
    reported separately since it may fail while the rest holds.
    """
    rcond = 1.0 / np.linalg.cond(coeffs.g_y0)
    if not np.isfinite(rcond) or rcond < GY_RCOND_MIN:
        raise SingularGy(float(rcond) if np.isfinite(rcond) else 0.0)

    abscissa = float(np.max(np.real(np.linalg.eigvals(coeffs.g_y0))))
    margin = -abscissa - c_stab
    attracting = (coeffs.T_plus < coeffs.S_plus) and (coeffs.S_minus < coeffs.T_minus)
    scale = coeffs.ts_scale
    transversal = float(np.linalg.norm(coeffs.h_rd_x0)) > 1e-12 * scale
    generic = abs(coeffs.T_plus - coeffs.T_minus) > 1e-12 * scale

    messages = []
    if margin <= 0:
        messages.append(
            f"Assumption 1 violated: spectral abscissa {abscissa:.6g} not below -c_stab = {-c_stab:.1e}")
    if not attracting:
        messages.append(
            "Assumption 2 violated: reduced sliding not attracting "
            f"(T+ = {coeffs.T_plus:.6g}, S+ = {coeffs.S_plus:.6g}, "
            f"S- = {coeffs.S_minus:.6g}, T- = {coeffs.T_minus:.6g})")
    if not transversal:
        messages.append("Assumption 3 violated: h_rd_x0 vanishes (no transversal intersection)")
    if not generic:
        messages.append(
            "genericity h_x0 (f_+0 - f_-0) != 0 fails: tangency levels T+ and T- coincide")
    if not messages:
        messages.append("all assumptions hold")
    return AssumptionReport(abscissa, margin, attracting, transversal, generic, tuple(messages))
