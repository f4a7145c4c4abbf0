"""Rank-one hypergeometric oracle for the eigenfunctions F_lambda and G_lambda.

With root length ``alpha``, multiplicity ``k`` and ``rho = k alpha / 2``:

* ``F`` is the even solution of ``F'' + k alpha coth(alpha x / 2) F' = (lambda^2 - rho^2) F``
  with ``F(0) = 1``.
* ``G = E + O`` (even plus odd part) solves the first-order system
  ``E' = (lambda - rho) O`` and ``O' = (lambda + rho) E - 2 rho coth(alpha x / 2) O``
  with ``E(0) = 1`` and ``O(0) = 0``, the rank-one eigen-equation of the
  Cherednik operator.

Both have a regular singular point at 0. The solutions are started from their
power series on ``|x| <= x0`` and continued by DOP853 integration beyond it.
Negative arguments use the parity of the parts.
"""

from functools import lru_cache
from typing import Dict, Iterable, Tuple, Union
import math

import numpy as np
import pandas as pd
from scipy.integrate import solve_ivp
from scipy.special import bernoulli, hyp2f1

from holab.processors.ho_operators import ScalarField
from holab.tools.logging_ import (
    HypergeometricLogger,
    log_decorator,
    log_and_raise_error,
)
from holab.validation.validators import Rank1Params

logger = HypergeometricLogger().setup()

SERIES_RADIUS = 0.1
SERIES_TERMS = 30
ODE_RTOL = 1e-10
ODE_ATOL = 1e-12
_RANGE_STEP = 10.0

SpectralParameter = Union[float, complex]


def coth_series_coefficients(alpha: float, n_terms: int) -> np.ndarray:
    """``c_m`` with ``coth(alpha x / 2) = sum_m c_m x^(2m-1)`` for ``|x| < 2 pi / alpha``."""
    b = bernoulli(2 * n_terms)
    m = np.arange(n_terms)
    factorials = np.array([math.factorial(2 * i) for i in m], dtype=float)
    return (2.0 / alpha) * b[2 * m] * alpha ** (2 * m) / factorials


def _spectral_mu(lam: SpectralParameter, rho: float) -> float:
    """``lambda^2 - rho^2``, real for real or purely imaginary lambda."""
    if isinstance(lam, complex) or np.iscomplexobj(lam):
        lam = complex(lam)
        if lam.real != 0.0:
            log_and_raise_error(
                logger,
                "error",
                ValueError,
                f"lambda = {lam} must be real or purely imaginary",
            )
        return -lam.imag**2 - rho**2
    return float(lam) ** 2 - rho**2


def g_series_coefficients(
    p: Rank1Params, lam: float, n_terms: int = SERIES_TERMS
) -> Tuple[np.ndarray, np.ndarray]:
    """Taylor coefficients ``E = sum e_n x^(2n)`` and ``O = sum o_n x^(2n+1)`` of G_lambda."""
    c = coth_series_coefficients(p.alpha, n_terms)
    rho = p.rho
    e = np.zeros(n_terms)
    o = np.zeros(n_terms)
    e[0] = 1.0
    for n in range(n_terms):
        if n > 0:
            e[n] = (lam - rho) * o[n - 1] / (2 * n)
        tail = sum(c[m] * o[n - m] for m in range(1, n + 1))
        o[n] = ((lam + rho) * e[n] - 2.0 * rho * tail) / (2 * n + 1 + 2 * p.k)
    return e, o


def f_series_coefficients(
    p: Rank1Params, lam: SpectralParameter, n_terms: int = SERIES_TERMS
) -> np.ndarray:
    """Taylor coefficients ``F = sum f_n x^(2n)`` of F_lambda."""
    c = coth_series_coefficients(p.alpha, n_terms)
    mu = _spectral_mu(lam, p.rho)
    f = np.zeros(n_terms)
    f[0] = 1.0
    for n in range(1, n_terms):
        tail = sum(c[m] * 2 * (n - m) * f[n - m] for m in range(1, n))
        f[n] = (mu * f[n - 1] - p.k * p.alpha * tail) / (2 * n * (2 * n - 1 + 2 * p.k))
    return f


def _even_series(coefficients: np.ndarray, x: np.ndarray) -> np.ndarray:
    return np.polynomial.polynomial.polyval(x**2, coefficients)


def _even_series_derivative(coefficients: np.ndarray, x: np.ndarray) -> np.ndarray:
    n = np.arange(1, len(coefficients))
    return x * np.polynomial.polynomial.polyval(x**2, 2 * n * coefficients[1:])


class Rank1Oracle:
    """F, G, E and O for one ``(alpha, k, lambda)`` on ``[-x_max, x_max]``.

    G and its parts need a real lambda. A purely imaginary lambda gives F only.

    Raises:
        ArithmeticError: If the series start does not reach the requested tolerance
            or the integrator fails.

    """

    def __init__(
        self,
        p: Rank1Params,
        lam: SpectralParameter,
        x_max: float = _RANGE_STEP,
        x0: float = SERIES_RADIUS,
        n_terms: int = SERIES_TERMS,
        rtol: float = ODE_RTOL,
        atol: float = ODE_ATOL,
    ):
        self.p = p
        self.lam = lam
        self.mu = _spectral_mu(lam, p.rho)
        self.has_g = not (isinstance(lam, complex) or np.iscomplexobj(lam))
        self.x0 = x0
        self.x_max = max(float(x_max), x0)
        self.n_terms = n_terms
        self.rtol = rtol
        self.atol = atol

        self.f_coefficients = f_series_coefficients(p, lam, n_terms)
        self._check_series(self.f_coefficients, "F")
        self._f_solution = self._integrate_f()
        if self.has_g:
            self.e_coefficients, self.o_coefficients = g_series_coefficients(
                p, float(lam), n_terms
            )
            self._check_series(self.e_coefficients, "E")
            self._check_series(self.o_coefficients, "O")
            self._g_solution = self._integrate_g()

    def _check_series(self, coefficients: np.ndarray, label: str):
        half_argument = 0.5 * self.p.alpha * self.x0
        if half_argument >= math.pi:
            log_and_raise_error(
                logger,
                "error",
                ArithmeticError,
                f"series for {label} diverges: alpha * x0 / 2 = {half_argument:.4g} >= pi "
                f"(alpha = {self.p.alpha}, x0 = {self.x0})",
            )
        terms = np.abs(coefficients) * self.x0 ** (2 * np.arange(len(coefficients)))
        total = max(float(np.sum(terms)), 1.0)
        last = float(terms[-1])
        if not np.isfinite(last) or last > self.rtol * 1e-2 * total:
            log_and_raise_error(
                logger,
                "error",
                ArithmeticError,
                f"series for {label} not converged at x0 = {self.x0} with {self.n_terms} terms: "
                f"last term {last:.3e}, sum {total:.3e}, tolerance {self.rtol * 1e-2:.1e}",
            )

    def _coth(self, x: float) -> float:
        return 1.0 / math.tanh(0.5 * self.p.alpha * x)

    def _solve(self, rhs, start: np.ndarray, label: str):
        if self.x_max <= self.x0:
            return None
        solution = solve_ivp(
            rhs,
            (self.x0, self.x_max),
            start,
            method="DOP853",
            rtol=self.rtol,
            atol=self.atol,
            dense_output=True,
        )
        if not solution.success:
            log_and_raise_error(
                logger,
                "error",
                ArithmeticError,
                f"integration of {label} failed on [{self.x0}, {self.x_max}]: {solution.message}",
            )
        logger.debug(
            f" | Function | Rank1Oracle._solve() | Action | {label} | {solution.nfev} evaluations | lambda {self.lam}"
        )
        return solution.sol

    def _integrate_f(self):
        mu, ka = self.mu, self.p.k * self.p.alpha
        x0 = np.array([self.x0])
        start = np.array(
            [
                _even_series(self.f_coefficients, x0)[0],
                _even_series_derivative(self.f_coefficients, x0)[0],
            ]
        )

        def rhs(x, y):
            return [y[1], mu * y[0] - ka * self._coth(x) * y[1]]

        return self._solve(rhs, start, "F")

    def _integrate_g(self):
        lam, rho = float(self.lam), self.p.rho
        x0 = np.array([self.x0])
        start = np.array(
            [
                _even_series(self.e_coefficients, x0)[0],
                x0[0] * _even_series(self.o_coefficients, x0)[0],
            ]
        )

        def rhs(x, y):
            return [(lam - rho) * y[1], (lam + rho) * y[0] - 2.0 * rho * self._coth(x) * y[1]]

        return self._solve(rhs, start, "G")

    def _on_half_line(self, x: np.ndarray, series, solution, column: int) -> np.ndarray:
        values = np.empty_like(x)
        near = x <= self.x0
        values[near] = series(x[near])
        if np.any(~near):
            values[~near] = solution(x[~near])[column]
        return values

    def _check_range(self, x: np.ndarray):
        extent = float(np.max(np.abs(x))) if x.size else 0.0
        if extent > self.x_max * (1 + 1e-12):
            log_and_raise_error(
                logger,
                "error",
                ValueError,
                f"|x| = {extent} is outside the integrated range [0, {self.x_max}]",
            )

    def F(self, x) -> np.ndarray:
        x = np.abs(np.atleast_1d(np.asarray(x, dtype=float)))
        self._check_range(x)
        return self._on_half_line(
            x, lambda s: _even_series(self.f_coefficients, s), self._f_solution, 0
        )

    def components(self, x) -> Dict[str, np.ndarray]:
        """Arrays ``E``, ``O``, ``G = E + O`` and ``F`` at the given points."""
        if not self.has_g:
            log_and_raise_error(
                logger,
                "error",
                ValueError,
                f"G_lambda needs a real lambda, got {self.lam}",
            )
        x = np.atleast_1d(np.asarray(x, dtype=float))
        self._check_range(x)
        magnitude = np.abs(x)
        even = self._on_half_line(
            magnitude, lambda s: _even_series(self.e_coefficients, s), self._g_solution, 0
        )
        odd = np.sign(x) * self._on_half_line(
            magnitude,
            lambda s: s * _even_series(self.o_coefficients, s),
            self._g_solution,
            1,
        )
        return {"E": even, "O": odd, "G": even + odd, "F": self.F(x)}

    def G(self, x) -> np.ndarray:
        return self.components(x)["G"]


def _range_for(x: np.ndarray) -> float:
    extent = float(np.max(np.abs(x))) if np.size(x) else 0.0
    return max(_RANGE_STEP, _RANGE_STEP * math.ceil(extent / _RANGE_STEP))


@lru_cache(maxsize=64)
def oracle_for(alpha: float, k: float, lam: SpectralParameter, x_max: float) -> Rank1Oracle:
    """Cached oracle; callers pass ``x_max`` rounded up to a multiple of ten."""
    return Rank1Oracle(Rank1Params(alpha=alpha, k=k), lam, x_max=x_max)


def _oracle(p: Rank1Params, lam: SpectralParameter, x: np.ndarray) -> Rank1Oracle:
    if not (isinstance(lam, complex) or np.iscomplexobj(lam)):
        lam = float(lam)
    return oracle_for(float(p.alpha), float(p.k), lam, _range_for(x))


def _scalar_or_array(values: np.ndarray, x) -> Union[float, np.ndarray]:
    return float(values[0]) if np.ndim(x) == 0 else values


def rank1_F(p: Rank1Params, lam: SpectralParameter, x) -> Union[float, np.ndarray]:
    """F_lambda at a point or an array of points.

    Raises:
        ValueError: If lambda is neither real nor purely imaginary.
        ArithmeticError: On series non-convergence.

    """
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    return _scalar_or_array(_oracle(p, lam, xs).F(xs), x)


def rank1_G(p: Rank1Params, lam: float, x) -> Union[float, np.ndarray]:
    """G_lambda at a point or an array of points, lambda real.

    Raises:
        ArithmeticError: On series non-convergence.

    """
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    return _scalar_or_array(_oracle(p, lam, xs).G(xs), x)


@log_decorator(logger, suffix_message="Evaluate oracle on a grid")
def rank1_components(p: Rank1Params, lam: float, grid: Iterable[float]) -> pd.DataFrame:
    """Table with columns x, F, G, E, O."""
    xs = np.asarray(list(grid), dtype=float)
    parts = _oracle(p, lam, xs).components(xs)
    return pd.DataFrame(
        {"x": xs, "F": parts["F"], "G": parts["G"], "E": parts["E"], "O": parts["O"]}
    )


def parse_grid(text: str) -> np.ndarray:
    """``"a:b:n"`` to ``n`` evenly spaced points from a to b inclusive."""
    try:
        start, stop, count = text.split(":")
        points = np.linspace(float(start), float(stop), int(count))
    except ValueError as error:
        log_and_raise_error(
            logger, "error", ValueError, f"grid '{text}' is not of the form a:b:n ({error})"
        )
    if points.size < 1:
        log_and_raise_error(logger, "error", ValueError, f"grid '{text}' has no points")
    return points


def oracle_field(p: Rank1Params, lam: float, which: str = "G") -> ScalarField:
    """The oracle ``F`` or ``G`` as a :class:`ScalarField` on the line."""
    if which not in ("F", "G"):
        log_and_raise_error(logger, "error", ValueError, f"which must be 'F' or 'G', got '{which}'")
    evaluate = rank1_F if which == "F" else rank1_G

    def vectorized(points: np.ndarray) -> np.ndarray:
        return np.atleast_1d(evaluate(p, lam, points[:, 0]))

    return ScalarField(
        lambda x: evaluate(p, lam, float(np.ravel(x)[0])),
        smoothness_hint=1_000,
        name=f"{which}_{lam:g}",
        vectorized=vectorized,
    )


def rank1_F_closed_form(p: Rank1Params, lam: float, x) -> np.ndarray:
    """F_lambda through the Gauss function, ``2F1(a, b; k + 1/2; -sinh^2(alpha x / 2))``.

    ``a, b = (k +- 2 lambda / alpha) / 2``. Accurate for moderate ``|x|``, used to
    cross-check the integrated oracle.
    """
    shift = 2.0 * float(lam) / p.alpha
    z = -np.sinh(0.5 * p.alpha * np.asarray(x, dtype=float)) ** 2
    return hyp2f1(0.5 * (p.k + shift), 0.5 * (p.k - shift), p.k + 0.5, z)
