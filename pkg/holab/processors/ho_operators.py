"""Pointwise coefficients of the Heckman-Opdam operators and their finite-difference application.

Conventions: the simulated process has generator ``L / 2``, so the drift is
``b(x) = 1/2 sum_a k_a coth(<a,x>/2) a`` and the jump intensity across the
wall of ``a`` is ``c_a(x) / 2`` with ``c_a(x) = k_a |a|^2 / (4 sinh^2(<a,x>/2))``.
Every sum runs over the positive roots.

Finite differences use central stencils for the derivative parts. Reflection
differences ``f(x) - f(r_a x)`` are evaluated at the exact reflected point.
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, List, Optional, Sequence
import math

import numpy as np

from holab.processors.rootsys import (
    RootSystem,
    MultiplicityFunction,
    multiplicity,
)
from holab.tools.logging_ import (
    HoOperatorsLogger,
    log_decorator,
    log_and_raise_error,
    assert_and_log_error,
)
from holab.validation.data_types import (
    FieldCallable,
    Multiplicities,
    VectorLike,
    as_vector,
    assert_and_log_positive,
)

logger = HoOperatorsLogger().setup()

DEFAULT_FD_STEP = 1e-3
_WALL_TOLERANCE = 1e-12


class ScalarField:
    """A deterministic real function on the ambient space of a root system.

    Args:
        evaluation: Maps a 1-d array to a real number.
        smoothness_hint: Advisory number of continuous derivatives.
        name: Label used in reports.
        vectorized: Optional map from an (m, n) array of points to m values,
            used by :meth:`evaluate_many` instead of a python loop.

    """

    def __init__(
        self,
        evaluation: FieldCallable,
        smoothness_hint: int = 2,
        name: str = "f",
        vectorized: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    ):
        assert_and_log_error(
            logger,
            "error",
            callable(evaluation),
            f"ScalarField evaluation must be callable, got {type(evaluation)}",
        )
        self.evaluation = evaluation
        self.smoothness_hint = smoothness_hint
        self.name = name
        self.vectorized = vectorized

    def __call__(self, x: np.ndarray) -> float:
        return float(self.evaluation(np.asarray(x, dtype=float)))

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        """Values at the rows of ``points``."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if self.vectorized is not None:
            return np.asarray(self.vectorized(points), dtype=float).reshape(-1)
        return np.array([self(p) for p in points], dtype=float)

    def __repr__(self) -> str:
        return f"ScalarField(name={self.name!r}, smoothness_hint={self.smoothness_hint})"


def constant_field(value: float = 1.0) -> ScalarField:
    """The constant function, smooth of every order."""
    return ScalarField(
        lambda x: value,
        smoothness_hint=1_000,
        name=f"const({value:g})",
        vectorized=lambda points: np.full(points.shape[0], value),
    )


@dataclass(frozen=True)
class JumpCoefficient:
    """``c_a`` for one positive root, ``value_at(x) = k_a |a|^2 / (4 sinh^2(<a,x>/2))``."""

    root: int
    value_at: Callable[[np.ndarray], float] = field(repr=False)


@dataclass(frozen=True, eq=False)
class HoCoefficients:
    """Positive roots, multiplicities and norms packed for fast per-step evaluation.

    Methods here assume a regular point and do no validation; the public
    functions of this module validate before delegating.
    """

    R: RootSystem
    k: MultiplicityFunction

    @cached_property
    def positive_roots(self) -> np.ndarray:
        return self.R.positive_roots

    @cached_property
    def k_values(self) -> np.ndarray:
        return self.k.per_positive_root

    @cached_property
    def squared_norms(self) -> np.ndarray:
        return self.R.squared_norms[: self.R.n_positive]

    @cached_property
    def root_norms(self) -> np.ndarray:
        return np.sqrt(self.squared_norms)

    @cached_property
    def rho(self) -> np.ndarray:
        return 0.5 * (self.k_values @ self.positive_roots)

    @cached_property
    def reflection_matrices(self) -> np.ndarray:
        return self.R.reflection_matrices

    def margins(self, x: np.ndarray) -> np.ndarray:
        return x @ self.positive_roots.T

    def wall_distance(self, x: np.ndarray) -> float:
        return float(np.min(np.abs(self.margins(x)) / self.root_norms))

    def drift(self, x: np.ndarray) -> np.ndarray:
        margins = self.margins(x)
        return 0.5 * ((self.k_values / np.tanh(0.5 * margins)) @ self.positive_roots)

    def full_coefficients(self, x: np.ndarray) -> np.ndarray:
        """``c_a(x)`` for every positive root."""
        # capped so sinh stays finite
        half = np.minimum(0.5 * np.abs(self.margins(x)), 700.0)
        return self.k_values * self.squared_norms / (4.0 * np.sinh(half) ** 2)

    def rates(self, x: np.ndarray) -> np.ndarray:
        """Jump intensities ``c_a(x) / 2``."""
        return 0.5 * self.full_coefficients(x)

    def reflect(self, root: int, x: np.ndarray) -> np.ndarray:
        return self.reflection_matrices[root] @ x


def coefficients(R: RootSystem, k: Multiplicities) -> HoCoefficients:
    """Bundle ``R`` and ``k`` for the per-step hot loops."""
    return HoCoefficients(R=R, k=multiplicity(R, k))


def _require_regular(coeffs: HoCoefficients, x: VectorLike, caller: str) -> np.ndarray:
    x = as_vector(x, "x", coeffs.R.rank)
    margins = coeffs.margins(x)
    tolerance = _WALL_TOLERANCE * (1.0 + float(np.linalg.norm(x)))
    on_wall = np.flatnonzero(np.abs(margins) <= tolerance)
    if on_wall.size:
        log_and_raise_error(
            logger,
            "error",
            ValueError,
            f"{caller}: x = {x.tolist()} lies on the wall of positive root(s) {on_wall.tolist()}, singular input",
        )
    return x


def drift(R: RootSystem, k: Multiplicities, x: VectorLike) -> np.ndarray:
    """Drift ``1/2 sum_a k_a coth(<a,x>/2) a`` of the radial diffusion at a regular point.

    Raises:
        ValueError: If ``x`` lies on a wall.

    """
    coeffs = coefficients(R, k)
    x = _require_regular(coeffs, x, "drift")
    return coeffs.drift(x)


def jump_rate(R: RootSystem, k: Multiplicities, root: int, x: VectorLike) -> float:
    """Intensity ``k_a |a|^2 / (8 sinh^2(<a,x>/2))`` of the jump ``x -> r_a x``.

    Args:
        R: Root system.
        k: Multiplicities.
        root: Index into ``R.roots``; a negative root gives the same rate as its positive.
        x: Regular point.

    Raises:
        ValueError: If ``<a, x> == 0``.

    """
    coeffs = coefficients(R, k)
    index = R.positive_index(root)
    x = as_vector(x, "x", R.rank)
    margin = float(coeffs.positive_roots[index] @ x)
    if abs(margin) <= _WALL_TOLERANCE * (1.0 + float(np.linalg.norm(x))):
        log_and_raise_error(
            logger,
            "error",
            ValueError,
            f"jump_rate: x = {x.tolist()} lies on the wall of root {index}, singular input",
        )
    return float(
        coeffs.k_values[index]
        * coeffs.squared_norms[index]
        / (8.0 * float(np.sinh(0.5 * margin)) ** 2)
    )


def jump_rates(R: RootSystem, k: Multiplicities, x: VectorLike) -> np.ndarray:
    """Jump intensities for all positive roots at a regular point."""
    coeffs = coefficients(R, k)
    x = _require_regular(coeffs, x, "jump_rates")
    return coeffs.rates(x)


def total_jump_rate(R: RootSystem, k: Multiplicities, x: VectorLike) -> float:
    """Sum of the jump intensities, the residual intensity of a trajectory at ``x``."""
    return float(np.sum(jump_rates(R, k, x)))


def jump_coefficients(R: RootSystem, k: Multiplicities) -> List[JumpCoefficient]:
    """One :class:`JumpCoefficient` per positive root."""
    coeffs = coefficients(R, k)

    def _value_at(root: int) -> Callable[[np.ndarray], float]:
        def value(x: np.ndarray) -> float:
            margin = float(coeffs.positive_roots[root] @ np.asarray(x, dtype=float))
            return float(
                coeffs.k_values[root]
                * coeffs.squared_norms[root]
                / (4.0 * float(np.sinh(0.5 * margin)) ** 2)
            )

        return value

    return [JumpCoefficient(root=i, value_at=_value_at(i)) for i in range(R.n_positive)]


# ---FINITE DIFFERENCES---
def _euclidean_laplacian(f: ScalarField, x: np.ndarray, h: float) -> float:
    centre = f(x)
    total = 0.0
    for i in range(x.shape[0]):
        step = np.zeros_like(x)
        step[i] = h
        total += f(x + step) - 2.0 * centre + f(x - step)
    return total / h**2


def _directional(f: ScalarField, x: np.ndarray, direction: np.ndarray, h: float) -> float:
    return (f(x + h * direction) - f(x - h * direction)) / (2.0 * h)


def _laplacian(
    coeffs: HoCoefficients, f: ScalarField, x: np.ndarray, h: float, with_reflections: bool
) -> float:
    margins = coeffs.margins(x)
    value = _euclidean_laplacian(f, x, h)
    coth = 1.0 / np.tanh(0.5 * margins)
    for i, root in enumerate(coeffs.positive_roots):
        value += coeffs.k_values[i] * coth[i] * _directional(f, x, root, h)
    if with_reflections:
        centre = f(x)
        c = coeffs.full_coefficients(x)
        for i in range(coeffs.R.n_positive):
            value -= c[i] * (centre - f(coeffs.reflect(i, x)))
    return float(value)


def _richardson(evaluate: Callable[[float], float], h: float) -> float:
    return (4.0 * evaluate(0.5 * h) - evaluate(h)) / 3.0


@log_decorator(logger)
def apply_laplacian_fd(
    R: RootSystem,
    k: Multiplicities,
    f: ScalarField,
    x: VectorLike,
    h: float = DEFAULT_FD_STEP,
    richardson: bool = False,
) -> float:
    """Finite-difference value of the Heckman-Opdam Laplacian applied to ``f`` at ``x``.

    ``Lf = Δf + sum_a k_a coth(<a,x>/2) d_a f - sum_a c_a(x) (f(x) - f(r_a x))``
    with a second-order stencil per coordinate for Δ, central differences for
    ``d_a`` and exact reflections. The error is O(h^2) for C^4 functions, or
    O(h^4) when ``richardson`` combines the steps h and h/2.

    Raises:
        ValueError: If ``x`` lies on a wall or ``h`` is not positive.

    """
    coeffs = coefficients(R, k)
    x = _require_regular(coeffs, x, "apply_laplacian_fd")
    _check_step(h)
    evaluate = lambda step: _laplacian(coeffs, f, x, step, with_reflections=True)  # noqa: E731
    return _richardson(evaluate, h) if richardson else evaluate(h)


@log_decorator(logger)
def apply_radial_laplacian_fd(
    R: RootSystem,
    k: Multiplicities,
    f: ScalarField,
    x: VectorLike,
    h: float = DEFAULT_FD_STEP,
    richardson: bool = False,
) -> float:
    """Finite-difference ``Δf + sum_a k_a coth(<a,x>/2) d_a f``, the operator on W-invariant functions."""
    coeffs = coefficients(R, k)
    x = _require_regular(coeffs, x, "apply_radial_laplacian_fd")
    _check_step(h)
    evaluate = lambda step: _laplacian(coeffs, f, x, step, with_reflections=False)  # noqa: E731
    return _richardson(evaluate, h) if richardson else evaluate(h)


def _check_step(h: float):
    if not (isinstance(h, (int, float)) and math.isfinite(h) and h > 0):
        log_and_raise_error(logger, "error", ValueError, f"step h = {h} must be > 0")


def _cherednik(
    coeffs: HoCoefficients, xi: np.ndarray, f: ScalarField, x: np.ndarray, h: float
) -> float:
    margins = coeffs.margins(x)
    centre = f(x)
    value = _directional(f, x, xi, h) - float(coeffs.rho @ xi) * centre
    # 1 - exp(-m) without cancellation for small m
    denominators = -np.expm1(-margins)
    weights = coeffs.k_values * (coeffs.positive_roots @ xi) / denominators
    for i in range(coeffs.R.n_positive):
        if weights[i] != 0.0:
            value += weights[i] * (centre - f(coeffs.reflect(i, x)))
    return float(value)


@log_decorator(logger)
def apply_cherednik_fd(
    R: RootSystem,
    k: Multiplicities,
    xi: VectorLike,
    f: ScalarField,
    x: VectorLike,
    h: float = DEFAULT_FD_STEP,
) -> float:
    """Finite-difference Dunkl-Cherednik operator ``T_xi f(x)``.

    ``T_xi f = d_xi f + sum_a k_a <a,xi> / (1 - exp(-<a,x>)) (f(x) - f(r_a x)) - <rho,xi> f``

    Raises:
        ValueError: If ``x`` lies on a wall or ``h`` is not positive.

    """
    coeffs = coefficients(R, k)
    x = _require_regular(coeffs, x, "apply_cherednik_fd")
    xi = as_vector(xi, "xi", R.rank)
    _check_step(h)
    return _cherednik(coeffs, xi, f, x, h)


def _cherednik_field(
    coeffs: HoCoefficients, xi: np.ndarray, f: ScalarField, h: float
) -> ScalarField:
    return ScalarField(
        lambda y: _cherednik(coeffs, xi, f, y, h),
        smoothness_hint=max(f.smoothness_hint - 1, 0),
        name=f"T({f.name})",
    )


@log_decorator(logger)
def cherednik_square_sum_fd(
    R: RootSystem,
    k: Multiplicities,
    f: ScalarField,
    x: VectorLike,
    h: float = DEFAULT_FD_STEP,
    basis: Optional[Sequence[VectorLike]] = None,
) -> float:
    """``sum_i T_i(T_i f)(x) - |rho|^2 f(x)`` over an orthonormal basis, by nested differences.

    The result agrees with :func:`apply_laplacian_fd` up to O(h^2).
    """
    coeffs = coefficients(R, k)
    x = _require_regular(coeffs, x, "cherednik_square_sum_fd")
    _check_step(h)
    vectors = np.eye(R.rank) if basis is None else np.atleast_2d(np.asarray(basis, dtype=float))
    assert_and_log_error(
        logger,
        "error",
        vectors.shape == (R.rank, R.rank)
        and np.allclose(vectors @ vectors.T, np.eye(R.rank), atol=1e-10),
        "basis must be orthonormal with one vector per dimension",
    )
    total = 0.0
    for xi in vectors:
        inner = _cherednik_field(coeffs, xi, f, h)
        total += _cherednik(coeffs, xi, inner, x, h)
    return float(total - float(coeffs.rho @ coeffs.rho) * f(x))


@log_decorator(logger)
def cherednik_commutator_fd(
    R: RootSystem,
    k: Multiplicities,
    xi: VectorLike,
    eta: VectorLike,
    f: ScalarField,
    x: VectorLike,
    h: float = DEFAULT_FD_STEP,
) -> float:
    """``T_xi T_eta f(x) - T_eta T_xi f(x)``; the operators commute so this is O(h^2)."""
    coeffs = coefficients(R, k)
    x = _require_regular(coeffs, x, "cherednik_commutator_fd")
    xi = as_vector(xi, "xi", R.rank)
    eta = as_vector(eta, "eta", R.rank)
    _check_step(h)
    first = _cherednik(coeffs, xi, _cherednik_field(coeffs, eta, f, h), x, h)
    second = _cherednik(coeffs, eta, _cherednik_field(coeffs, xi, f, h), x, h)
    return float(first - second)


def observed_order(residual_h: float, residual_half_h: float) -> float:
    """Convergence order estimated from residuals at steps h and h/2."""
    assert_and_log_positive(abs(residual_half_h), "residual_half_h")
    return float(math.log2(abs(residual_h) / abs(residual_half_h)))

