"""Root systems, multiplicity functions, Weyl groups and chamber decompositions.

Root systems are built in textbook coordinates for the classical families and
are immutable once constructed. Weyl group elements are identified by the
permutation they induce on the root list, so deduplication and composition
are exact integer operations; matrices are carried along for acting on points.

Example::

    R = build_root_system("B", 2)
    k = multiplicity(R, 1.0)
    rho(R, k)                      # array([1.5, 0.5])
    radial_decompose(R, [-1.0, 2.0]).radial   # array([2., 1.])

"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union
import json

import numpy as np

from holab.tools.logging_ import (
    RootsysLogger,
    log_decorator,
    log_and_raise_error,
    assert_and_log_error,
)
from holab.validation.data_types import Vector, VectorLike, Multiplicities, as_vector
from holab.validation.validators import check_multiplicity_value

logger = RootsysLogger().setup()

FAMILIES = ("A", "B", "C", "D", "BC", "rank1")
DEFAULT_WEYL_CAP = 100_000
RANK1_DEFAULT_ALPHA = 2.0

# Squared length of the shortest root in textbook coordinates
_SHORT_ROOT_SQUARED = {"A": 2.0, "B": 1.0, "C": 2.0, "D": 2.0, "BC": 1.0}


@dataclass(frozen=True, eq=False)
class WeylElement:
    """One element of the Weyl group.

    Attributes:
        word: Generator indices, the element is ``r_word[0] @ r_word[1] @ ...``.
        matrix: Orthogonal rank x rank matrix.
        root_permutation: ``matrix @ roots[i] == roots[root_permutation[i]]``.
        index: Position in the breadth-first enumeration of the group.

    """

    word: Tuple[int, ...]
    matrix: np.ndarray = field(repr=False)
    root_permutation: Tuple[int, ...] = field(repr=False)
    index: int = 0

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeylElement):
            return NotImplemented
        return self.root_permutation == other.root_permutation

    def __hash__(self) -> int:
        return hash(self.root_permutation)

    @property
    def is_identity(self) -> bool:
        return len(self.word) == 0

    @property
    def label(self) -> str:
        """'id' or the word as 's<i>s<j>...'."""
        if self.is_identity:
            return "id"
        return "".join(f"s{g}" for g in self.word)

    def act(self, x: np.ndarray) -> np.ndarray:
        """Apply the element to a point (or to the rows of an array of points)."""
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return self.matrix @ x
        return x @ self.matrix.T


@dataclass(frozen=True)
class ChamberDecomposition:
    """``x == angular.act(radial)`` with ``radial`` in the closed positive chamber."""

    radial: np.ndarray
    angular: WeylElement
    is_regular: bool


@dataclass(frozen=True, eq=False)
class RootSystem:
    """An integral root system with a fixed choice of positive roots.

    ``roots[:n_positive]`` are the positive roots and
    ``roots[n_positive + i] == -roots[i]``.
    """

    family: str
    rank: int
    normalization: Union[str, float]
    roots: np.ndarray = field(repr=False)
    n_positive: int
    weyl_cap: int = DEFAULT_WEYL_CAP

    @property
    def positive_roots(self) -> np.ndarray:
        return self.roots[: self.n_positive]

    @cached_property
    def squared_norms(self) -> np.ndarray:
        return np.einsum("ij,ij->i", self.roots, self.roots)

    @cached_property
    def coroots(self) -> np.ndarray:
        """``2 alpha / |alpha|^2`` for every root."""
        return 2.0 * self.roots / self.squared_norms[:, None]

    @cached_property
    def reflection_matrices(self) -> np.ndarray:
        """Matrices of ``r_alpha`` for the positive roots, shape (n_positive, rank, rank)."""
        eye = np.eye(self.rank)
        return np.stack(
            [eye - np.outer(a, c) for a, c in zip(self.positive_roots, self.coroots)]
        )

    def root_index(self, vector: VectorLike, tolerance: float = 1e-9) -> int:
        """Index of the root equal to ``vector``."""
        vector = np.asarray(vector, dtype=float)
        distances = np.linalg.norm(self.roots - vector, axis=1)
        index = int(np.argmin(distances))
        if distances[index] > tolerance * (1.0 + np.linalg.norm(vector)):
            log_and_raise_error(
                logger, "error", ValueError, f"{vector.tolist()} is not a root"
            )
        return index

    def positive_index(self, index: int) -> int:
        """Index of the positive root among ``±roots[index]``."""
        return index % self.n_positive

    @cached_property
    def generator_permutations(self) -> Tuple[Tuple[int, ...], ...]:
        """Root permutation of each positive-root reflection, found once by matching."""
        permutations = []
        for matrix in self.reflection_matrices:
            images = self.roots @ matrix.T
            permutations.append(tuple(self.root_index(image) for image in images))
        return tuple(permutations)

    @cached_property
    def weyl_group(self) -> Tuple[WeylElement, ...]:
        """All elements in breadth-first order, each with its shortlex-minimal word."""
        identity = WeylElement(
            word=(),
            matrix=np.eye(self.rank),
            root_permutation=tuple(range(len(self.roots))),
            index=0,
        )
        elements: List[WeylElement] = [identity]
        seen = {identity.root_permutation}
        head = 0
        while head < len(elements):
            parent = elements[head]
            head += 1
            for g, g_perm in enumerate(self.generator_permutations):
                permutation = tuple(parent.root_permutation[i] for i in g_perm)
                if permutation in seen:
                    continue
                seen.add(permutation)
                elements.append(
                    WeylElement(
                        word=parent.word + (g,),
                        matrix=parent.matrix @ self.reflection_matrices[g],
                        root_permutation=permutation,
                        index=len(elements),
                    )
                )
                if len(elements) > self.weyl_cap:
                    log_and_raise_error(
                        logger,
                        "error",
                        RuntimeError,
                        f"Weyl group of {self.family}{self.rank} exceeds the cap of {self.weyl_cap} elements",
                    )
        return tuple(elements)

    @cached_property
    def _element_lookup(self) -> Dict[Tuple[int, ...], WeylElement]:
        return {w.root_permutation: w for w in self.weyl_group}

    @cached_property
    def _stacked_transposes(self) -> np.ndarray:
        return np.stack([w.matrix.T for w in self.weyl_group])

    @property
    def identity(self) -> WeylElement:
        return self.weyl_group[0]

    def element(self, permutation: Sequence[int]) -> WeylElement:
        """The group element with the given root permutation."""
        return self._element_lookup[tuple(permutation)]

    def element_by_label(self, label: str) -> WeylElement:
        for w in self.weyl_group:
            if w.label == label:
                return w
        log_and_raise_error(
            logger, "error", ValueError, f"no Weyl element labelled '{label}'"
        )

    def compose(self, a: WeylElement, b: WeylElement) -> WeylElement:
        """The element ``a @ b``."""
        return self.element(tuple(a.root_permutation[i] for i in b.root_permutation))

    def inverse(self, a: WeylElement) -> WeylElement:
        inverse = [0] * len(a.root_permutation)
        for i, j in enumerate(a.root_permutation):
            inverse[j] = i
        return self.element(inverse)

    def right_reflect(self, w: WeylElement, positive_index: int) -> WeylElement:
        """``w @ r_gamma`` for the positive root with the given index."""
        g_perm = self.generator_permutations[positive_index]
        return self.element(tuple(w.root_permutation[i] for i in g_perm))

    def left_reflect(self, w: WeylElement, positive_index: int) -> WeylElement:
        """``r_alpha @ w`` for the positive root with the given index."""
        g_perm = self.generator_permutations[positive_index]
        return self.element(tuple(g_perm[i] for i in w.root_permutation))

    @cached_property
    def orbits(self) -> Tuple[Tuple[int, ...], ...]:
        """Weyl orbits as tuples of positive-root indices, ordered by (|alpha|^2, first index)."""
        parent = list(range(self.n_positive))

        def find(i: int) -> int:
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for g_perm in self.generator_permutations:
            for i in range(self.n_positive):
                a, b = find(i), find(self.positive_index(g_perm[i]))
                if a != b:
                    parent[max(a, b)] = min(a, b)
        groups: Dict[int, List[int]] = {}
        for i in range(self.n_positive):
            groups.setdefault(find(i), []).append(i)
        ordered = sorted(
            groups.values(), key=lambda g: (round(self.squared_norms[g[0]], 9), g[0])
        )
        return tuple(tuple(g) for g in ordered)

    @property
    def orbit_labels(self) -> Tuple[str, ...]:
        return tuple(f"k{i}" for i in range(len(self.orbits)))

    def cache_key(self) -> dict:
        """JSON-safe identity used by the ensemble cache."""
        return {
            "family": self.family,
            "rank": self.rank,
            "normalization": self.normalization,
            "roots": self.roots.tolist(),
        }


@dataclass(frozen=True)
class MultiplicityFunction:
    """W-invariant multiplicities, one value per Weyl orbit of roots.

    Attributes:
        values: Value per orbit, in the order of ``RootSystem.orbits``.
        per_positive_root: Value for each positive root.

    """

    values: Tuple[float, ...]
    labels: Tuple[str, ...]
    per_positive_root: np.ndarray = field(repr=False)

    def of(self, root_index: int) -> float:
        """Multiplicity of ``roots[root_index]`` (positive or negative)."""
        return float(self.per_positive_root[root_index % len(self.per_positive_root)])

    def as_mapping(self) -> Dict[str, float]:
        return dict(zip(self.labels, self.values))

    def cache_key(self) -> dict:
        return self.as_mapping()


def _family_roots(family: str, rank: int) -> Tuple[np.ndarray, np.ndarray]:
    """Textbook roots (both signs) and the positivity functional."""
    n = rank
    e = np.eye(n)
    candidates: List[np.ndarray] = []
    if family in ("B", "C", "D", "BC"):
        for i in range(n):
            for j in range(i + 1, n):
                candidates.append(e[i] - e[j])
        for i in range(n):
            for j in range(i + 1, n):
                candidates.append(e[i] + e[j])
        if family in ("B", "BC"):
            candidates.extend(e[i] for i in range(n))
        if family in ("C", "BC"):
            candidates.extend(2.0 * e[i] for i in range(n))
        functional = np.arange(n, 0, -1, dtype=float)
        positive = np.array(candidates)
    elif family == "A":
        # A_n inside the sum-zero hyperplane of R^(n+1), Helmert basis
        ambient = np.eye(n + 1)
        basis = np.zeros((n + 1, n))
        for j in range(1, n + 1):
            basis[:j, j - 1] = 1.0
            basis[j, j - 1] = -float(j)
            basis[:, j - 1] /= np.sqrt(j * (j + 1))
        for i in range(n + 1):
            for j in range(i + 1, n + 1):
                candidates.append((ambient[i] - ambient[j]) @ basis)
        functional = np.arange(n + 1, 0, -1, dtype=float) @ basis
        positive = np.array(candidates)
    else:
        positive = np.array([[RANK1_DEFAULT_ALPHA]])
        functional = np.array([1.0])
    return positive, functional


@log_decorator(logger, suffix_message="Build root system")
def build_root_system(
    family: str,
    rank: int,
    normalization: Union[str, float] = "standard",
    weyl_cap: int = DEFAULT_WEYL_CAP,
) -> RootSystem:
    """Construct a classical root system.

    Args:
        family: One of "A", "B", "C", "D", "BC", "rank1".
        rank: Dimension of the ambient space of the roots.
        normalization: "standard" for textbook coordinates. A number rescales so the
            shortest root has that squared length; for "rank1" it is the root length alpha.
        weyl_cap: Largest Weyl group enumerated before giving up.

    Returns:
        RootSystem: Positive roots are those on which a fixed regular functional is
        positive, so the positive chamber is ``{x_1 > x_2 > ... }`` (family-appropriate).

    Raises:
        ValueError: On an invalid family/rank combination or normalization.

    """
    if family not in FAMILIES:
        log_and_raise_error(
            logger, "error", ValueError, f"unknown family '{family}', expected one of {FAMILIES}"
        )
    if not isinstance(rank, (int, np.integer)) or rank < 1:
        log_and_raise_error(logger, "error", ValueError, f"rank must be >= 1, got {rank}")
    if family == "rank1" and rank != 1:
        log_and_raise_error(
            logger, "error", ValueError, f"family 'rank1' requires rank 1, got {rank}"
        )
    if family == "D" and rank < 2:
        log_and_raise_error(
            logger, "error", ValueError, f"family 'D' requires rank >= 2, got {rank}"
        )
    if normalization != "standard":
        if isinstance(normalization, str) or not float(normalization) > 0:
            log_and_raise_error(
                logger,
                "error",
                ValueError,
                f"normalization must be 'standard' or a positive number, got {normalization!r}",
            )

    positive, functional = _family_roots(family, int(rank))
    if normalization != "standard":
        if family == "rank1":
            positive = positive * (float(normalization) / RANK1_DEFAULT_ALPHA)
        else:
            positive = positive * np.sqrt(float(normalization) / _SHORT_ROOT_SQUARED[family])

    assert_and_log_error(
        logger,
        "critical",
        bool(np.all(positive @ functional > 0)),
        f"positivity functional is not positive on every candidate root of {family}{rank}",
    )
    roots = np.vstack([positive, -positive])
    system = RootSystem(
        family=family,
        rank=int(rank),
        normalization=normalization,
        roots=roots,
        n_positive=positive.shape[0],
        weyl_cap=weyl_cap,
    )
    logger.debug(
        f" | Function | build_root_system() | Action | {family}{rank} | {roots.shape[0]} roots | normalization {normalization}"
    )
    return system


def reflect(alpha: VectorLike, x: VectorLike) -> np.ndarray:
    """``r_alpha(x) = x - <alpha_check, x> alpha``."""
    alpha = np.asarray(alpha, dtype=float)
    x = np.asarray(x, dtype=float)
    squared = float(alpha @ alpha)
    assert_and_log_error(logger, "error", squared > 0, "cannot reflect in a zero vector")
    return x - (2.0 * float(alpha @ x) / squared) * alpha


@log_decorator(logger, suffix_message="Enumerate Weyl group")
def generate_weyl_group(R: RootSystem) -> List[WeylElement]:
    """All elements of W(R) in breadth-first order from the identity.

    Raises:
        RuntimeError: If the group is larger than ``R.weyl_cap``.

    """
    group = list(R.weyl_group)
    logger.debug(
        f" | Function | generate_weyl_group() | Action | {R.family}{R.rank} | |W| = {len(group)}"
    )
    return group


def chamber_margins(R: RootSystem, x: np.ndarray) -> np.ndarray:
    """``<alpha, x>`` for every positive root."""
    return R.positive_roots @ x


def wall_distance(R: RootSystem, x: np.ndarray) -> float:
    """Euclidean distance from a chamber point to the nearest wall."""
    norms = np.sqrt(R.squared_norms[: R.n_positive])
    return float(np.min(np.abs(R.positive_roots @ x) / norms))


def is_regular(R: RootSystem, x: VectorLike, tolerance: float = 1e-12) -> bool:
    """True when ``x`` lies on no wall."""
    x = np.asarray(x, dtype=float)
    scale = tolerance * (1.0 + float(np.linalg.norm(x)))
    return bool(np.all(np.abs(R.positive_roots @ x) > scale))


def radial_decompose(R: RootSystem, x: VectorLike) -> ChamberDecomposition:
    """Split ``x`` as ``angular.act(radial)`` with ``radial`` in the closed chamber.

    The angular part is the first element in breadth-first order that works,
    which is the unique one for regular points and the shortlex-minimal one on walls.
    """
    x = as_vector(x, "x", R.rank)
    tolerance = 1e-12 * (1.0 + float(np.linalg.norm(x)))
    candidates = R._stacked_transposes @ x
    margins = candidates @ R.positive_roots.T
    admissible = np.all(margins >= -tolerance, axis=1)
    first = int(np.argmax(admissible))
    radial = candidates[first]
    return ChamberDecomposition(
        radial=radial,
        angular=R.weyl_group[first],
        is_regular=bool(np.all(margins[first] > tolerance)),
    )


def multiplicity(R: RootSystem, k: Multiplicities) -> MultiplicityFunction:
    """Build a multiplicity function from a scalar, a per-orbit list or a label mapping.

    Raises:
        ValueError: On a value below 1/2, a wrong number of values or unknown labels.

    """
    if isinstance(k, MultiplicityFunction):
        return k
    labels = R.orbit_labels
    if isinstance(k, Mapping):
        unknown = set(k) - set(labels)
        if unknown or set(k) != set(labels):
            log_and_raise_error(
                logger,
                "error",
                ValueError,
                f"multiplicity labels {sorted(k)} must be exactly {list(labels)}",
            )
        values = [k[label] for label in labels]
    elif np.ndim(k) == 0:
        values = [float(k)] * len(labels)
    else:
        values = list(k)
        if len(values) != len(labels):
            log_and_raise_error(
                logger,
                "error",
                ValueError,
                f"{len(values)} multiplicities given, {R.family}{R.rank} has {len(labels)} orbits",
            )
    checked = []
    for label, value in zip(labels, values):
        try:
            checked.append(check_multiplicity_value(float(value), label))
        except AssertionError as error:
            log_and_raise_error(logger, "error", ValueError, str(error))
    per_root = np.empty(R.n_positive)
    for orbit, value in zip(R.orbits, checked):
        per_root[list(orbit)] = value
    return MultiplicityFunction(
        values=tuple(checked), labels=labels, per_positive_root=per_root
    )


def rho(R: RootSystem, k: Multiplicities) -> np.ndarray:
    """Half the multiplicity-weighted sum of the positive roots."""
    k = multiplicity(R, k)
    return 0.5 * (k.per_positive_root @ R.positive_roots)


@log_decorator(logger, suffix_message="Summarise root system")
def root_system_info(R: RootSystem, k: Optional[Multiplicities] = None) -> dict:
    """Roots, |W|, orbits and rho with its regularity, as JSON-safe values."""
    k = multiplicity(R, 1.0 if k is None else k)
    rho_vector = rho(R, k)
    return {
        "family": R.family,
        "rank": R.rank,
        "normalization": R.normalization,
        "roots": R.roots.tolist(),
        "positive_roots": R.positive_roots.tolist(),
        "weyl_order": len(R.weyl_group),
        "orbits": {label: list(orbit) for label, orbit in zip(R.orbit_labels, R.orbits)},
        "k": k.as_mapping(),
        "rho": rho_vector.tolist(),
        "rho_regular": is_regular(R, rho_vector),
    }


def root_system_to_json(R: RootSystem, k: Optional[Multiplicities] = None) -> str:
    """Serialise as ``{family, rank, normalization, roots, k}``."""
    k = multiplicity(R, 1.0 if k is None else k)
    document = {
        "family": R.family,
        "rank": R.rank,
        "normalization": R.normalization,
        "roots": R.roots.tolist(),
        "k": k.as_mapping(),
    }
    return json.dumps(document, sort_keys=True)


@log_decorator(logger, suffix_message="Load root system from json")
def root_system_from_json(text: str) -> Tuple[RootSystem, MultiplicityFunction]:
    """Rebuild the system and multiplicities, checking the stored roots match.

    Raises:
        ValueError: If the document is malformed or its roots disagree with the family.

    """
    try:
        document = json.loads(text)
        family, rank = document["family"], document["rank"]
        normalization = document.get("normalization", "standard")
        stored = np.asarray(document["roots"], dtype=float)
        k_values = document.get("k", 1.0)
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as error:
        log_and_raise_error(
            logger, "error", ValueError, f"malformed root system document: {error}"
        )
    R = build_root_system(family, rank, normalization)
    if stored.shape != R.roots.shape or not np.allclose(stored, R.roots, atol=1e-12):
        log_and_raise_error(
            logger,
            "error",
            ValueError,
            f"stored roots do not match {family}{rank} with normalization {normalization!r}",
        )
    return R, multiplicity(R, k_values)
