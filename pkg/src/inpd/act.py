"""Affect-control mathematics.

EPA sentiment vectors, impression formation through a coefficient model,
deflection, deflection-minimizing behavior selection, and the mapping from
continuous behavior sentiment onto the discrete cooperate/defect actions.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

EPA_MIN = -4.3
EPA_MAX = 4.3

#: Component names of the 9-dimensional fundamental, in canonical order:
#: actor, behavior, object; evaluation, potency, activity within each.
COMPONENT_NAMES = (
    "fA_e", "fA_p", "fA_a",
    "fB_e", "fB_p", "fB_a",
    "fO_e", "fO_p", "fO_a",
)
TRANSIENT_NAMES = tuple(n.replace("f", "t", 1) for n in COMPONENT_NAMES)

_BEHAVIOR_SLICE = slice(3, 6)

_FLOAT_RE = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")


class ImpressionModelError(ValueError):
    """Raised for malformed impression-model files or invalid coefficients."""


def _check_finite(name: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"{name} components must be finite, got {v!r}")


@dataclass(frozen=True)
class Epa:
    """A point on the three-dimensional affective scale.

    Components are evaluation (good/bad), potency (strong/weak), and
    activity (active/passive). Construction rejects non-finite inputs;
    ``clamped()`` folds values onto the conventional +-4.3 scale.
    """

    e: float
    p: float
    a: float

    def __post_init__(self) -> None:
        _check_finite("Epa", self.e, self.p, self.a)

    def clamped(self) -> "Epa":
        return Epa(
            min(max(self.e, EPA_MIN), EPA_MAX),
            min(max(self.p, EPA_MIN), EPA_MAX),
            min(max(self.a, EPA_MIN), EPA_MAX),
        )

    def as_array(self) -> np.ndarray:
        return np.array([self.e, self.p, self.a], dtype=float)

    @classmethod
    def from_array(cls, arr: Sequence[float]) -> "Epa":
        e, p, a = (float(x) for x in arr)
        return cls(e, p, a)


@dataclass(frozen=True)
class FundamentalSentiment:
    """Out-of-context actor/behavior/object sentiment (9 scalar components)."""

    actor: Epa
    behavior: Epa
    object: Epa

    def as_array(self) -> np.ndarray:
        return np.concatenate(
            [self.actor.as_array(), self.behavior.as_array(), self.object.as_array()]
        )

    @classmethod
    def from_array(cls, arr: Sequence[float]) -> "FundamentalSentiment":
        arr = np.asarray(arr, dtype=float)
        if arr.shape != (9,):
            raise ValueError(f"fundamental sentiment needs 9 components, got {arr.shape}")
        return cls(Epa.from_array(arr[0:3]), Epa.from_array(arr[3:6]), Epa.from_array(arr[6:9]))


@dataclass(frozen=True)
class TransientImpression:
    """Context-shifted sentiment after an event. Not clamped: transients may
    leave the fundamental scale."""

    actor: Epa
    behavior: Epa
    object: Epa

    def as_array(self) -> np.ndarray:
        return np.concatenate(
            [self.actor.as_array(), self.behavior.as_array(), self.object.as_array()]
        )

    @classmethod
    def from_array(cls, arr: Sequence[float]) -> "TransientImpression":
        arr = np.asarray(arr, dtype=float)
        if arr.shape != (9,):
            raise ValueError(f"transient impression needs 9 components, got {arr.shape}")
        return cls(Epa.from_array(arr[0:3]), Epa.from_array(arr[3:6]), Epa.from_array(arr[6:9]))


class Action(enum.IntEnum):
    DEFECT = 0
    COOPERATE = 1

    @property
    def letter(self) -> str:
        return "C" if self is Action.COOPERATE else "D"

    @classmethod
    def from_letter(cls, s: str) -> "Action":
        if s == "C":
            return cls.COOPERATE
        if s == "D":
            return cls.DEFECT
        raise ValueError(f"unknown action letter {s!r}")


@dataclass(frozen=True)
class ActionSemantics:
    """Affective meaning of the two game actions."""

    cooperate_epa: Epa
    defect_epa: Epa
    label: str

    def __post_init__(self) -> None:
        gap = float(((self.cooperate_epa.as_array() - self.defect_epa.as_array()) ** 2).sum())
        if gap <= 0.0:
            raise ValueError("cooperate and defect sentiment must differ")

    def epa_for(self, action: Action) -> Epa:
        return self.cooperate_epa if action is Action.COOPERATE else self.defect_epa


DEFAULT_SEMANTICS = ActionSemantics(Epa(2.1, 1.5, 0.8), Epa(-2.3, -0.5, -0.8), "default")
STUDY_SEMANTICS = ActionSemantics(Epa(1.4, 0.1, 0.2), Epa(-0.7, 0.9, 0.7), "study")

SEMANTICS_BY_LABEL = {"default": DEFAULT_SEMANTICS, "study": STUDY_SEMANTICS}

#: Identity sentiment of a warm, cooperative social role.
FRIEND = Epa(2.8, 1.9, 1.4)
#: Identity sentiment of a cold, self-serving social role.
SCROOGE = Epa(-2.2, -0.2, -0.5)


class ImpressionModel:
    """Coefficient table mapping fundamentals to transient impressions.

    The transient is ``coefficients @ features(f)`` where the feature vector
    holds a constant, the 9 components, and the model's pairwise interaction
    products, in the order of ``feature_terms``.
    """

    def __init__(self, feature_terms: Sequence[str], coefficients: np.ndarray, name: str):
        coefficients = np.asarray(coefficients, dtype=float)
        terms = tuple(feature_terms)
        if coefficients.ndim != 2 or coefficients.shape[0] != 9:
            raise ImpressionModelError(
                f"model {name!r}: coefficient matrix must have 9 rows, got shape {coefficients.shape}"
            )
        if coefficients.shape[1] != len(terms):
            raise ImpressionModelError(
                f"model {name!r}: {len(terms)} feature terms but {coefficients.shape[1]} columns"
            )
        if not np.isfinite(coefficients).all():
            raise ImpressionModelError(f"model {name!r}: non-finite coefficient")
        if terms.count("const") != 1:
            raise ImpressionModelError(f"model {name!r}: exactly one 'const' term required")
        for comp in COMPONENT_NAMES:
            if terms.count(comp) != 1:
                raise ImpressionModelError(
                    f"model {name!r}: linear term {comp!r} must appear exactly once"
                )
        if len(set(terms)) != len(terms):
            raise ImpressionModelError(f"model {name!r}: duplicate feature term")

        interactions = []
        for t in terms:
            if t == "const" or t in COMPONENT_NAMES:
                continue
            parts = t.split("*")
            if len(parts) != 2 or any(p not in COMPONENT_NAMES for p in parts):
                raise ImpressionModelError(
                    f"model {name!r}: interaction term {t!r} does not name two valid components"
                )
            interactions.append((COMPONENT_NAMES.index(parts[0]), COMPONENT_NAMES.index(parts[1])))

        self.feature_terms = terms
        self.coefficients = coefficients
        self.coefficients.setflags(write=False)
        self.name = name

        # Column classification, precomputed for fast evaluation.
        self._const_col = terms.index("const")
        self._linear_cols = np.array([terms.index(c) for c in COMPONENT_NAMES])
        self._inter_cols = np.array(
            [k for k, t in enumerate(terms) if t != "const" and t not in COMPONENT_NAMES],
            dtype=int,
        )
        self._inter_pairs = np.array(interactions, dtype=int).reshape(-1, 2)
        beh = set(range(3, 6))
        self.has_behavior_products = any(i in beh and j in beh for i, j in interactions)

        # Precomputed pieces of the behavior-affine decomposition (valid when
        # there are no behavior-behavior products): the constant/linear split
        # of tau and the per-column behavior gradients.
        self._m_const = coefficients[:, self._const_col].copy()
        self._m_linear = coefficients[:, self._linear_cols].copy()
        self._t_linear = self._m_linear[:, 3:6].copy()
        fixed_inter: list[tuple[int, int, np.ndarray]] = []
        beh_inter: list[tuple[int, int, np.ndarray]] = []
        for col, (i, j) in zip(self._inter_cols, self._inter_pairs):
            i_beh, j_beh = 3 <= i <= 5, 3 <= j <= 5
            if i_beh and j_beh:
                continue
            if not i_beh and not j_beh:
                fixed_inter.append((i, j, coefficients[:, col].copy()))
            elif i_beh:
                beh_inter.append((i - 3, j, coefficients[:, col].copy()))
            else:
                beh_inter.append((j - 3, i, coefficients[:, col].copy()))
        self._fixed_inter = fixed_inter
        self._beh_inter = beh_inter

    @property
    def n_terms(self) -> int:
        return len(self.feature_terms)

    def feature_matrix(self, fundamentals: np.ndarray) -> np.ndarray:
        """Feature rows for a batch of 9-component fundamentals, shape (n, K)."""
        F = np.atleast_2d(np.asarray(fundamentals, dtype=float))
        out = np.empty((F.shape[0], self.n_terms), dtype=float)
        out[:, self._const_col] = 1.0
        out[:, self._linear_cols] = F
        if len(self._inter_pairs):
            out[:, self._inter_cols] = F[:, self._inter_pairs[:, 0]] * F[:, self._inter_pairs[:, 1]]
        return out

    def transients(self, fundamentals: np.ndarray) -> np.ndarray:
        """Transient 9-vectors for a batch of fundamentals, shape (n, 9)."""
        return self.feature_matrix(fundamentals) @ self.coefficients.T


def form_impression(f: FundamentalSentiment, model: ImpressionModel) -> TransientImpression:
    """Deterministically map a fundamental sentiment to its transient impression."""
    tau = model.transients(f.as_array()[None, :])[0]
    return TransientImpression.from_array(tau)


def deflection(f: FundamentalSentiment, t: TransientImpression) -> float:
    """Squared Euclidean distance between fundamental and transient 9-vectors."""
    d = f.as_array() - t.as_array()
    return float(d @ d)


def deflection_of_event(actor: Epa, behavior: Epa, object: Epa, model: ImpressionModel) -> float:
    """Deflection created when ``actor`` directs ``behavior`` at ``object``."""
    f = np.concatenate([actor.as_array(), behavior.as_array(), object.as_array()])
    tau = model.transients(f[None, :])[0]
    d = f - tau
    return float(d @ d)


def nearest_action(b: Epa, semantics: ActionSemantics) -> Action:
    """Discretize a behavior sentiment onto the closer of the two action points.

    Exact ties resolve to cooperation.
    """
    bv = b.as_array()
    dc = bv - semantics.cooperate_epa.as_array()
    dd = bv - semantics.defect_epa.as_array()
    return Action.COOPERATE if float(dc @ dc) <= float(dd @ dd) else Action.DEFECT


# ---------------------------------------------------------------------------
# Behavior optimization
#
# For fixed actor and object, every feature is affine in the behavior
# components unless the model multiplies two behavior components together;
# the objective ||f(b) - tau(f(b))||^2 is then a box-constrained linear
# least-squares problem. Models with behavior-behavior products take the
# deterministic grid path instead.
# ---------------------------------------------------------------------------

_SELECTOR = np.zeros((9, 3))
_SELECTOR[3, 0] = _SELECTOR[4, 1] = _SELECTOR[5, 2] = 1.0

_BOX_RADIUS = EPA_MAX * math.sqrt(3.0)
_FLAT_TOL = 1e-9
_RANK_RTOL = 1e-10
_GRID_STEP = 0.1


def _affine_parts(model: ImpressionModel, actors: np.ndarray, objects: np.ndarray):
    """Residual decomposition r(b) = r0 + A b for a batch of (actor, object).

    Returns ``(r0, A)`` with shapes (n, 9) and (n, 9, 3). Only valid when the
    model has no behavior-behavior interaction terms.
    """
    if model.has_behavior_products:
        raise ValueError("affine decomposition undefined for behavior-behavior products")
    actors = np.atleast_2d(np.asarray(actors, dtype=float))
    objects = np.atleast_2d(np.asarray(objects, dtype=float))
    n = actors.shape[0]

    # f(b) = f0 + S b with the behavior slots zeroed in f0.
    f0 = np.concatenate([actors, np.zeros((n, 3)), objects], axis=1)

    tau0 = model._m_const + f0 @ model._m_linear.T
    for i, j, coeff in model._fixed_inter:
        tau0 += (f0[:, i] * f0[:, j])[:, None] * coeff

    T = np.broadcast_to(model._t_linear, (n, 9, 3)).copy()
    for c, other, coeff in model._beh_inter:
        T[:, :, c] += f0[:, other, None] * coeff

    r0 = f0 - tau0
    A = _SELECTOR - T
    return r0, A


def grid_search_behavior(
    actor: Epa, object: Epa, model: ImpressionModel, step: float = _GRID_STEP
) -> Epa:
    """Exhaustive behavior search on a regular grid over the feasible box.

    Candidates are scanned in lexicographic (e, p, a) order and the first
    minimum wins, so exact ties break lexicographically.
    """
    n_pts = int(round((EPA_MAX - EPA_MIN) / step)) + 1
    vals = np.linspace(EPA_MIN, EPA_MAX, n_pts)
    av, ov = actor.as_array(), object.as_array()
    best_val = np.inf
    best = None
    pa = np.stack(np.meshgrid(vals, vals, indexing="ij"), axis=-1).reshape(-1, 2)
    for e in vals:
        F = np.empty((pa.shape[0], 9))
        F[:, 0:3] = av
        F[:, 3] = e
        F[:, 4:6] = pa
        F[:, 6:9] = ov
        d = F - model.transients(F)
        dvals = np.einsum("ij,ij->i", d, d)
        k = int(np.argmin(dvals))
        if dvals[k] < best_val:
            best_val = float(dvals[k])
            best = F[k, 3:6].copy()
    return Epa.from_array(best)


def optimal_behavior(actor: Epa, object: Epa, model: ImpressionModel, prior: Epa) -> Epa:
    """Behavior sentiment minimizing the deflection of (actor, b, object).

    Solved as box-constrained linear least squares when the objective is
    affine in the behavior; a flat objective (within 1e-9 over the box)
    returns ``prior`` unchanged, and rank-deficient normal equations fall
    back to a deterministic 0.1-step grid search.
    """
    if model.has_behavior_products:
        return grid_search_behavior(actor, object, model)

    r0, A = _affine_parts(model, actor.as_array()[None, :], object.as_array()[None, :])
    r0, A = r0[0], A[0]

    svals = np.linalg.svd(A, compute_uv=False)
    s_max = float(svals[0])
    r0_norm = float(np.linalg.norm(r0))
    # Largest possible objective variation over the box.
    variation = s_max * _BOX_RADIUS * (2.0 * r0_norm + s_max * _BOX_RADIUS)
    if variation < _FLAT_TOL:
        return prior

    if float(svals[-1]) <= _RANK_RTOL * s_max:
        return grid_search_behavior(actor, object, model)

    H = A.T @ A
    g = -(A.T @ r0)
    sol = np.linalg.solve(H, g)
    if np.all(np.abs(sol) <= EPA_MAX):
        return Epa.from_array(sol)
    boxed = _box_coordinate_descent(H[None, :, :], g[None, :])[0]
    return Epa.from_array(boxed)


def optimal_behavior_batch(
    actors: np.ndarray,
    objects: np.ndarray,
    model: ImpressionModel,
    prior: np.ndarray | None = None,
) -> np.ndarray:
    """Vectorized ``optimal_behavior`` over rows of (n, 3) actor/object arrays.

    Same math as the scalar routine: unconstrained optima that leave the box
    are re-solved with the bounded coordinate solver, and flat or
    rank-deficient instances take the scalar path, where ``prior`` (a single
    3-vector, default zero) resolves flat objectives.
    """
    actors = np.asarray(actors, dtype=float)
    objects = np.asarray(objects, dtype=float)
    prior_epa = Epa(0.0, 0.0, 0.0) if prior is None else Epa.from_array(prior)
    if model.has_behavior_products:
        out = np.empty_like(actors)
        for i in range(actors.shape[0]):
            out[i] = grid_search_behavior(
                Epa.from_array(actors[i]), Epa.from_array(objects[i]), model
            ).as_array()
        return out

    r0, A = _affine_parts(model, actors, objects)
    At = A.transpose(0, 2, 1)
    H = At @ A
    g = -(At @ r0[..., None])[..., 0]
    hdiag = np.einsum("ncc->nc", H)
    ok = hdiag.min(axis=1) > 1e-12
    out = np.zeros_like(actors)
    if ok.any():
        out[ok] = np.linalg.solve(H[ok], g[ok][..., None])[..., 0]
    outside = ok & ~np.all(np.abs(out) <= EPA_MAX, axis=1)
    if outside.any():
        out[outside] = _box_coordinate_descent(H[outside], g[outside])
    degenerate = ~ok
    if degenerate.any():
        for i in np.flatnonzero(degenerate):
            out[i] = optimal_behavior(
                Epa.from_array(actors[i]), Epa.from_array(objects[i]), model, prior_epa
            ).as_array()
    return out


def _box_coordinate_descent(H: np.ndarray, g: np.ndarray, sweeps: int = 10) -> np.ndarray:
    """Box-constrained minimum of 0.5 b'Hb - g'b over [-4.3, 4.3]^3, batched.

    Coordinate minimization with clipping converges to the global optimum of
    a strictly convex quadratic under separable bounds; the well-conditioned
    systems produced here contract by about an order of magnitude per sweep.
    """
    b = np.linalg.solve(H, g[..., None])[..., 0]
    np.clip(b, EPA_MIN, EPA_MAX, out=b)
    idx = ((1, 2), (0, 2), (0, 1))
    for _ in range(sweeps):
        for c in range(3):
            j, k = idx[c]
            resid = g[:, c] - H[:, c, j] * b[:, j] - H[:, c, k] * b[:, k]
            coord = resid / H[:, c, c]
            np.clip(coord, EPA_MIN, EPA_MAX, out=coord)
            b[:, c] = coord
    return b


# ---------------------------------------------------------------------------
# Model files
# ---------------------------------------------------------------------------


def load_impression_model(path: str | Path) -> ImpressionModel:
    """Load and validate an impression model from its CSV file.

    Format: header row naming feature terms (``const``, the nine component
    terms ``fA_e`` .. ``fO_a``, and pairwise interactions written
    ``fA_e*fB_e``), then nine data rows labeled by transient component.
    Decimal fields are parsed exactly; anything else is a format error
    reported with its line number.
    """
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ImpressionModelError(f"{path}: cannot read model file: {exc}") from exc
    rows = [ln for ln in lines if ln.strip()]
    if not rows:
        raise ImpressionModelError(f"{path}:1: empty model file")

    header = [c.strip() for c in rows[0].split(",")]
    if len(header) < 2 or header[0] != "transient":
        raise ImpressionModelError(f"{path}:1: header must start with 'transient'")
    terms = header[1:]

    if len(rows) - 1 != 9:
        raise ImpressionModelError(
            f"{path}:{len(rows)}: expected 9 coefficient rows, got {len(rows) - 1}"
        )

    by_label: dict[str, np.ndarray] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        cells = [c.strip() for c in row.split(",")]
        if len(cells) != len(terms) + 1:
            raise ImpressionModelError(
                f"{path}:{lineno}: expected {len(terms) + 1} cells, got {len(cells)}"
            )
        label = cells[0]
        if label not in TRANSIENT_NAMES:
            raise ImpressionModelError(f"{path}:{lineno}: unknown transient label {label!r}")
        if label in by_label:
            raise ImpressionModelError(f"{path}:{lineno}: duplicate transient label {label!r}")
        values = []
        for cell in cells[1:]:
            if not _FLOAT_RE.match(cell):
                raise ImpressionModelError(f"{path}:{lineno}: malformed number {cell!r}")
            values.append(float(cell))
        by_label[label] = np.array(values)

    missing = [t for t in TRANSIENT_NAMES if t not in by_label]
    if missing:
        raise ImpressionModelError(f"{path}:{len(rows)}: missing transient rows {missing}")
    coeff = np.stack([by_label[t] for t in TRANSIENT_NAMES])
    try:
        return ImpressionModel(terms, coeff, name=path.stem)
    except ImpressionModelError as exc:
        raise ImpressionModelError(f"{path}:1: {exc}") from exc


def _data_path(filename: str) -> Path:
    return Path(str(resources.files("inpd").joinpath("data", filename)))


@lru_cache(maxsize=None)
def identity_impression_model() -> ImpressionModel:
    """The shipped testing model: transients reproduce fundamentals exactly."""
    return load_impression_model(_data_path("identity_model.csv"))


@lru_cache(maxsize=None)
def default_impression_model() -> ImpressionModel:
    """The shipped calibrated model used by the affective agents."""
    return load_impression_model(_data_path("default_model.csv"))
