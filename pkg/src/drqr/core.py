"""Domain types and transport-norm geometry shared by every module.

Transport norms on the augmented sample space are restricted to l1, l2 and
linf; each has a closed-form dual norm and a closed-form dual-achieving
direction, which is all the rest of the library needs.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

NORMS = ("l1", "l2", "linf")

# dual pairs: l1 <-> linf, l2 <-> l2
_DUAL = {"l1": "linf", "l2": "l2", "linf": "l1"}


class DomainError(ValueError):
    """An argument is outside the mathematical domain of an operation."""


class DataError(ValueError):
    """Input data could not be parsed or fails a structural contract."""


class ConvergenceError(RuntimeError):
    """An iterative search failed to converge; message carries diagnostics."""


def _as_norm(norm: str) -> str:
    tag = str(norm).lower()
    if tag not in NORMS:
        raise DomainError(f"unknown norm {norm!r}; expected one of {NORMS}")
    return tag


def _check_finite(v: np.ndarray, what: str) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        raise DomainError(f"{what} contains non-finite entries")
    return v


def primal_norm(v: np.ndarray, norm: str) -> float:
    """Norm of ``v`` under the transport norm tag."""
    v = _check_finite(v, "vector")
    tag = _as_norm(norm)
    if v.size == 0:
        return 0.0
    if tag == "l1":
        return float(np.sum(np.abs(v)))
    if tag == "l2":
        return float(np.linalg.norm(v))
    return float(np.max(np.abs(v)))


def dual_norm(v: np.ndarray, norm: str) -> float:
    """Dual norm sup{x.v : ||x|| <= 1} of ``v``.

    The dual of l1 is linf, the dual of l2 is l2 and the dual of linf is l1.
    """
    return primal_norm(v, _DUAL[_as_norm(norm)])


def dual_direction(v: np.ndarray, norm: str) -> np.ndarray:
    """A unit vector ``w`` (primal norm) with ``v.w`` equal to ``dual_norm(v)``.

    Deterministic tie handling: for the l1 norm the smallest index attaining
    the maximum absolute entry is used, and for linf the sign of a zero entry
    is taken as +1.
    """
    v = _check_finite(v, "vector")
    tag = _as_norm(norm)
    if v.size == 0 or not np.any(v != 0.0):
        raise DomainError("undefined direction: zero vector has no dual-achieving direction")
    if tag == "l1":
        j = int(np.argmax(np.abs(v)))  # argmax returns the smallest index on ties
        w = np.zeros_like(v)
        w[j] = 1.0 if v[j] > 0 else -1.0
        return w
    if tag == "l2":
        return v / np.linalg.norm(v)
    w = np.where(v >= 0.0, 1.0, -1.0)
    return w


def augment(beta: np.ndarray) -> np.ndarray:
    """Coefficient vector extended by the fixed response coordinate -1."""
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    return np.concatenate([beta, [-1.0]])


def dual_norm_aug(beta: np.ndarray, norm: str) -> float:
    """Dual norm of the augmented coefficient vector (beta, -1)."""
    return dual_norm(augment(beta), norm)


@dataclass(frozen=True)
class AugmentedCoefficient:
    """The vector (beta, -1) used by the penalty and all transport geometry."""

    beta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "beta", _check_finite(np.atleast_1d(self.beta), "beta"))

    @property
    def vector(self) -> np.ndarray:
        return augment(self.beta)

    def dual_norm(self, norm: str) -> float:
        return dual_norm(self.vector, norm)


@dataclass(frozen=True)
class ProblemSpec:
    """Quantile level, Wasserstein order, transport norm and radius.

    ``p`` may be ``math.inf``; the Hoelder conjugate ``q`` is derived
    (``q = inf`` when ``p = 1`` and ``q = 1`` when ``p = inf``).
    """

    alpha: float
    p: float
    norm: str = "l2"
    epsilon: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not (self.p >= 1.0):
            raise DomainError(f"Wasserstein order p must be >= 1, got {self.p}")
        if not (self.epsilon >= 0.0) or not math.isfinite(self.epsilon):
            raise DomainError(f"radius epsilon must be finite and >= 0, got {self.epsilon}")
        object.__setattr__(self, "norm", _as_norm(self.norm))
        if math.isfinite(self.p) and self.p > 1.0:
            q = self.p / (self.p - 1.0)
            if abs(1.0 / self.p + 1.0 / q - 1.0) > 1e-12:
                raise DomainError("conjugate identity 1/p + 1/q = 1 violated")

    @property
    def q(self) -> float:
        if self.p == 1.0:
            return math.inf
        if math.isinf(self.p):
            return 1.0
        return self.p / (self.p - 1.0)

    def with_epsilon(self, epsilon: float) -> "ProblemSpec":
        return ProblemSpec(self.alpha, self.p, self.norm, epsilon)


@dataclass(frozen=True)
class Dataset:
    """Design matrix X (N x d) and response y (N); the empirical reference law."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.ndim != 2:
            raise DataError(f"X must be a 2-d matrix, got ndim={X.ndim}")
        if y.ndim != 1:
            raise DataError(f"y must be a 1-d vector, got ndim={y.ndim}")
        if y.shape[0] != X.shape[0]:
            raise DataError(f"X has {X.shape[0]} rows but y has {y.shape[0]} entries")
        if y.shape[0] < 1:
            raise DataError("dataset must contain at least one observation")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise DataError("dataset contains non-finite entries")
        object.__setattr__(self, "X", np.ascontiguousarray(X))
        object.__setattr__(self, "y", np.ascontiguousarray(y))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def residuals(self, beta: np.ndarray, s: float) -> np.ndarray:
        beta = np.atleast_1d(np.asarray(beta, dtype=float))
        if beta.shape[0] != self.d:
            raise DomainError(f"beta has length {beta.shape[0]}, expected {self.d}")
        return self.y - self.X @ beta - s


@dataclass(frozen=True)
class WeightedPointCloud:
    """A finite discrete distribution on the augmented sample space.

    Points are stored as an x-part (m x d) and a y-part (m,); weights are
    probabilities summing to one.
    """

    xs: np.ndarray
    ys: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        ys = np.asarray(self.ys, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if xs.ndim == 1:
            xs = xs.reshape(-1, 1) if xs.size else xs.reshape(0, 0)
        if xs.shape[0] != ys.shape[0] or w.shape[0] != ys.shape[0]:
            raise DataError("points and weights must have matching lengths")
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys)) and np.all(np.isfinite(w))):
            raise DataError("point cloud contains non-finite entries")
        if np.any(w < -1e-15):
            raise DataError("weights must be nonnegative")
        if abs(float(np.sum(w)) - 1.0) > 1e-12:
            raise DataError(f"weights sum to {float(np.sum(w))!r}, expected 1 within 1e-12")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)
        object.__setattr__(self, "weights", np.maximum(w, 0.0))

    @property
    def size(self) -> int:
        return self.ys.shape[0]

    @property
    def d(self) -> int:
        return self.xs.shape[1]

    @classmethod
    def from_dataset(cls, data: Dataset) -> "WeightedPointCloud":
        n = data.n
        return cls(data.X.copy(), data.y.copy(), np.full(n, 1.0 / n))

    @classmethod
    def from_values(cls, values, weights=None) -> "WeightedPointCloud":
        """One-dimensional cloud (empty x-part) from atom values."""
        values = np.asarray(values, dtype=float).ravel()
        if weights is None:
            weights = np.full(values.shape[0], 1.0 / values.shape[0])
        return cls(np.zeros((values.shape[0], 0)), values, np.asarray(weights, dtype=float))

    def residuals(self, beta: np.ndarray, s: float) -> np.ndarray:
        beta = np.atleast_1d(np.asarray(beta, dtype=float))
        return self.ys - self.xs @ beta - s

    def check_loss_at(self, beta: np.ndarray, s: float, alpha: float) -> float:
        return float(np.sum(self.weights * check_loss(self.residuals(beta, s), alpha)))

    def to_csv(self, path) -> None:
        """Write columns weight, x_1 .. x_d, y."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["weight"] + [f"x_{j + 1}" for j in range(self.d)] + ["y"])
            for i in range(self.size):
                row = [format(self.weights[i], ".17g")]
                row += [format(v, ".17g") for v in self.xs[i]]
                row.append(format(self.ys[i], ".17g"))
                writer.writerow(row)


def check_loss(u: np.ndarray, alpha: float) -> np.ndarray:
    """Asymmetric piecewise-linear loss u * (alpha - 1{u < 0})."""
    u = np.asarray(u, dtype=float)
    return np.where(u >= 0.0, alpha * u, (alpha - 1.0) * u)


def mean_check_loss(residuals: np.ndarray, alpha: float, weights=None) -> float:
    vals = check_loss(residuals, alpha)
    if weights is None:
        return float(np.mean(vals))
    return float(np.sum(np.asarray(weights, dtype=float) * vals))


def alpha_quantile(values: np.ndarray, alpha: float, weights=None) -> float:
    """Left-continuous empirical quantile inf{t : F(t) >= alpha}.

    Ties resolve to the smallest attaining atom; a tolerance of 1e-12 on the
    cumulative mass absorbs float rounding in the weighted case.
    """
    values = np.asarray(values, dtype=float).ravel()
    if values.size == 0:
        raise DomainError("quantile of an empty sample")
    order = np.argsort(values, kind="stable")
    v = values[order]
    if weights is None:
        cum = np.arange(1, v.size + 1, dtype=float) / v.size
    else:
        w = np.asarray(weights, dtype=float).ravel()[order]
        cum = np.cumsum(w) / np.sum(w)
    k = int(np.searchsorted(cum, alpha - 1e-12, side="left"))
    k = min(k, v.size - 1)
    return float(v[k])


def load_dataset(path, y_column) -> Dataset:
    """Read a CSV file with a header row into a :class:`Dataset`.

    ``y_column`` selects the response either by header name or by 0-based
    column index; the remaining columns become X in file order.  Ragged rows,
    non-numeric or non-finite cells and a missing response column raise
    :class:`DataError` with the offending location.
    """
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file, expected a header row") from None
        header = [h.strip() for h in header]
        if isinstance(y_column, int) or (isinstance(y_column, str) and y_column.lstrip("-").isdigit()):
            y_idx = int(y_column)
            if not (0 <= y_idx < len(header)):
                raise DataError(
                    f"{path}: y column index {y_idx} out of range; available columns: {header}"
                )
        else:
            if y_column not in header:
                raise DataError(
                    f"{path}: y column {y_column!r} not found; available columns: {header}"
                )
            y_idx = header.index(y_column)
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DataError(
                    f"{path}:{lineno}: ragged row with {len(row)} cells, expected {len(header)}"
                )
            parsed = []
            for j, cell in enumerate(row):
                try:
                    val = float(cell)
                except ValueError:
                    raise DataError(
                        f"{path}:{lineno}: non-numeric cell {cell!r} in column {header[j]!r}"
                    ) from None
                if not math.isfinite(val):
                    raise DataError(
                        f"{path}:{lineno}: non-finite cell {cell!r} in column {header[j]!r}"
                    )
                parsed.append(val)
            rows.append(parsed)
    if not rows:
        raise DataError(f"{path}: no data rows")
    arr = np.asarray(rows, dtype=float)
    y = arr[:, y_idx]
    X = np.delete(arr, y_idx, axis=1)
    return Dataset(X, y)
