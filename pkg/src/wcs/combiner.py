"""Combining submetrics into one score and learning the combination weights.

The score is a linear blend: non-negative weights on the three consistency
submetrics, a non-negative penalty weight on flicker (entering with a minus
sign), and a free bias. Weights are learned from human scores by least squares
with the non-negativity constraints enforced by a Lawson-Hanson style active
set method; the bias is never constrained.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .interchange import ValidationError

FEATURE_NAMES = ("op", "rs", "cc", "fp")


class FitError(Exception):
    """The regression problem is degenerate (too few rows, collinear columns...)."""


@dataclass(frozen=True)
class SubmetricVector:
    op: float
    rs: float
    cc: float
    fp: float

    def __post_init__(self):
        for name in FEATURE_NAMES:
            v = getattr(self, name)
            if not math.isfinite(v) or not (0.0 <= v <= 1.0):
                raise ValidationError(f"submetric {name}={v} outside [0, 1]")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.op, self.rs, self.cc, self.fp)


@dataclass(frozen=True)
class WeightVector:
    w_op: float
    w_rs: float
    w_cc: float
    w_fp: float
    b: float = 0.0

    def __post_init__(self):
        for name in ("w_op", "w_rs", "w_cc", "w_fp"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValidationError(f"{name} is not finite")
            if v < 0:
                raise ValidationError(f"{name}={v} must be non-negative")
        if not math.isfinite(self.b):
            raise ValidationError("bias is not finite")

    def as_dict(self) -> dict:
        return {"w_op": self.w_op, "w_rs": self.w_rs, "w_cc": self.w_cc,
                "w_fp": self.w_fp, "b": self.b}


def equal_weights() -> WeightVector:
    """The unlearned baseline: 1/4 on every submetric, zero bias."""
    return WeightVector(0.25, 0.25, 0.25, 0.25, 0.0)


@dataclass
class Standardization:
    means: tuple[float, float, float, float]
    stds: tuple[float, float, float, float]


@dataclass
class FitResult:
    weights: WeightVector
    rmse: float
    standardization: Standardization | None = None


@dataclass
class AblationVariant:
    dropped: str
    fit: FitResult
    train_rmse: float
    val_pearson: float | None = None


def score(sub: SubmetricVector, w: WeightVector) -> float:
    """Raw combined score; flicker enters as a penalty."""
    return w.w_op * sub.op + w.w_rs * sub.rs + w.w_cc * sub.cc - w.w_fp * sub.fp + w.b


def display_score(wcs: float) -> float:
    """0-100 presentation scale; purely for reports, never fed back into math."""
    return min(100.0, max(0.0, 100.0 * wcs))


def _feature_matrix(rows: list[SubmetricVector]) -> np.ndarray:
    # flicker is negated so the sign constraint applies uniformly: all 4 weights >= 0
    X = np.array([[r.op, r.rs, r.cc, -r.fp] for r in rows], dtype=float)
    return X


def nnls_partial(A: np.ndarray, y: np.ndarray, n_constrained: int, tol: float = 1e-12,
                 max_iter: int | None = None) -> np.ndarray:
    """Least squares ``A z ~ y`` with ``z[:n_constrained] >= 0``, trailing
    components free.

    Lawson-Hanson active set: constrained variables start clamped at zero and
    enter the passive set by largest positive gradient; an inner loop backs off
    along the line segment to the previous iterate whenever the unconstrained
    subproblem turns a passive variable negative. Free variables are always
    passive. Columns are normalized internally so the dual tolerance is
    meaningful under any column scaling. Deterministic, terminates at the KKT
    point of this convex problem.
    """
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    m, n = A.shape
    col_norms = np.linalg.norm(A, axis=0)
    col_norms[col_norms == 0.0] = 1.0
    A = A / col_norms
    if max_iter is None:
        max_iter = 30 * n
    scale = max(1.0, float(np.max(np.abs(A.T @ y), initial=0.0)))
    gtol = tol * scale

    passive = np.zeros(n, dtype=bool)
    passive[n_constrained:] = True
    z = np.zeros(n)

    def solve_passive(p_mask):
        sol = np.zeros(n)
        if p_mask.any():
            sub, *_ = np.linalg.lstsq(A[:, p_mask], y, rcond=None)
            sol[p_mask] = sub
        return sol

    z = solve_passive(passive)
    for _ in range(max_iter):
        grad = A.T @ (y - A @ z)
        candidates = [i for i in range(n_constrained) if not passive[i]]
        if not candidates or max(grad[i] for i in candidates) <= gtol:
            break
        enter = max(candidates, key=lambda i: grad[i])
        passive[enter] = True
        trial = solve_passive(passive)
        # inner loop: retreat until the passive constrained block is feasible
        while True:
            bad = [i for i in range(n_constrained) if passive[i] and trial[i] <= 0.0]
            if not bad:
                break
            alphas = [z[i] / (z[i] - trial[i]) for i in bad if z[i] != trial[i]]
            alpha = min(alphas) if alphas else 0.0
            z = z + alpha * (trial - z)
            for i in range(n_constrained):
                if passive[i] and z[i] <= tol * scale:
                    z[i] = 0.0
                    passive[i] = False
            trial = solve_passive(passive)
        z = trial
    z[:n_constrained] = np.maximum(z[:n_constrained], 0.0)
    return z / col_norms


def fit_weights(
    rows: list[SubmetricVector],
    targets: list[float],
    standardize: bool = False,
    fixed_zero: tuple[str, ...] = (),
) -> FitResult:
    """Learn (weights, bias) minimizing squared error against human scores.

    ``fixed_zero`` names submetrics whose weight is pinned to 0 (used by the
    ablation sweep). With ``standardize`` the feature columns are z-scored
    before fitting and the coefficients are mapped back to raw scale, so the
    returned weights always apply to raw submetrics.
    """
    if len(rows) != len(targets):
        raise FitError("rows and targets differ in length")
    if len(rows) < 5:
        raise FitError(f"need at least 5 samples, got {len(rows)}")
    for name in fixed_zero:
        if name not in FEATURE_NAMES:
            raise FitError(f"unknown submetric {name!r}")
    y = np.asarray(targets, dtype=float)
    if not np.all(np.isfinite(y)):
        raise FitError("non-finite target score")

    X_full = _feature_matrix(rows)
    active = [i for i, name in enumerate(FEATURE_NAMES) if name not in fixed_zero]
    X = X_full[:, active]

    col_std = X.std(axis=0)
    constant = col_std == 0.0
    kept = [active[i] for i in range(len(active)) if not constant[i]]
    X = X[:, ~constant]
    if X.shape[1] == 0 and np.ptp(y) > 0 and not fixed_zero:
        raise FitError("all submetric columns are constant")

    design = np.hstack([X, np.ones((len(rows), 1))])
    if np.linalg.matrix_rank(design) < design.shape[1]:
        bad = _collinear_columns(X, [FEATURE_NAMES[i] for i in kept])
        raise FitError(f"design matrix is rank-deficient; collinear columns: {', '.join(bad)}")

    std = None
    if standardize and X.shape[1]:
        means = X.mean(axis=0)
        stds = X.std(axis=0)
        Xz = (X - means) / stds
        design = np.hstack([Xz, np.ones((len(rows), 1))])
        z = nnls_partial(design, y, n_constrained=X.shape[1])
        coef = z[:-1] / stds
        bias = float(z[-1] - np.sum(z[:-1] * means / stds))
        full_means, full_stds = np.zeros(4), np.ones(4)
        for j, i in enumerate(kept):
            full_means[i], full_stds[i] = means[j], stds[j]
        std = Standardization(means=tuple(full_means), stds=tuple(full_stds))
    else:
        z = nnls_partial(design, y, n_constrained=X.shape[1])
        coef = z[:-1]
        bias = float(z[-1])

    w = np.zeros(4)
    for j, i in enumerate(kept):
        w[i] = coef[j]
    weights = WeightVector(w_op=float(w[0]), w_rs=float(w[1]), w_cc=float(w[2]),
                           w_fp=float(w[3]), b=bias)
    pred = X_full @ w + bias
    rmse = float(np.sqrt(np.mean((pred - y) ** 2)))
    return FitResult(weights=weights, rmse=rmse, standardization=std)


def _collinear_columns(X: np.ndarray, names: list[str]) -> list[str]:
    bad = []
    for j in range(X.shape[1]):
        others = np.hstack([np.delete(X, j, axis=1), np.ones((X.shape[0], 1))])
        sol, _, _, _ = np.linalg.lstsq(others, X[:, j], rcond=None)
        resid = X[:, j] - others @ sol
        norm = np.linalg.norm(X[:, j])
        if np.linalg.norm(resid) <= 1e-10 * max(1.0, norm):
            bad.append(names[j])
    return bad or list(names)


def predict(rows: list[SubmetricVector], w: WeightVector) -> np.ndarray:
    return np.array([score(r, w) for r in rows])


def write_weight_file(fit: FitResult, path) -> None:
    """Weight files are canonical JSON with exactly these keys; they round-trip
    bit-exactly."""
    from .interchange import write_report

    doc = fit.weights.as_dict()
    doc["standardization"] = (
        None if fit.standardization is None
        else {"means": list(fit.standardization.means), "stds": list(fit.standardization.stds)}
    )
    write_report(doc, path)


def read_weight_file(path) -> FitResult:
    from .interchange import read_report

    doc = read_report(path)
    try:
        weights = WeightVector(w_op=doc["w_op"], w_rs=doc["w_rs"], w_cc=doc["w_cc"],
                               w_fp=doc["w_fp"], b=doc["b"])
        std = doc.get("standardization")
        standardization = (
            None if std is None
            else Standardization(means=tuple(std["means"]), stds=tuple(std["stds"]))
        )
    except (KeyError, TypeError) as e:
        raise ValidationError(f"{path}: malformed weight file ({e})") from e
    return FitResult(weights=weights, rmse=0.0, standardization=standardization)


def ablate(
    train_rows: list[SubmetricVector],
    train_targets: list[float],
    val_rows: list[SubmetricVector] | None = None,
    val_targets: list[float] | None = None,
    standardize: bool = False,
) -> list[AblationVariant]:
    """Refit once per submetric with that weight pinned to zero.

    Validation Pearson r is reported when a validation split is supplied and
    its predictions are non-constant.
    """
    variants = []
    for name in FEATURE_NAMES:
        fit = fit_weights(train_rows, train_targets, standardize=standardize, fixed_zero=(name,))
        val_r = None
        if val_rows:
            pred = predict(val_rows, fit.weights)
            hv = np.asarray(val_targets, dtype=float)
            if np.ptp(pred) > 0 and np.ptp(hv) > 0:
                val_r = float(np.corrcoef(pred, hv)[0, 1])
            else:
                val_r = 0.0
        variants.append(AblationVariant(dropped=name, fit=fit, train_rmse=fit.rmse, val_pearson=val_r))
    return variants
