"""Coefficient learning from scored trajectory segments.

Plain and penalized linear regression over standardized features with
k-fold cross-validation. OLS and ridge solve the normal equations through a
Cholesky factorization; lasso runs cyclic coordinate descent with soft
thresholding. Feature importances are normalized absolute standardized
coefficients, and the five route-cost features can be renormalized into a
cost-model coefficient vector.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .costs import WeightCoefficients
from .errors import AllZeroCoefficients, ParseError, SingularDesign

# training CSV columns, in order; day_of_week collapses to a weekend flag
CSV_COLUMNS = ("length_m", "max_slope", "min_width", "surface", "weather",
               "hour_of_day", "day_of_week", "journey_length",
               "daily_total_length", "age", "gender", "score")
FEATURE_NAMES = ("length_m", "max_slope", "min_width", "surface", "weather",
                 "hour_of_day", "weekend", "journey_length",
                 "daily_total_length", "age", "gender")
COST_FEATURES = ("length_m", "max_slope", "min_width", "surface", "weather")

LASSO_TOL = 1e-8
LASSO_MAX_SWEEPS = 100_000


@dataclass
class FitResult:
    coefficients: np.ndarray
    intercept: float
    r2_train: float
    train_ms: float
    feature_names: tuple[str, ...] = FEATURE_NAMES
    fold_r2: Optional[tuple[float, ...]] = None
    r2_cv_mean: Optional[float] = None
    converged: bool = True

    def predict(self, X: np.ndarray) -> np.ndarray:
        return X @ self.coefficients + self.intercept

    def to_dict(self, include_ms: bool = True) -> dict:
        d = {
            "feature_names": list(self.feature_names),
            "coefficients": [float(c) for c in self.coefficients],
            "intercept": float(self.intercept),
            "r2_train": float(self.r2_train),
            "converged": self.converged,
        }
        if self.fold_r2 is not None:
            d["fold_r2"] = [float(v) for v in self.fold_r2]
            d["r2_cv_mean"] = float(self.r2_cv_mean)
        if include_ms:
            d["train_ms"] = round(self.train_ms, 3)
        return d


def standardize(X: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Zero-mean unit-variance columns; constant columns keep scale 1."""
    X = np.asarray(X, dtype=float)
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std = np.where(std == 0, 1.0, std)
    return (X - mean) / std, mean, std


def destandardize(fit: FitResult, mean: np.ndarray,
                  std: np.ndarray) -> tuple[np.ndarray, float]:
    """Map standardized-space coefficients back to raw feature units."""
    beta = fit.coefficients / std
    intercept = fit.intercept - float((fit.coefficients * mean / std).sum())
    return beta, intercept


def _r2(y: np.ndarray, pred: np.ndarray) -> float:
    sse = float(((y - pred) ** 2).sum())
    sst = float(((y - y.mean()) ** 2).sum())
    if sst == 0:
        return 1.0 if sse < 1e-12 else 0.0
    return 1.0 - sse / sst


def _train_r2(y, pred) -> float:
    # constant-target convention: define training R^2 as 0
    sst = float(((y - y.mean()) ** 2).sum())
    if sst == 0:
        return 0.0
    return _r2(y, pred)


def fit_ols(X: np.ndarray, y: np.ndarray) -> FitResult:
    """Least squares via the normal equations (Cholesky)."""
    return fit_ridge(X, y, 0.0)


def fit_ridge(X: np.ndarray, y: np.ndarray, lam: float = 0.0) -> FitResult:
    """Minimize ||y - X b - b0||^2 + lam * ||b||^2, intercept unpenalized."""
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] < X.shape[1]:
        raise SingularDesign(f"need at least as many rows as columns, got {X.shape}")
    t0 = time.perf_counter()
    # center so fold subsets of a standardized matrix also fit exactly
    xm = X.mean(axis=0)
    Xc = X - xm
    ym = float(y.mean())
    gram = Xc.T @ Xc + lam * np.eye(X.shape[1])
    rhs = Xc.T @ (y - ym)
    try:
        L = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError as exc:
        raise SingularDesign("design matrix is rank deficient") from exc
    beta = np.linalg.solve(L.T, np.linalg.solve(L, rhs))
    intercept = ym - float(xm @ beta)
    ms = (time.perf_counter() - t0) * 1000.0
    pred = X @ beta + intercept
    return FitResult(beta, intercept, _train_r2(y, pred), ms)


def lasso_lambda_max(X: np.ndarray, y: np.ndarray) -> float:
    """Smallest penalty that zeroes every coefficient."""
    X = np.asarray(X, dtype=float)
    yc = np.asarray(y, dtype=float)
    yc = yc - yc.mean()
    Xc = X - X.mean(axis=0)
    return float(np.abs(Xc.T @ yc).max()) / len(yc)


def fit_lasso(X: np.ndarray, y: np.ndarray, lam: float,
              tol: float = LASSO_TOL, max_sweeps: int = LASSO_MAX_SWEEPS) -> FitResult:
    """Cyclic coordinate descent on sum((y - Xb - b0)^2) / (2n) + lam * ||b||_1.

    Deterministic given the fixed cycling order; if the sweep cap is hit the
    result is returned with converged=False.
    """
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    t0 = time.perf_counter()
    xm = X.mean(axis=0)
    Xc = X - xm
    ym = float(y.mean())
    yc = y - ym
    col_sq = (Xc ** 2).sum(axis=0) / n
    beta = np.zeros(p)
    resid = yc.copy()
    converged = False
    for _ in range(max_sweeps):
        max_delta = 0.0
        for j in range(p):
            if col_sq[j] == 0:
                continue
            old = beta[j]
            rho = float(Xc[:, j] @ resid) / n + col_sq[j] * old
            new = _soft_threshold(rho, lam) / col_sq[j]
            if new != old:
                resid -= (new - old) * Xc[:, j]
                beta[j] = new
                max_delta = max(max_delta, abs(new - old))
        if max_delta < tol:
            converged = True
            break
    intercept = ym - float(xm @ beta)
    ms = (time.perf_counter() - t0) * 1000.0
    pred = X @ beta + intercept
    return FitResult(beta, intercept, _train_r2(y, pred), ms, converged=converged)


def _soft_threshold(x: float, lam: float) -> float:
    if x > lam:
        return x - lam
    if x < -lam:
        return x + lam
    return 0.0


def cross_validate(fitter: Callable[[np.ndarray, np.ndarray], FitResult],
                   X: np.ndarray, y: np.ndarray, k: int,
                   seed: int = 42) -> FitResult:
    """k-fold CV: out-of-sample R^2 per fold plus a full-data fit.

    Fold assignment is a seeded permutation split; train_ms covers the fold
    fits and the final fit. Single-sample folds score 1.0 when predicted
    exactly, 0.0 otherwise.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(y)
    if not 2 <= k <= n:
        raise ValueError(f"k must be in [2, {n}], got {k}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    folds = np.array_split(order, k)
    t0 = time.perf_counter()
    fold_r2 = []
    for fold in folds:
        mask = np.ones(n, dtype=bool)
        mask[fold] = False
        fit = fitter(X[mask], y[mask])
        fold_r2.append(_r2(y[fold], fit.predict(X[fold])))
    final = fitter(X, y)
    ms = (time.perf_counter() - t0) * 1000.0
    return FitResult(final.coefficients, final.intercept, final.r2_train, ms,
                     final.feature_names, tuple(fold_r2),
                     float(np.mean(fold_r2)), final.converged)


@dataclass(frozen=True)
class ImportanceReport:
    feature_names: tuple[str, ...]
    importances: tuple[float, ...]

    def ranking(self) -> list[str]:
        order = sorted(range(len(self.importances)),
                       key=lambda i: (-self.importances[i], self.feature_names[i]))
        return [self.feature_names[i] for i in order]


def feature_importance(fit: FitResult) -> ImportanceReport:
    """Normalized |coefficient| shares of a standardized fit."""
    mags = np.abs(fit.coefficients)
    total = mags.sum()
    if total == 0:
        raise AllZeroCoefficients("all coefficients are zero")
    return ImportanceReport(tuple(fit.feature_names),
                            tuple(float(v) for v in mags / total))


def to_cost_coefficients(report: ImportanceReport) -> WeightCoefficients:
    """Renormalize the five route-cost feature importances to sum to 1."""
    values = dict(zip(report.feature_names, report.importances))
    raw = [values.get(name, 0.0) for name in COST_FEATURES]
    total = sum(raw)
    if total == 0:
        raw = [1.0] * len(COST_FEATURES)
        total = float(len(COST_FEATURES))
    share = [v / total for v in raw]
    # absorb rounding drift into the largest slot so the sum is exactly 1
    drift = 1.0 - sum(share)
    share[share.index(max(share))] += drift
    return WeightCoefficients(*share)


def load_training_csv(path) -> tuple[np.ndarray, np.ndarray, tuple[str, ...]]:
    """Read the 12-column training CSV; rows with gaps are dropped.

    day_of_week (0=Monday .. 6=Sunday) becomes a weekend flag; gender must
    already be encoded 0/1.
    """
    rows = []
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = [c.strip() for c in next(reader)]
            for row in reader:
                if row and any(c.strip() for c in row):
                    rows.append(row)
    except (OSError, csv.Error, StopIteration) as exc:
        raise ParseError(f"cannot read training data: {exc}") from exc
    if tuple(header) != CSV_COLUMNS:
        raise ParseError(f"training header must be {','.join(CSV_COLUMNS)}")
    X_rows, y_rows = [], []
    for row in rows:
        if len(row) < len(CSV_COLUMNS) or any(not c.strip() for c in row[:len(CSV_COLUMNS)]):
            continue
        try:
            vals = [float(c) for c in row[:len(CSV_COLUMNS)]]
        except ValueError:
            continue
        rec = dict(zip(CSV_COLUMNS, vals))
        rec["weekend"] = 1.0 if rec.pop("day_of_week") >= 5 else 0.0
        y_rows.append(rec.pop("score"))
        X_rows.append([rec[name] for name in FEATURE_NAMES])
    if not X_rows:
        raise ParseError("no complete training rows")
    return np.array(X_rows), np.array(y_rows), FEATURE_NAMES
