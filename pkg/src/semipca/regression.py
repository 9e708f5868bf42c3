"""Variable selection as reconstruction in the regression semiring.

The model is population-level: a covariance for Z = (eps, X_1..X_{k-1})
and a coefficient row (a_sigma, a_beta) defining y = a_beta X + a_sigma
eps.  The selection criterion for a predictor subset is the residual
variance of projecting y onto the span of the chosen predictors, which
is the Gaussian variation of the reconstruction error.  Best-subset
search is the exhaustive variant, greedy stagewise search the forward
variant; the weighted problem interpolates between ordinary least
squares and a plain PCA of the predictor block.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .pca import gaussian_classic_pca

MAX_ENUMERABLE = 25


@dataclass(frozen=True)
class RegressionModel:
    k: int                  # 1 error + k-1 predictors
    covZ: np.ndarray        # k x k covariance of (eps, X_1..X_{k-1})
    a_sigma: float
    a_beta: np.ndarray      # length k-1

    def __post_init__(self):
        cov = np.asarray(self.covZ, dtype=float)
        beta = np.asarray(self.a_beta, dtype=float).reshape(-1)
        if cov.shape != (self.k, self.k):
            raise ValueError(f"covZ must be {self.k}x{self.k}")
        if np.max(np.abs(cov - cov.T)) > 1e-10:
            raise ValueError("covZ must be symmetric")
        if np.min(np.linalg.eigvalsh((cov + cov.T) / 2.0)) < -1e-10:
            raise ValueError("covZ must be positive semidefinite")
        if beta.shape[0] != self.k - 1:
            raise ValueError(f"a_beta must have length {self.k - 1}")
        if self.a_sigma < 0:
            raise ValueError("a_sigma must be nonnegative")
        cov.flags.writeable = False
        beta.flags.writeable = False
        object.__setattr__(self, "covZ", cov)
        object.__setattr__(self, "a_beta", beta)

    @property
    def coefficient_row(self) -> np.ndarray:
        return np.concatenate([[self.a_sigma], self.a_beta])

    @classmethod
    def from_data(cls, y: np.ndarray, X: np.ndarray) -> "RegressionModel":
        """Convenience wrapper: empirical covariances, unit error variance.

        Fits y = beta X + sigma eps by least squares and packages the
        empirical predictor covariance with an independent unit-variance
        error.
        """
        y = np.asarray(y, dtype=float).reshape(-1)
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[0] != y.shape[0]:
            raise ValueError("y and X disagree on the number of observations")
        Xc = X - X.mean(axis=0)
        yc = y - y.mean()
        covX = Xc.T @ Xc / X.shape[0]
        beta = np.linalg.pinv(covX) @ (Xc.T @ yc / X.shape[0])
        resid_var = float(np.mean((yc - Xc @ beta) ** 2))
        k = X.shape[1] + 1
        cov = np.zeros((k, k))
        cov[0, 0] = 1.0
        cov[1:, 1:] = covX
        return cls(k, cov, np.sqrt(resid_var), beta)


def residual_variation(m: RegressionModel, T) -> float:
    """Residual variance of projecting y onto span{X_i : i in T}.

    T contains 1-based predictor indices; the empty set returns Var(y).
    Singular predictor covariances go through the pseudo-inverse.
    """
    T = sorted(set(T))
    if any(not 1 <= i <= m.k - 1 for i in T):
        raise ValueError(f"predictor indices must lie in 1..{m.k - 1}")
    a = m.coefficient_row
    var_y = float(a @ m.covZ @ a)
    if not T:
        return var_y
    cols = [i for i in T]  # Z index of X_i is i
    cross = a @ m.covZ[:, cols]
    gram = m.covZ[np.ix_(cols, cols)]
    value = var_y - float(cross @ np.linalg.pinv(gram) @ cross)
    return max(value, 0.0)


@dataclass(frozen=True)
class SelectionResult:
    chosen: tuple
    criterion: float
    path: tuple = ()    # forward only: ((set, criterion), ...)

    def to_json_dict(self) -> dict:
        return {
            "chosen": list(self.chosen),
            "criterion": self.criterion,
            "path": [{"subset": list(s), "criterion": c} for s, c in self.path],
        }


def best_subset(m: RegressionModel, p: int) -> SelectionResult:
    """Exhaustive search over predictor subsets of size at most p."""
    npred = m.k - 1
    if npred > MAX_ENUMERABLE:
        raise ValueError(f"enumeration guard: more than {MAX_ENUMERABLE} predictors")
    if not 1 <= p <= npred:
        raise ValueError(f"p must be in 1..{npred}")
    best = ((), residual_variation(m, ()))
    for size in range(1, p + 1):
        for T in itertools.combinations(range(1, npred + 1), size):
            crit = residual_variation(m, T)
            # strict improvement, or equal criterion with smaller subset key
            if crit < best[1] - 0.0 or (crit == best[1] and T < best[0]):
                best = (T, crit)
    return SelectionResult(best[0], best[1])


def forward_select(m: RegressionModel, p: int) -> SelectionResult:
    """Greedy stagewise selection; the path records every stage."""
    npred = m.k - 1
    if npred > MAX_ENUMERABLE:
        raise ValueError(f"enumeration guard: more than {MAX_ENUMERABLE} predictors")
    if not 1 <= p <= npred:
        raise ValueError(f"p must be in 1..{npred}")
    chosen: list[int] = []
    path = []
    current = residual_variation(m, ())
    for _ in range(p):
        candidates = [i for i in range(1, npred + 1) if i not in chosen]
        scored = [(residual_variation(m, chosen + [i]), i) for i in candidates]
        crit, pick = min(scored)
        if crit > current:
            break
        chosen.append(pick)
        current = crit
        path.append((tuple(chosen), crit))
    return SelectionResult(tuple(chosen), current, tuple(path))


# --------------------------------------------------------------------------
# weighted PCA-regression


@dataclass(frozen=True)
class WeightedPcaFit:
    basis: np.ndarray               # (k-1) x p orthonormal predictor basis
    criterion: float
    y_residual: float
    predictor_reconstruction: float
    coefficients: np.ndarray        # induced regression coefficients on X

    def to_json_dict(self) -> dict:
        return {
            "basis": [[float(v) for v in row] for row in self.basis],
            "criterion": self.criterion,
            "y_residual": self.y_residual,
            "predictor_reconstruction": self.predictor_reconstruction,
            "coefficients": [float(v) for v in self.coefficients],
        }


def _predictor_cov(m: RegressionModel) -> np.ndarray:
    return m.covZ[1:, 1:]


def _y_moments(m: RegressionModel):
    a = m.coefficient_row
    var_y = float(a @ m.covZ @ a)
    cov_yx = a @ m.covZ[:, 1:]
    return var_y, cov_yx


def _criterion_parts(m: RegressionModel, V: np.ndarray):
    """(residual variance of y on V^T X, reconstruction error of X under V)."""
    covX = _predictor_cov(m)
    var_y, cov_yx = _y_moments(m)
    g = V.T @ covX @ V
    c = cov_yx @ V
    resid = var_y - float(c @ np.linalg.pinv(g) @ c)
    # reconstruction error of the predictor block under the projector V V^T
    P = V @ V.T
    recon = float(np.trace(covX) - 2 * np.trace(P @ covX) + np.trace(P @ covX @ P))
    return max(resid, 0.0), max(recon, 0.0)


def _orth(Mflat: np.ndarray, dim: int, p: int) -> np.ndarray:
    Q, _ = np.linalg.qr(Mflat.reshape(dim, p))
    return Q[:, :p]


def ols_direction(m: RegressionModel) -> np.ndarray:
    covX = _predictor_cov(m)
    _, cov_yx = _y_moments(m)
    beta = np.linalg.pinv(covX) @ cov_yx
    norm = np.linalg.norm(beta)
    if norm == 0:
        beta = np.eye(m.k - 1)[:, 0]
        norm = 1.0
    return beta / norm


def weighted_pca_regression(m: RegressionModel, p: int, w_y: float,
                            w_x: float, restarts: int = 4,
                            seed: int = 0) -> WeightedPcaFit:
    """Minimise w_y * ResVar(y | V^T X) + w_x * ReconError(X | V) over rank-p V.

    The two boundary cases have closed forms: w_y = 0 gives the classic
    PCA of the predictor block, w_x = 0 gives ordinary least squares on
    all predictors (projecting onto the population OLS direction loses
    nothing).  Interior weights go through a multistart quasi-Newton
    search over orthonormal frames seeded with both closed forms.
    """
    if w_y < 0 or w_x < 0 or (w_y == 0 and w_x == 0):
        raise ValueError("weights must be nonnegative and not both zero")
    npred = m.k - 1
    if not 1 <= p <= npred:
        raise ValueError(f"p must be in 1..{npred}")
    covX = _predictor_cov(m)
    pca_basis, _ = gaussian_classic_pca(covX, p)

    if w_y == 0.0:
        return _finish(m, pca_basis, w_y, w_x)
    # a frame containing the OLS direction is optimal for the y-term
    beta_dir = ols_direction(m)
    frame = np.column_stack([beta_dir] + [pca_basis[:, j] for j in range(p - 1)])
    ols_basis, _ = np.linalg.qr(frame)
    ols_basis = ols_basis[:, :p]
    if w_x == 0.0:
        return _finish(m, ols_basis, w_y, w_x)

    def objective(flat: np.ndarray) -> float:
        V = _orth(flat, npred, p)
        resid, recon = _criterion_parts(m, V)
        return w_y * resid + w_x * recon

    rng = np.random.default_rng(seed)
    best_V, best_val = None, np.inf
    starts = [pca_basis, ols_basis]
    starts += [rng.standard_normal((npred, p)) for _ in range(restarts)]
    for start in starts:
        res = minimize(objective, np.asarray(start, dtype=float).reshape(-1),
                       method="BFGS", options={"maxiter": 500, "gtol": 1e-12})
        val = float(res.fun)
        if val < best_val:
            best_val = val
            best_V = _orth(res.x, npred, p)
    return _finish(m, best_V, w_y, w_x)


def _finish(m: RegressionModel, V: np.ndarray, w_y: float, w_x: float) -> WeightedPcaFit:
    resid, recon = _criterion_parts(m, V)
    covX = _predictor_cov(m)
    _, cov_yx = _y_moments(m)
    g = V.T @ covX @ V
    gamma = np.linalg.pinv(g) @ (V.T @ cov_yx)
    coeffs = V @ gamma
    return WeightedPcaFit(V, w_y * resid + w_x * recon, resid, recon, coeffs)
