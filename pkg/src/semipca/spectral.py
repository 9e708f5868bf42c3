"""Discrete spectral models X = (+)_j nu[:, j] * W_j.

A model is a d x n nonnegative atom matrix ``nu``, positive atom weights
``mu`` (the scales of the independent drivers W_j), a stable family and
its index alpha.  :func:`build_model` is the normalising constructor used
by everything downstream; the raw dataclass deliberately tolerates zero
columns so that joint representations (including the zero vector) can be
expressed when evaluating semi-scalar products and semi-metrics.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .semiring import MAX_TIMES, SemiMatrix, SemiringKind
from .stable import FamilyKind, StableFamily, frechet

MERGE_TOL = 1e-9


@dataclass(frozen=True)
class SpectralModel:
    nu: np.ndarray          # d x n, nonnegative
    mu: np.ndarray          # n, nonnegative
    family: StableFamily
    alpha: float

    def __post_init__(self):
        nu = np.atleast_2d(np.asarray(self.nu, dtype=float))
        mu = np.atleast_1d(np.asarray(self.mu, dtype=float))
        if nu.ndim != 2 or mu.ndim != 1:
            raise ValueError("nu must be a matrix and mu a vector")
        if nu.shape[1] != mu.shape[0]:
            raise ValueError(f"nu has {nu.shape[1]} columns but mu has {mu.shape[0]} weights")
        if np.any(nu < 0) or np.any(mu < 0):
            raise ValueError("atom directions and weights must be nonnegative")
        if nu.shape[0] < 1 or nu.shape[1] < 1:
            raise ValueError("need d >= 1 and n >= 1")
        nu.flags.writeable = False
        mu.flags.writeable = False
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "mu", mu)

    @property
    def d(self) -> int:
        return self.nu.shape[0]

    @property
    def n(self) -> int:
        return self.nu.shape[1]

    def to_json_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "d": self.d,
            "n": self.n,
            "nu": [float(v) for v in self.nu.reshape(-1)],  # row-major
            "mu": [float(v) for v in self.mu],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n"


@dataclass(frozen=True)
class AngularMeasure:
    """Discrete measure on the nonnegative part of the q-unit sphere."""

    atoms: np.ndarray       # m x d, each row q-normalised
    weights: np.ndarray     # m, positive
    q: float

    def __post_init__(self):
        atoms = np.atleast_2d(np.asarray(self.atoms, dtype=float))
        weights = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if atoms.shape[0] != weights.shape[0]:
            raise ValueError("one weight per atom required")
        if np.any(weights <= 0):
            raise ValueError("weights must be positive")
        norms = _qnorm(atoms.T, self.q)
        if np.any(np.abs(norms - 1.0) > 1e-12):
            raise ValueError("atoms must lie on the q-unit sphere")
        atoms.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.weights))


def _qnorm(columns: np.ndarray, q: float) -> np.ndarray:
    """q-norms of the columns of a nonnegative matrix; q may be inf."""
    if math.isinf(q):
        return np.max(columns, axis=0)
    return np.sum(columns ** q, axis=0) ** (1.0 / q)


def build_model(nu, mu, family: StableFamily | None = None,
                alpha: float | None = None) -> SpectralModel:
    """Normalising constructor.

    Columns are rescaled to sup-norm 1 with the mass absorbed into the
    weight (nu_j <- nu_j / c, mu_j <- c * mu_j), and duplicate columns are
    merged by combining weights as (mu1^alpha + mu2^alpha)^(1/alpha) --
    identical columns share the same driver direction, so their combined
    driver has exactly that scale.
    """
    if family is None:
        family = frechet(1.0 if alpha is None else alpha)
    if alpha is None:
        alpha = family.alpha if family.is_scalar else 2.0
    nu = np.atleast_2d(np.asarray(nu, dtype=float))
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    if nu.shape[1] != mu.shape[0]:
        raise ValueError("nu / mu shape mismatch")
    if np.any(nu < 0):
        raise ValueError("negative atom entries")
    if np.any(mu <= 0):
        raise ValueError("atom weights must be strictly positive")
    sup = np.max(nu, axis=0)
    if np.any(sup == 0):
        raise ValueError("all-zero atom column")
    nu = nu / sup
    mu = mu * sup

    # merge near-duplicate columns, preserving first-occurrence order
    kept_cols: list[np.ndarray] = []
    kept_mu: list[float] = []
    for j in range(nu.shape[1]):
        col = nu[:, j]
        for i, ref in enumerate(kept_cols):
            denom = np.maximum(np.abs(ref), 1e-300)
            if np.all(np.abs(col - ref) <= MERGE_TOL * np.maximum(denom, 1.0)):
                kept_mu[i] = (kept_mu[i] ** alpha + mu[j] ** alpha) ** (1.0 / alpha)
                break
        else:
            kept_cols.append(col)
            kept_mu.append(float(mu[j]))
    return SpectralModel(np.column_stack(kept_cols), np.array(kept_mu), family, alpha)


def model_from_json_dict(obj: dict) -> SpectralModel:
    alpha = float(obj["alpha"])
    d, n = int(obj["d"]), int(obj["n"])
    nu = np.asarray(obj["nu"], dtype=float).reshape(d, n)
    mu = np.asarray(obj["mu"], dtype=float)
    return build_model(nu, mu, frechet(alpha), alpha)


def linear_transform(xi: SemiMatrix, m: SpectralModel) -> SpectralModel:
    """Image of the model under a semiring-linear map: atoms become xi * nu."""
    if m.family.kind is FamilyKind.FRECHET:
        if xi.semiring.kind is not SemiringKind.MAX_TIMES:
            raise ValueError("frechet models require a max-times map")
    elif xi.semiring.kind is not SemiringKind.PLUS_TIMES:
        raise ValueError("plus-times models require a plus-times map")
    p, d = xi.shape
    if d != m.d:
        raise ValueError(f"map has {d} columns but the model has dimension {m.d}")
    prod = xi.entries[:, :, np.newaxis] * m.nu[np.newaxis, :, :]
    new_nu = xi.semiring.add_reduce(prod, axis=1)
    return build_model(new_nu, m.mu, m.family, m.alpha)


def max_stable_cdf(m: SpectralModel, x) -> float:
    """P(X <= x) = exp(-sum_j (max_i nu_ij / x_i)^alpha mu_j^alpha)."""
    if m.family.kind is not FamilyKind.FRECHET:
        raise ValueError("the cdf applies to frechet models only")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape[0] != m.d or np.any(x <= 0):
        raise ValueError("x must be strictly positive with one entry per coordinate")
    rates = np.max(m.nu / x[:, np.newaxis], axis=0)
    return float(np.exp(-np.sum((rates * m.mu) ** m.alpha)))


def scale_coefficients(m: SpectralModel) -> np.ndarray:
    """Margin scales lambda_i = sum_j nu_ij mu_j (alpha = 1 only)."""
    if m.family.kind is not FamilyKind.FRECHET or m.alpha != 1.0:
        raise ValueError("scale coefficients are defined for frechet alpha = 1")
    return m.nu @ m.mu


def to_angular_measure(m: SpectralModel, q: float = 1.0) -> AngularMeasure:
    """Atoms nu_j / |nu_j|_q with masses |nu_j|_q mu_j on the q-sphere."""
    if m.family.kind is not FamilyKind.FRECHET or m.alpha != 1.0:
        raise ValueError("the angular measure is defined for frechet alpha = 1")
    if q < 1:
        raise ValueError("q must be at least 1")
    norms = _qnorm(m.nu, q)
    if np.any(norms == 0):
        raise ValueError("all-zero atom column")
    return AngularMeasure((m.nu / norms).T, norms * m.mu, q)


def sample_model(m: SpectralModel, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``count`` rows of X_i = max_j nu_ij W_j, W_j frechet(mu_j, alpha)."""
    if m.family.kind is not FamilyKind.FRECHET:
        raise ValueError("sampling is implemented for frechet models")
    if count < 0:
        raise ValueError("count must be nonnegative")
    u = rng.uniform(size=(count, m.n))
    w = (-np.log(u)) ** (-1.0 / m.alpha) * m.mu[np.newaxis, :]
    return np.max(w[:, np.newaxis, :] * m.nu[np.newaxis, :, :], axis=2)


def zero_like(m: SpectralModel) -> SpectralModel:
    """Zero random vector on the same drivers (raw model, not normalised)."""
    return SpectralModel(np.zeros_like(m.nu), m.mu, m.family, m.alpha)
