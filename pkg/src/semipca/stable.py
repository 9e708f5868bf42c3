"""Stable distribution families: scale parameters, combination, sampling.

Each family is indexed by a scale parameter living in a semiring; the
family is closed under scaling maps and under combining independent
copies, with the combined scale given by :func:`circ_combine`.

Families
--------
* ``FRECHET``: Frechet margins exp(-(scale/x)^alpha) on the max-times
  semiring; combining means taking maxima.
* ``SYM_ALPHA_STABLE``: symmetric alpha-stable laws on plus-times;
  alpha = 2 is the Gaussian case (S_2(sigma) has variance 2 sigma^2),
  alpha = 1 the Cauchy case.
* ``GAUSSIAN_MATRIX``: k-variate Gaussians indexed by k x k matrices A;
  the law only depends on A A^T.
* ``REGRESSION_LK``: the subsemiring of block matrices encoding a linear
  regression of one response on k-1 predictors.  Closure under
  combination is not available in general, so no combination rule is
  provided.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .semiring import MAX_TIMES, PLUS_TIMES, SemiringSpec


class FamilyKind(enum.Enum):
    SYM_ALPHA_STABLE = "sym-alpha-stable"
    FRECHET = "frechet"
    GAUSSIAN_MATRIX = "gaussian-matrix"
    REGRESSION_LK = "regression-lk"


@dataclass(frozen=True)
class StableFamily:
    kind: FamilyKind
    alpha: float | None = None
    k: int | None = None

    def __post_init__(self):
        if self.kind is FamilyKind.SYM_ALPHA_STABLE:
            if self.alpha is None or not 0 < self.alpha <= 2:
                raise ValueError("sym-alpha-stable requires alpha in (0, 2]")
        elif self.kind is FamilyKind.FRECHET:
            if self.alpha is None or self.alpha <= 0:
                raise ValueError("frechet requires alpha > 0")
        elif self.kind is FamilyKind.GAUSSIAN_MATRIX:
            if self.k is None or self.k < 1:
                raise ValueError("gaussian-matrix requires k >= 1")
        elif self.kind is FamilyKind.REGRESSION_LK:
            if self.k is None or self.k < 2:
                raise ValueError("regression-lk requires k >= 2")

    @property
    def semiring(self) -> SemiringSpec:
        if self.kind is FamilyKind.FRECHET:
            return MAX_TIMES
        return PLUS_TIMES

    @property
    def is_scalar(self) -> bool:
        return self.kind in (FamilyKind.SYM_ALPHA_STABLE, FamilyKind.FRECHET)

    @property
    def effective_alpha(self) -> float:
        """Stability index used by variation/combination rules."""
        if self.is_scalar:
            return self.alpha
        return 2.0  # matrix families are Gaussian-built


def frechet(alpha: float = 1.0) -> StableFamily:
    return StableFamily(FamilyKind.FRECHET, alpha=alpha)


def sym_alpha_stable(alpha: float) -> StableFamily:
    return StableFamily(FamilyKind.SYM_ALPHA_STABLE, alpha=alpha)


def gaussian_matrix(k: int) -> StableFamily:
    return StableFamily(FamilyKind.GAUSSIAN_MATRIX, k=k)


def regression_lk(k: int) -> StableFamily:
    return StableFamily(FamilyKind.REGRESSION_LK, k=k)


# --------------------------------------------------------------------------
# scale parameters


def validate_scale(fam: StableFamily, scale) -> np.ndarray | float:
    """Check a scale parameter against its family and return it normalised."""
    if fam.is_scalar:
        val = float(scale)
        if val < 0:
            raise ValueError("scalar scale parameters must be nonnegative")
        return val
    A = np.asarray(scale, dtype=float)
    if A.shape != (fam.k, fam.k):
        raise ValueError(f"expected a {fam.k}x{fam.k} matrix, got {A.shape}")
    if fam.kind is FamilyKind.REGRESSION_LK:
        _check_regression_block(A)
    return A


def regression_block(k: int, a_sigma: float, a_beta, a_mu: float) -> np.ndarray:
    """Assemble the k x k block matrix [[a_sigma, a_beta], [0, a_mu * I]]."""
    beta = np.asarray(a_beta, dtype=float).reshape(-1)
    if beta.shape[0] != k - 1:
        raise ValueError(f"a_beta must have length {k - 1}")
    A = np.zeros((k, k))
    A[0, 0] = a_sigma
    A[0, 1:] = beta
    A[1:, 1:] = a_mu * np.eye(k - 1)
    return A


def _check_regression_block(A: np.ndarray) -> None:
    k = A.shape[0]
    a_sigma = A[0, 0]
    a_mu = A[1, 1] if k > 1 else 0.0
    if a_sigma < 0 or a_mu < 0:
        raise ValueError("block entries a_sigma and a_mu must be nonnegative")
    if np.any(A[1:, 0] != 0):
        raise ValueError("lower-left block must be zero")
    if not np.array_equal(A[1:, 1:], a_mu * np.eye(k - 1)):
        raise ValueError("lower-right block must be a_mu times the identity")
    if a_mu == 0 and (a_sigma != 0 or np.any(A[0, 1:] != 0)):
        raise ValueError("a_mu = 0 forces a_sigma = 0 and a_beta = 0")


def psd_sqrt(M: np.ndarray, clip: float = 1e-12) -> np.ndarray:
    """Symmetric PSD square root; eigenvalues in [-clip, 0] are clamped."""
    M = np.asarray(M, dtype=float)
    vals, vecs = np.linalg.eigh((M + M.T) / 2.0)
    if np.any(vals < -clip):
        raise ValueError("matrix is not positive semidefinite")
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.T


def circ_combine(fam: StableFamily, a, b):
    """Scale of the combination of independent variables with scales a, b.

    Scalar families: (a^alpha + b^alpha)^(1/alpha).  Matrix Gaussians:
    the PSD square root of A A^T + B B^T (any root works; laws only
    depend on A A^T).  The regression family has no closure guarantee,
    so combining its parameters is refused.
    """
    if fam.kind is FamilyKind.REGRESSION_LK:
        raise ValueError("the regression family is not closed under combination")
    a = validate_scale(fam, a)
    b = validate_scale(fam, b)
    if fam.is_scalar:
        al = fam.alpha
        return (a ** al + b ** al) ** (1.0 / al)
    return psd_sqrt(a @ a.T + b @ b.T)


def scale_transform(fam: StableFamily, m, x):
    """Apply the scaling map H_m to a realisation x."""
    if fam.is_scalar:
        m = float(m)
        if fam.kind is FamilyKind.FRECHET and m < 0:
            raise ValueError("frechet scaling multipliers must be nonnegative")
        return m * np.asarray(x, dtype=float) if np.ndim(x) else m * float(x)
    m = np.asarray(m, dtype=float)
    return m @ np.asarray(x, dtype=float)


def sample_scalar(fam: StableFamily, scale: float, rng: np.random.Generator,
                  size=None):
    """Draw from a scalar family.

    Frechet: scale * (-log U)^(-1/alpha).  Sum-stable laws have closed
    forms only at alpha = 2 (Gaussian, variance 2 scale^2) and alpha = 1
    (Cauchy); other alpha are rejected.
    """
    scale = validate_scale(fam, scale)
    if scale == 0.0:
        return np.zeros(size) if size is not None else 0.0
    if fam.kind is FamilyKind.FRECHET:
        u = rng.uniform(size=size)
        return scale * (-np.log(u)) ** (-1.0 / fam.alpha)
    if fam.kind is FamilyKind.SYM_ALPHA_STABLE:
        if fam.alpha == 2.0:
            return scale * np.sqrt(2.0) * rng.standard_normal(size=size)
        if fam.alpha == 1.0:
            return scale * rng.standard_cauchy(size=size)
        raise ValueError("sum-stable sampling implemented for alpha in {1, 2} only")
    raise ValueError("sampling is defined for scalar families only")


def frechet_cdf(x, scale: float, alpha: float = 1.0):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    if scale == 0.0:
        return np.where(x >= 0, 1.0, 0.0)
    out[pos] = np.exp(-((scale / x[pos]) ** alpha))
    return out


def regression_membership(A, ell: int) -> tuple[bool, bool]:
    """Locate a regression block in the simple/nested model families.

    With matrix columns indexed 1..k, position ``ell`` refers to column
    ell of the coefficient row, i.e. predictor ell - 1.  The simple
    family at ell allows only that predictor; the nested family allows
    predictors up to ell - 1.
    """
    A = np.asarray(A, dtype=float)
    k = A.shape[0]
    _check_regression_block(A)
    if not 1 <= ell <= k:
        raise ValueError(f"ell must be in 1..{k}")
    beta = A[0, 1:]
    used = np.nonzero(beta != 0)[0] + 2  # matrix column indices of used predictors
    in_simple = all(j == ell for j in used)
    in_nested = all(j <= ell for j in used)
    return in_simple, in_nested
