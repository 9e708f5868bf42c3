"""The variation, semi-scalar product and associated semi-metric.

The variation generalises the variance: it is additive under combination
of independent variables and, for the scalar families here, scale
invariant with closed form |scale|^alpha.  For vectors the component-sum
rule is used throughout.  With denom = [[1 (+) 1]] - 2 (nonzero except in
the Cauchy case), the semi-scalar product of two vectors on a joint
driver representation is

    <X, Y> = ([[X (.) Y]] - [[X]] - [[Y]]) / denom

and the associated semi-metric is rho(X, Y) = [[X]] + [[Y]] - 2 <X, Y>.
For Frechet alpha = 1 these reduce to sum_ij min(a, b) mu_j and
sum_j mu_j |a_j - b_j|_1 respectively.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .semiring import SemiringKind
from .spectral import SpectralModel
from .stable import FamilyKind, StableFamily, validate_scale


class CauchyDenominatorError(ValueError):
    """Sum-stable alpha = 1 makes [[1 + 1]] - 2 vanish; no semi-scalar product."""


@dataclass(frozen=True)
class VariationSpec:
    family: StableFamily
    # the vector rule is fixed: variation of a vector = sum over components

    def one_plus_one(self) -> float:
        """[[1 (+) 1]] for the family's semiring addition."""
        if self.family.semiring.kind is SemiringKind.MAX_TIMES:
            return 1.0  # max(1, 1) = 1
        return 2.0 ** self.family.effective_alpha

    def denominator(self) -> float:
        denom = self.one_plus_one() - 2.0
        if denom == 0.0:
            raise CauchyDenominatorError(
                "sum-stable alpha = 1 (Cauchy) has [[1 + 1]] = 2; "
                "the semi-scalar product is undefined")
        return denom


def variation_scalar(v: VariationSpec, mu) -> float:
    """Variation of a scale parameter: |mu|^alpha, or tr(A A^T) for matrices."""
    mu = validate_scale(v.family, mu)
    if v.family.is_scalar:
        return abs(mu) ** v.family.alpha
    return float(np.trace(mu @ mu.T))


def _check_model(v: VariationSpec, m: SpectralModel) -> None:
    if m.family.kind is not v.family.kind:
        raise ValueError("model family does not match the variation spec")


def variation_model(v: VariationSpec, m: SpectralModel,
                    rule: str = "component-sum") -> float:
    """Variation of a model, sum_i sum_j (nu_ij mu_j)^alpha.

    ``rule="sup-norm"`` evaluates the rejected alternative
    sum_j (mu_j max_i nu_ij)^alpha (the extremal coefficient for
    alpha = 1).  It exists for demonstration only; every solver and
    metric in this package uses the component-sum rule.
    """
    _check_model(v, m)
    alpha = m.alpha
    scaled = m.nu * m.mu[np.newaxis, :]
    if rule == "component-sum":
        return float(np.sum(scaled ** alpha))
    if rule == "sup-norm":
        return float(np.sum(np.max(scaled, axis=0) ** alpha))
    raise ValueError(f"unknown vector variation rule {rule!r}")


def _joint(v: VariationSpec, mA: SpectralModel, mB: SpectralModel) -> None:
    _check_model(v, mA)
    _check_model(v, mB)
    if mA.alpha != mB.alpha or mA.d != mB.d or mA.n != mB.n:
        raise ValueError("models are not on a joint representation")
    if not np.array_equal(mA.mu, mB.mu):
        raise ValueError("joint representation requires identical atom weights")


def semi_scalar(v: VariationSpec, mA: SpectralModel, mB: SpectralModel) -> float:
    """Semi-scalar product of two models sharing their drivers."""
    _joint(v, mA, mB)
    denom = v.denominator()
    combined = SpectralModel(v.family.semiring.add(mA.nu, mB.nu), mA.mu,
                             mA.family, mA.alpha)
    num = (variation_model(v, combined) - variation_model(v, mA)
           - variation_model(v, mB))
    return num / denom


def assoc_semi_metric(v: VariationSpec, mA: SpectralModel,
                      mB: SpectralModel) -> float:
    """rho(X, Y) = [[X]] + [[Y]] - 2 <X, Y> on a joint representation."""
    value = (variation_model(v, mA) + variation_model(v, mB)
             - 2.0 * semi_scalar(v, mA, mB))
    # the closed forms are nonnegative termwise; clip rounding dust
    return max(value, 0.0)


def frechet_semi_scalar(mA: SpectralModel, mB: SpectralModel) -> float:
    """Closed form for frechet alpha = 1: sum_ij min(a, b) mu_j."""
    return float(np.sum(np.minimum(mA.nu, mB.nu) * mA.mu[np.newaxis, :]))


def frechet_semi_metric(mA: SpectralModel, mB: SpectralModel) -> float:
    """Closed form for frechet alpha = 1: sum_j mu_j |a_j - b_j|_1."""
    return float(np.sum(np.abs(mA.nu - mB.nu) * mA.mu[np.newaxis, :]))
