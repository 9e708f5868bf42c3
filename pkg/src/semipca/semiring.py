"""Semiring arithmetic and semimodule operations.

Two semirings are supported:

* max-times: the set [0, inf) with addition a (+) b = max(a, b) and
  ordinary multiplication.  This is the algebra driving the max-stable
  machinery; (0, inf) is a group under multiplication, which makes
  span membership decidable by residuation.
* plus-times: the reals with ordinary addition and multiplication,
  hosting the Gaussian/regression computations.

Vectors and matrices over a semiring are thin wrappers around numpy
arrays; all operations are pure.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

import numpy as np

REL_TOL = 1e-12


class SemiringKind(enum.Enum):
    MAX_TIMES = "max-times"
    PLUS_TIMES = "plus-times"


@dataclass(frozen=True)
class SemiringSpec:
    """A commutative semiring on a subset of the reals.

    ``zero`` is absorbing for multiplication and neutral for addition,
    ``one`` is neutral for multiplication.
    """

    kind: SemiringKind

    @property
    def zero(self) -> float:
        return 0.0

    @property
    def one(self) -> float:
        return 1.0

    def validate(self, a) -> None:
        arr = np.asarray(a, dtype=float)
        if np.any(np.isnan(arr)):
            raise ValueError("NaN is not a semiring element")
        if self.kind is SemiringKind.MAX_TIMES and np.any(arr < 0):
            raise ValueError("max-times elements must be nonnegative")

    def add(self, a, b):
        if self.kind is SemiringKind.MAX_TIMES:
            return np.maximum(a, b)
        return np.add(a, b)

    def mul(self, a, b):
        return np.multiply(a, b)

    def add_reduce(self, arr, axis=None):
        if self.kind is SemiringKind.MAX_TIMES:
            return np.max(arr, axis=axis)
        return np.sum(arr, axis=axis)


MAX_TIMES = SemiringSpec(SemiringKind.MAX_TIMES)
PLUS_TIMES = SemiringSpec(SemiringKind.PLUS_TIMES)


@dataclass(frozen=True)
class SemiVector:
    entries: np.ndarray
    semiring: SemiringSpec = MAX_TIMES

    def __post_init__(self):
        arr = np.atleast_1d(np.asarray(self.entries, dtype=float))
        if arr.ndim != 1:
            raise ValueError("vector entries must be one-dimensional")
        self.semiring.validate(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "entries", arr)

    def __len__(self) -> int:
        return self.entries.shape[0]

    def is_zero(self) -> bool:
        return bool(np.all(self.entries == 0.0))


@dataclass(frozen=True)
class SemiMatrix:
    entries: np.ndarray
    semiring: SemiringSpec = MAX_TIMES

    def __post_init__(self):
        arr = np.atleast_2d(np.asarray(self.entries, dtype=float))
        if arr.ndim != 2:
            raise ValueError("matrix entries must be two-dimensional")
        self.semiring.validate(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "entries", arr)

    @property
    def shape(self):
        return self.entries.shape


def element_combine(op: str, a: float, b: float, s: SemiringSpec) -> float:
    """Combine two semiring elements, ``op`` one of ``"add"`` / ``"mul"``."""
    s.validate(a)
    s.validate(b)
    if op == "add":
        return float(s.add(a, b))
    if op == "mul":
        return float(s.mul(a, b))
    raise ValueError(f"unknown semiring operation {op!r}")


def mat_apply(H: SemiMatrix, x: SemiVector) -> SemiVector:
    """Matrix-vector product, entry i = (+)_j H[i,j] * x[j]."""
    if H.semiring.kind is not x.semiring.kind:
        raise ValueError("matrix and vector live in different semirings")
    p, d = H.shape
    if d != len(x):
        raise ValueError(f"shape mismatch: {H.shape} applied to length {len(x)}")
    prod = H.entries * x.entries[np.newaxis, :]
    return SemiVector(H.semiring.add_reduce(prod, axis=1), H.semiring)


def mat_product(A: SemiMatrix, B: SemiMatrix) -> SemiMatrix:
    """Matrix-matrix product in the common semiring."""
    if A.semiring.kind is not B.semiring.kind:
        raise ValueError("operands live in different semirings")
    p, d = A.shape
    d2, n = B.shape
    if d != d2:
        raise ValueError(f"shape mismatch: {A.shape} times {B.shape}")
    # (p, d, n) intermediate is fine at the sizes this library targets
    prod = A.entries[:, :, np.newaxis] * B.entries[np.newaxis, :, :]
    return SemiMatrix(A.semiring.add_reduce(prod, axis=1), A.semiring)


def preorder_leq(mode: str, a: float, b: float, s: SemiringSpec) -> bool:
    """Decide the canonical (a (+) g = b) or strict (a (+) g*b = b) preorder.

    Closed forms: in max-times both modes reduce to a <= b.  In
    plus-times the canonical relation always holds (g = b - a), and the
    strict one holds unless b = 0 and a != 0.
    """
    s.validate(a)
    s.validate(b)
    if mode not in ("canonical", "strict"):
        raise ValueError(f"unknown preorder mode {mode!r}")
    if s.kind is SemiringKind.MAX_TIMES:
        return a <= b
    if mode == "canonical":
        return True
    return b != 0.0 or a == 0.0


def _same(x: np.ndarray, y: np.ndarray) -> bool:
    # exact match when representable, 1e-12 relative otherwise
    if np.array_equal(x, y):
        return True
    return np.allclose(x, y, rtol=REL_TOL, atol=0.0)


def span_membership(v: SemiVector, basis: list[SemiVector], s: SemiringSpec):
    """Test whether ``v`` lies in the max-times span of ``basis``.

    Residuation: the largest candidate coefficient for basis vector b_k
    is c_k = min_i { v_i / b_ik : b_ik > 0 }; the combination with these
    coefficients dominates every other sub-solution, so v is in the span
    iff it reconstructs v.  Returns ``(True, coefficients)`` or
    ``(False, None)``.
    """
    if s.kind is not SemiringKind.MAX_TIMES:
        raise ValueError("span membership is only decidable in max-times")
    if not basis:
        raise ValueError("basis must be nonempty")
    d = len(v)
    coeffs = np.zeros(len(basis))
    for k, b in enumerate(basis):
        if len(b) != d:
            raise ValueError("basis vector length mismatch")
        if b.is_zero():
            raise ValueError("zero basis vector spans only {0}")
        pos = b.entries > 0
        coeffs[k] = np.min(v.entries[pos] / b.entries[pos])
    recon = np.zeros(d)
    for k, b in enumerate(basis):
        recon = np.maximum(recon, coeffs[k] * b.entries)
    if _same(recon, v.entries):
        return True, coeffs
    return False, None


def independence_check(vectors: list[SemiVector], s: SemiringSpec) -> bool:
    """True iff no vector lies in the max-times span of the others.

    Because (0, inf) is a group under multiplication, the spanning
    coefficient can be normalised to 1, so pairwise span-membership
    tests decide independence exactly.
    """
    if s.kind is not SemiringKind.MAX_TIMES:
        raise ValueError("independence check is only decidable in max-times")
    for v in vectors:
        if v.is_zero():
            raise ValueError("zero vector is never independent")
    if len(vectors) < 2:
        return True
    for k, v in enumerate(vectors):
        rest = [w for i, w in enumerate(vectors) if i != k]
        member, _ = span_membership(v, rest, s)
        if member:
            return False
    return True


def cross_ratio_ordering(x1: SemiVector, x2: SemiVector, x3: SemiVector,
                         s: SemiringSpec):
    """Order three plane vectors by cross products under the strict preorder.

    Finds a permutation ``pi`` of (0, 1, 2) and ``k`` in {0, 1} such that,
    writing y_i = x_{pi(i)},

        y_0[1-k] * y_2[k]  <=  y_0[k] * y_2[1-k]
        y_1[k] * y_2[1-k]  <=  y_1[1-k] * y_2[k]

    in the strict preorder of ``s``.  A solution exists for every triple
    over a strictly preordered semiring; the 12-case search failing is a
    bug, not an input error.
    """
    xs = [x1, x2, x3]
    for x in xs:
        if len(x) != 2:
            raise ValueError("vectors must be two-dimensional")
    for pi in itertools.permutations(range(3)):
        y = [xs[i].entries for i in pi]
        for k in (0, 1):
            first = preorder_leq("strict", y[0][1 - k] * y[2][k],
                                 y[0][k] * y[2][1 - k], s)
            second = preorder_leq("strict", y[1][k] * y[2][1 - k],
                                  y[1][1 - k] * y[2][k], s)
            if first and second:
                return pi, k
    raise RuntimeError("no ordering found; the 12-case search is broken")


def moment_curve_family(n: int, delta: float,
                        s: SemiringSpec = MAX_TIMES) -> list[SemiVector]:
    """Vectors (1, delta^i, delta^(2i)), i = 1..n, on the moment curve in R^3.

    For delta > 2 the family is independent in max-times for every n,
    exhibiting a rank-n subsemimodule of a rank-3 space.  Smaller delta
    (e.g. delta = 1) collapses the family.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if n < 1:
        raise ValueError("n must be at least 1")
    out = []
    for i in range(1, n + 1):
        out.append(SemiVector(np.array([1.0, delta ** i, delta ** (2 * i)]), s))
    return out
