"""Fitting a spectral model from multivariate i.i.d. samples.

Margins are fitted by closed-form maximum likelihood with the shape
alpha supplied by the caller (never estimated).  The angular measure is
estimated from threshold exceedances: standardise the margins, keep the
k observations with the largest q-radius, project them to the q-sphere,
map the directions back to the original scale and rescale all masses so
the aggregate identity sum_i lambda_i = integral of |u|_1 is exact.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .spectral import AngularMeasure, SpectralModel, _qnorm, build_model
from .stable import frechet

MIN_OBSERVATIONS = 20
ATOM_MERGE_TOL = 1e-2


@dataclass(frozen=True)
class SampleMatrix:
    rows: np.ndarray    # m observations x d coordinates, strictly positive

    def __post_init__(self):
        arr = np.atleast_2d(np.asarray(self.rows, dtype=float))
        if arr.ndim != 2:
            raise ValueError("samples must form an m x d matrix")
        if np.any(~np.isfinite(arr)) or np.any(arr <= 0):
            raise ValueError("sample entries must be finite and strictly positive")
        if arr.shape[0] < MIN_OBSERVATIONS:
            raise ValueError(f"need at least {MIN_OBSERVATIONS} observations")
        arr.flags.writeable = False
        object.__setattr__(self, "rows", arr)

    @property
    def m(self) -> int:
        return self.rows.shape[0]

    @property
    def d(self) -> int:
        return self.rows.shape[1]


def read_sample_csv(path) -> SampleMatrix:
    """CSV ingestion: optional header, one observation per line.

    Rejects NaN and nonpositive values with line-numbered errors.
    """
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for lineno, rec in enumerate(reader, start=1):
            if not rec or all(not cell.strip() for cell in rec):
                continue
            try:
                vals = [float(cell) for cell in rec]
            except ValueError:
                if lineno == 1:
                    continue  # header row
                raise ValueError(f"line {lineno}: non-numeric value") from None
            if any(math.isnan(v) for v in vals):
                raise ValueError(f"line {lineno}: NaN value")
            if any(v <= 0 for v in vals):
                raise ValueError(f"line {lineno}: nonpositive value")
            rows.append(vals)
    if not rows:
        raise ValueError("no data rows found")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValueError("ragged rows in CSV input")
    return SampleMatrix(np.asarray(rows))


def fit_frechet_scale(x, alpha: float = 1.0) -> float:
    """Closed-form MLE of the frechet scale with known shape alpha.

    The likelihood in lambda has the unique stationary point
    lambda = (m / sum x_i^(-alpha))^(1/alpha).
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    if np.any(x <= 0):
        raise ValueError("data must be strictly positive")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return float((x.shape[0] / np.sum(x ** (-alpha))) ** (1.0 / alpha))


def estimate_angular_measure(s: SampleMatrix, alpha: float = 1.0,
                             q: float = 1.0, k: int = 100) -> AngularMeasure:
    """Threshold-exceedance estimator of the angular measure.

    ``k`` is the number of largest-radius observations retained;
    1 <= k <= m/4 keeps the threshold genuinely in the tail.
    """
    if not 1 <= k <= s.m // 4:
        raise ValueError(f"k must be in 1..{s.m // 4}")
    if q < 1:
        raise ValueError("q must be at least 1")
    scales = np.array([fit_frechet_scale(s.rows[:, i], alpha)
                       for i in range(s.d)])
    std = s.rows / scales[np.newaxis, :]
    radii = _qnorm(std.T, q)
    order = np.argsort(radii)[::-1][:k]
    std_atoms = std[order] / radii[order][:, np.newaxis]

    # back to the original scale; one exceedance = one unit of raw mass
    raw = std_atoms * scales[np.newaxis, :]
    norms = _qnorm(raw.T, q)
    atoms = raw / norms[:, np.newaxis]
    masses = norms.copy()

    atoms, masses = _merge_atoms(atoms, masses, q)

    # enforce sum_i lambda_i = sum_l mass_l |u_l|_1 exactly
    target = float(np.sum(scales))
    current = float(np.sum(masses * np.sum(atoms, axis=1)))
    masses = masses * (target / current)
    return AngularMeasure(atoms, masses, q)


def _merge_atoms(atoms: np.ndarray, masses: np.ndarray, q: float):
    """Greedy clustering of near-duplicate directions (L1 tolerance)."""
    reps: list[np.ndarray] = []
    wsum: list[float] = []
    for u, w in zip(atoms, masses):
        for i, r in enumerate(reps):
            if np.sum(np.abs(u - r)) <= ATOM_MERGE_TOL:
                merged = (wsum[i] * r + w * u) / (wsum[i] + w)
                reps[i] = merged / _qnorm(merged[:, np.newaxis], q)[0]
                wsum[i] += w
                break
        else:
            reps.append(u)
            wsum.append(float(w))
    return np.asarray(reps), np.asarray(wsum)


def fit_spectral_model(s: SampleMatrix, alpha: float = 1.0, q: float = 1.0,
                       k: int = 100) -> SpectralModel:
    """Compose margin fits and the angular estimator into a model."""
    ang = estimate_angular_measure(s, alpha=alpha, q=q, k=k)
    # an atom u with mass w on the q-sphere is the column nu = u, mu = w
    return build_model(ang.atoms.T, ang.weights, frechet(alpha), alpha)
