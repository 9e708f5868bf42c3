"""PCA variants for max-stable spectral models, plus the classic Gaussian case.

The loss is the associated semi-metric.  For a frechet alpha = 1 model
with angular atoms u_j and masses w_j, approximating by the max-times
span of basis columns b_1..b_p costs

    J(b) = sum_j w_j * f_b(u_j),    f_b(u) = min_{c >= 0} | u - max_k c_k b_k |_1,

so the inner problem is a piecewise-linear L1 projection onto a
max-times cone.  The inner objective is exactly minimisable in one
coordinate at a time (all kinks are enumerable), which drives both the
projection solver and the alternating factorisation solver below.
"""

from __future__ import annotations

import itertools
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .spectral import SpectralModel, to_angular_measure
from .stable import FamilyKind, StableFamily


# --------------------------------------------------------------------------
# basis and result containers


def _qnormalize(columns: np.ndarray, q: float) -> np.ndarray:
    if math.isinf(q):
        norms = np.max(columns, axis=0)
    else:
        norms = np.sum(columns ** q, axis=0) ** (1.0 / q)
    if np.any(norms == 0):
        raise ValueError("zero basis column")
    return columns / norms


@dataclass(frozen=True)
class PrincipalBasis:
    """p candidate directions, columns normalised to q-norm 1.

    Rescaling a column does not change the projection cost, so the
    normalisation just removes a flat direction from the search space.
    """

    vectors: np.ndarray     # d x p
    q: float = math.inf

    def __post_init__(self):
        arr = np.asarray(self.vectors, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, np.newaxis]
        if np.any(arr < 0):
            raise ValueError("basis entries must be nonnegative")
        arr = _qnormalize(arr, self.q)
        arr.flags.writeable = False
        object.__setattr__(self, "vectors", arr)

    @property
    def d(self) -> int:
        return self.vectors.shape[0]

    @property
    def p(self) -> int:
        return self.vectors.shape[1]


@dataclass(frozen=True)
class AtomFit:
    index: int
    mass: float
    distance: float
    coefficients: np.ndarray


@dataclass(frozen=True)
class Diagnostics:
    restarts: int
    best_restart: int
    converged: bool
    stage_objectives: tuple = ()


@dataclass(frozen=True)
class PcaSolution:
    basis: PrincipalBasis
    objective: float
    per_atom: tuple
    diagnostics: Diagnostics


@dataclass(frozen=True)
class FactorSolution:
    h1: np.ndarray          # d x p
    h2: np.ndarray          # p x d
    objective: float
    diagnostics: Diagnostics

    @property
    def reconstruction_map(self) -> np.ndarray:
        prod = self.h1[:, :, np.newaxis] * self.h2[np.newaxis, :, :]
        return np.max(prod, axis=1)


@dataclass(frozen=True)
class SolverConfig:
    restarts: int = 8
    max_iters: int = 200
    tol: float = 1e-9
    seed: int = 0
    grid_resolution: int = 200
    threads: int = 1

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")


# --------------------------------------------------------------------------
# exact one-dimensional steps

def _pwl_min(w: np.ndarray, target: np.ndarray, slope: np.ndarray,
             floor: np.ndarray) -> tuple[float, float]:
    """Minimise phi(t) = sum_m w_m |target_m - max(slope_m t, floor_m)| over t >= 0.

    phi is piecewise linear with kinks only where slope_m t meets
    target_m or floor_m, so evaluating every kink (plus t = 0) is exact.
    Returns (t*, phi(t*)); ties pick the smallest t.
    """
    pos = slope > 0
    cands = [np.array([0.0])]
    if np.any(pos):
        cands.append(target[pos] / slope[pos])
        cands.append(floor[pos] / slope[pos])
    t = np.unique(np.concatenate(cands))
    t = t[t >= 0]
    recon = np.maximum(slope[np.newaxis, :] * t[:, np.newaxis],
                       floor[np.newaxis, :])
    vals = np.sum(w[np.newaxis, :] * np.abs(target[np.newaxis, :] - recon), axis=1)
    best = int(np.argmin(vals))  # argmin returns the first (smallest t)
    return float(t[best]), float(vals[best])


def inner_distance(u, basis: PrincipalBasis,
                   coef_seeds=None) -> tuple[float, np.ndarray]:
    """L1 distance from u to the max-times span of the basis columns.

    p = 1 is solved exactly by enumerating the kinks of the
    one-dimensional objective.  For p >= 2 the kink enumeration becomes
    an exact coordinate step inside a cyclic descent, restarted from the
    joint residuation seed, the p single-column exact solutions, and
    (for p = 2) all kink/best-response pairs; the best local minimum
    found is returned together with its coefficients.
    """
    u = np.asarray(u, dtype=float).reshape(-1)
    B = basis.vectors
    d, p = B.shape
    if u.shape[0] != d:
        raise ValueError("u has the wrong dimension")
    if np.any(u < 0):
        raise ValueError("u must be nonnegative")
    ones = np.ones(d)

    def step(c: np.ndarray, k: int) -> tuple[float, float]:
        if p == 1:
            rest = np.zeros(d)
        else:
            others = np.delete(B * c[np.newaxis, :], k, axis=1)
            rest = np.max(others, axis=1)
        return _pwl_min(ones, u, B[:, k], rest)

    def value(c: np.ndarray) -> float:
        return float(np.sum(np.abs(u - np.max(B * c[np.newaxis, :], axis=1))))

    def descend(c: np.ndarray) -> tuple[float, np.ndarray]:
        c = c.copy()
        obj = value(c)
        for _ in range(100):
            improved = False
            for k in range(p):
                t, val = step(c, k)
                if val < obj - 1e-15:
                    c[k] = t
                    obj = val
                    improved = True
                elif val <= obj:
                    c[k] = t  # keep the canonical kink coefficient
                    obj = val
            if not improved:
                break
        return obj, c

    if p == 1:
        t, val = step(np.zeros(1), 0)
        return val, np.array([t])

    seeds = []
    resid = np.zeros(p)
    for k in range(p):
        pos = B[:, k] > 0
        resid[k] = np.min(u[pos] / B[pos, k]) if np.any(pos) else 0.0
    seeds.append(resid)
    for k in range(p):
        c = np.zeros(p)
        c[k], _ = step(c, k)
        seeds.append(c)
    if p == 2:
        pos = B[:, 0] > 0
        for t0 in np.concatenate([[0.0], u[pos] / B[pos, 0]]):
            c = np.array([t0, 0.0])
            c[1], _ = step(c, 1)
            seeds.append(c)
    if coef_seeds is not None:
        seeds.extend(np.asarray(c, dtype=float).reshape(p) for c in coef_seeds)

    best_obj, best_c = math.inf, None
    for c0 in seeds:
        obj, c = descend(c0)
        if obj < best_obj - 1e-15:
            best_obj, best_c = obj, c
    return best_obj, best_c


# --------------------------------------------------------------------------
# objective evaluation


def _require_frechet1(m: SpectralModel) -> None:
    if m.family.kind is not FamilyKind.FRECHET or m.alpha != 1.0:
        raise ValueError("max-stable PCA is defined for frechet alpha = 1 models")


def per_atom_fits(m: SpectralModel, basis: PrincipalBasis) -> tuple:
    _require_frechet1(m)
    ang = to_angular_measure(m, q=basis.q if not math.isinf(basis.q) else 1.0)
    fits = []
    for j in range(ang.atoms.shape[0]):
        dist, coeffs = inner_distance(ang.atoms[j], basis)
        fits.append(AtomFit(j, float(ang.weights[j]), dist, coeffs))
    return tuple(fits)


def pca_objective(m: SpectralModel, basis: PrincipalBasis) -> float:
    """sum_j mass_j f_b(atom_j); invariant under the choice of atom norm."""
    return float(sum(f.mass * f.distance for f in per_atom_fits(m, basis)))


# --------------------------------------------------------------------------
# exhaustive and forward solvers


def _atoms_masses(m: SpectralModel):
    # the objective is norm-invariant, so work on the raw model columns
    return m.nu.T.copy(), m.mu.copy()


def _basis_objective(atoms: np.ndarray, masses: np.ndarray,
                     B: np.ndarray) -> float:
    pb = PrincipalBasis(B, q=math.inf)
    total = 0.0
    for j in range(atoms.shape[0]):
        dist, _ = inner_distance(atoms[j], pb)
        total += masses[j] * dist
    return total


def _refine(atoms, masses, B, free_cols, max_iters):
    """Greedy coordinate moves with shrinking step on the sup-norm sphere."""
    B = _qnormalize(B.copy(), math.inf)
    obj = _basis_objective(atoms, masses, B)
    step = 0.5
    sweeps = 0
    while step >= 1e-4 and sweeps < max_iters:
        sweeps += 1
        improved = False
        for k in free_cols:
            for i in range(B.shape[0]):
                for sgn in (1.0, -1.0):
                    cand = B.copy()
                    cand[i, k] = max(cand[i, k] + sgn * step, 0.0)
                    if np.max(cand[:, k]) == 0.0:
                        continue
                    cand[:, k] /= np.max(cand[:, k])
                    val = _basis_objective(atoms, masses, cand)
                    if val < obj - 1e-13:
                        B, obj = cand, val
                        improved = True
        if not improved:
            step /= 2.0
    return obj, B, step < 1e-4


def _map_seeds(fn, seeds, threads: int):
    if threads <= 1 or len(seeds) <= 1:
        return [fn(s) for s in seeds]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, seeds))


def _select_best(results):
    """Deterministic reduction: objective, then lexicographic basis, then index."""
    keyed = [(obj, tuple(B.reshape(-1)), idx, B)
             for idx, (obj, B) in enumerate(results)]
    keyed.sort(key=lambda t: (t[0], t[1], t[2]))
    obj, _, idx, B = keyed[0]
    return obj, B, idx


def _atom_seed_bases(atoms: np.ndarray, p: int, rng: np.random.Generator,
                     cap: int = 60) -> list[np.ndarray]:
    n = atoms.shape[0]
    idx_sets: list[tuple]
    if p <= n and math.comb(n, p) <= cap:
        idx_sets = list(itertools.combinations(range(n), p))
    else:
        idx_sets = []
        for _ in range(cap):
            idx_sets.append(tuple(rng.integers(0, n, size=p)))
    bases = []
    for idx in idx_sets:
        cols = atoms[list(idx)].T
        if np.all(np.max(cols, axis=0) > 0):
            bases.append(_qnormalize(cols, math.inf))
    return bases


def exhaustive_pca(m: SpectralModel, p: int,
                   cfg: SolverConfig = SolverConfig(),
                   extra_seeds=None) -> PcaSolution:
    """Free search for p basis columns on the sup-norm sphere.

    Multistart local search: seeds are the model's own atom directions
    (all p-subsets up to a cap), random sphere draws, and any caller
    supplied bases; each seed is refined by greedy coordinate moves with
    shrinking step.  Deterministic for a fixed config seed.
    """
    _require_frechet1(m)
    if p < 1:
        raise ValueError("p must be at least 1")
    if p > m.d:
        warnings.warn(f"p = {p} exceeds the dimension d = {m.d}")
    atoms, masses = _atoms_masses(m)
    rng = np.random.default_rng(cfg.seed)
    seeds = _atom_seed_bases(atoms, p, rng)
    for _ in range(cfg.restarts):
        seeds.append(_qnormalize(rng.uniform(0.05, 1.0, size=(m.d, p)), math.inf))
    if extra_seeds is not None:
        seeds.extend(_qnormalize(np.asarray(b, dtype=float).reshape(m.d, p), math.inf)
                     for b in extra_seeds)

    results = _map_seeds(
        lambda B: _refine(atoms, masses, B, range(p), cfg.max_iters),
        seeds, cfg.threads)
    obj, B, idx = _select_best(results)
    basis = PrincipalBasis(B, q=math.inf)
    fits = per_atom_fits(m, basis)
    return PcaSolution(basis, float(sum(f.mass * f.distance for f in fits)), fits,
                       Diagnostics(len(seeds), idx, True))


def forward_pca(m: SpectralModel, p: int,
                cfg: SolverConfig = SolverConfig()) -> PcaSolution:
    """Nested search: stage k reoptimises only column k, keeping 1..k-1.

    Stage 1 coincides with the exhaustive solver at p = 1.  Each stage
    seeds the free column with every atom direction, random draws and a
    copy of the previous column, so stage objectives never increase.
    """
    _require_frechet1(m)
    if p < 1:
        raise ValueError("p must be at least 1")
    atoms, masses = _atoms_masses(m)
    stage_objs = []
    sol = exhaustive_pca(m, 1, cfg)
    stage_objs.append(sol.objective)
    B = sol.basis.vectors.copy()
    rng = np.random.default_rng(cfg.seed + 1)
    best_idx = sol.diagnostics.best_restart
    for k in range(1, p):
        cols = [atoms[j] for j in range(atoms.shape[0]) if np.max(atoms[j]) > 0]
        cols.append(B[:, k - 1].copy())
        for _ in range(cfg.restarts):
            cols.append(rng.uniform(0.05, 1.0, size=m.d))
        seeds = []
        for col in cols:
            cand = np.column_stack([B, col])
            seeds.append(_qnormalize(cand, math.inf))
        results = _map_seeds(
            lambda Bk, k=k: _refine(atoms, masses, Bk, [k], cfg.max_iters),
            seeds, cfg.threads)
        obj, B, best_idx = _select_best(results)
        stage_objs.append(obj)
    basis = PrincipalBasis(B, q=math.inf)
    fits = per_atom_fits(m, basis)
    return PcaSolution(basis, float(sum(f.mass * f.distance for f in fits)), fits,
                       Diagnostics(len(stage_objs), best_idx, True,
                                   tuple(stage_objs)))


# --------------------------------------------------------------------------
# linearly inferable (factor) solver


def _mt_prod(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return np.max(A[:, :, np.newaxis] * B[np.newaxis, :, :], axis=1)


def _residuate(A: np.ndarray, M: np.ndarray) -> np.ndarray:
    """Largest G with A (x) G <= M entrywise (max-times residuation)."""
    p = A.shape[1]
    n = M.shape[1]
    G = np.full((p, n), np.inf)
    for k in range(p):
        pos = A[:, k] > 0
        if np.any(pos):
            G[k] = np.min(M[pos] / A[pos, k][:, np.newaxis], axis=0)
        else:
            G[k] = 0.0
    return G


def _factor_objective(nu, mu, H1, H2) -> float:
    recon = _mt_prod(H1, _mt_prod(H2, nu))
    return float(np.sum(np.abs(nu - recon) * mu[np.newaxis, :]))


def _factor_descend(nu, mu, H1, H2, max_iters) -> tuple[float, np.ndarray, np.ndarray]:
    d, n = nu.shape
    p = H1.shape[1]
    obj = _factor_objective(nu, mu, H1, H2)
    for _ in range(max_iters):
        improved = False
        G = _mt_prod(H2, nu)
        # one exact sweep over H1; rows are independent given G
        for i in range(d):
            for k in range(p):
                if p == 1:
                    rest = np.zeros(n)
                else:
                    rest = np.max(np.delete(H1[i] [:, np.newaxis] * G, k, axis=0),
                                  axis=0)
                t, _ = _pwl_min(mu, nu[i], G[k], rest)
                H1[i, k] = t
        # exact sweep over H2
        for k in range(p):
            for l in range(d):
                if d == 1:
                    s = np.zeros(n)
                else:
                    s = np.max(np.delete(H2[k][:, np.newaxis] * nu, l, axis=0),
                               axis=0)
                if p == 1:
                    rho = np.zeros((d, n))
                else:
                    others = np.delete(H1, k, axis=1)[:, :, np.newaxis] * \
                        np.delete(_mt_prod(H2, nu), k, axis=0)[np.newaxis, :, :]
                    rho = np.max(others, axis=1)
                slope = (H1[:, k][:, np.newaxis] * nu[l][np.newaxis, :]).reshape(-1)
                floor = np.maximum(H1[:, k][:, np.newaxis] * s[np.newaxis, :],
                                   rho).reshape(-1)
                t, _ = _pwl_min(np.repeat(mu[np.newaxis, :], d, axis=0).reshape(-1),
                                nu.reshape(-1), slope, floor)
                H2[k, l] = t
        val = _factor_objective(nu, mu, H1, H2)
        if val < obj - 1e-13:
            obj = val
            improved = True
        else:
            obj = min(obj, val)
        if not improved:
            break
    return obj, H1, H2


def barvinok_pca(m: SpectralModel, p: int,
                 cfg: SolverConfig = SolverConfig()) -> FactorSolution:
    """Reconstruction through a max-times map of Barvinok rank at most p.

    Minimises rho(X, H X) over H = H1 (x) H2 by alternating exact
    coordinate sweeps on the factors, multistarted from an identity
    seed, atom-column seeds and random seeds (each completed by
    max-times residuation, which never overshoots the target).
    """
    _require_frechet1(m)
    if p < 1:
        raise ValueError("p must be at least 1")
    if p > m.d:
        warnings.warn(f"p = {p} exceeds d = {m.d}; the map is unrestricted at p = d")
    nu, mu = m.nu, m.mu
    d = m.d
    rng = np.random.default_rng(cfg.seed)

    def completed(H1):
        G = _residuate(H1, nu)          # largest G with H1 G <= nu
        H2 = _residuate(nu.T, G.T).T    # largest H2 with H2 nu <= G
        return H1, H2

    seeds = []
    eye = np.eye(d)[:, :p] if p <= d else np.pad(np.eye(d), ((0, 0), (0, p - d)))
    seeds.append(completed(eye.copy()))
    for combo in _atom_seed_bases(nu.T, min(p, nu.shape[1]), rng, cap=30):
        H1 = combo
        if H1.shape[1] < p:
            H1 = np.pad(H1, ((0, 0), (0, p - H1.shape[1])))
        seeds.append(completed(H1.copy()))
    for _ in range(cfg.restarts):
        seeds.append(completed(rng.uniform(0.05, 1.0, size=(d, p))))

    results = _map_seeds(
        lambda s: _factor_descend(nu, mu, s[0].copy(), s[1].copy(), cfg.max_iters),
        seeds, cfg.threads)
    keyed = [(obj, tuple(H1.reshape(-1)) + tuple(H2.reshape(-1)), i, H1, H2)
             for i, (obj, H1, H2) in enumerate(results)]
    keyed.sort(key=lambda t: (t[0], t[1], t[2]))
    obj, _, idx, H1, H2 = keyed[0]
    return FactorSolution(H1, H2, obj, Diagnostics(len(seeds), idx, True))


# --------------------------------------------------------------------------
# the Gaussian / classic case


def gaussian_classic_pca(cov, p: int) -> tuple[np.ndarray, float]:
    """Top-p eigenvectors of a covariance; objective is the trailing spectrum.

    Eigenvectors are ordered by descending eigenvalue and sign-fixed so
    the first nonzero coordinate is positive.
    """
    cov = np.asarray(cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise ValueError("covariance must be square")
    if np.max(np.abs(cov - cov.T)) > 1e-10:
        raise ValueError("covariance must be symmetric")
    d = cov.shape[0]
    if not 1 <= p <= d:
        raise ValueError(f"p must be in 1..{d}")
    vals, vecs = np.linalg.eigh((cov + cov.T) / 2.0)
    order = np.argsort(vals)[::-1]
    vals, vecs = vals[order], vecs[:, order]
    for k in range(d):
        nz = np.nonzero(np.abs(vecs[:, k]) > 1e-12)[0]
        if nz.size and vecs[nz[0], k] < 0:
            vecs[:, k] = -vecs[:, k]
    objective = float(np.sum(vals[p:]))
    return vecs[:, :p], objective


def gaussian_reconstruction_pca(m: SpectralModel, p: int,
                                cfg: SolverConfig = SolverConfig()) -> FactorSolution:
    """Rank-p reconstruction for a plus-times Gaussian model.

    Minimises rho(X, H X) = |(nu - H nu) diag(mu)|_F^2 over H = H1 H2 by
    alternating least squares; the optimal column space is the top-p
    eigenspace of nu diag(mu^2) nu^T, which is how classic PCA drops out
    of the general reconstruction problem.
    """
    if m.family.kind is not FamilyKind.SYM_ALPHA_STABLE or m.alpha != 2.0:
        raise ValueError("gaussian reconstruction expects a sum-stable alpha = 2 model")
    N = m.nu * m.mu[np.newaxis, :]
    d = m.d
    rng = np.random.default_rng(cfg.seed)
    best = None
    for r in range(cfg.restarts):
        A = rng.standard_normal((d, p))
        obj_prev = math.inf
        for _ in range(cfg.max_iters):
            C = np.linalg.pinv(A) @ N
            A = N @ np.linalg.pinv(C)
            resid = N - A @ (np.linalg.pinv(A) @ N)
            obj = float(np.sum(resid ** 2))
            if obj_prev - obj < 1e-14 * max(1.0, obj):
                break
            obj_prev = obj
        H2 = np.linalg.pinv(A)
        cand = (obj, r, A, H2)
        if best is None or cand[0] < best[0]:
            best = cand
    obj, idx, A, H2 = best
    return FactorSolution(A, H2, obj, Diagnostics(cfg.restarts, idx, True))


def principal_angles(U: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Principal angles between the column spans of U and V (radians)."""
    qu, _ = np.linalg.qr(np.asarray(U, dtype=float))
    qv, _ = np.linalg.qr(np.asarray(V, dtype=float))
    sv = np.linalg.svd(qu.T @ qv, compute_uv=False)
    return np.arccos(np.clip(sv, -1.0, 1.0))


def orthogonality_test(muV, nuV, family: StableFamily, tol: float = 1e-12) -> bool:
    """Whether the images mu X and nu X are uncorrelated for every X in the family.

    Gaussian vectors: Euclidean orthogonality.  Matrix Gaussians:
    A B^T = 0.  Frechet: disjoint supports, min(mu_i, nu_i) = 0 for
    every coordinate.
    """
    a = np.asarray(muV, dtype=float)
    b = np.asarray(nuV, dtype=float)
    if family.kind is FamilyKind.FRECHET:
        if np.any(a < 0) or np.any(b < 0):
            raise ValueError("frechet coefficients must be nonnegative")
        return bool(np.all(np.minimum(a, b) <= tol))
    if family.kind is FamilyKind.SYM_ALPHA_STABLE and family.alpha == 2.0:
        scale = max(float(np.linalg.norm(a) * np.linalg.norm(b)), 1.0)
        return bool(abs(float(a.reshape(-1) @ b.reshape(-1))) <= tol * scale)
    if family.kind is FamilyKind.GAUSSIAN_MATRIX:
        scale = max(float(np.linalg.norm(a) * np.linalg.norm(b)), 1.0)
        return bool(np.max(np.abs(a @ b.T)) <= tol * scale)
    raise ValueError(f"orthogonality is not defined for {family.kind.value}")
