"""Minimize a dependence contrast over orthogonal unmixing rotations of
whitened data, plus a deflation FastICA baseline used for comparison and
initialization.

Rotations are parametrized by Givens angles in fixed lexicographic plane
order (0,1), (0,2), ..., (n-2, n-1); the materialized matrix is the product
of the plane rotations in that order, always in SO(n).
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .contrast_engine import (DEFAULT_GAMMA, DEFAULT_M, DEFAULT_SIGMA, covariance_blocks,
                              rcc, rgv)
from .data_model import Dataset, WhiteningTransform
from .errors import AngleCountMismatch, NoProgress
from .random_features import FeatureMap, KernelSpec, apply_feature_map, draw_feature_map

ARMIJO_C = 1e-4
LINE_SEARCH_MAX_HALVINGS = 30


@dataclass(frozen=True)
class RotationParams:
    """Givens angles, one per plane (i, j), i < j, lexicographic order."""

    angles: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "angles", np.atleast_1d(np.asarray(self.angles, dtype=float)))


@dataclass(frozen=True)
class OptimizerConfig:
    m: int = DEFAULT_M
    gamma: float = DEFAULT_GAMMA
    sigma: float = DEFAULT_SIGMA
    fd_step: float = 1e-4
    tol: float = 1e-5
    max_iters: int = 100
    restarts: int = 3
    seed: int = 0
    init: str = "fastica"  # one of: random, fastica, given
    contrast: str = "rgv"  # one of: rcc, rgv

    def __post_init__(self):
        if self.fd_step <= 0 or self.tol <= 0 or self.max_iters < 1 or self.restarts < 1:
            raise ValueError("fd_step and tol must be positive; max_iters, restarts >= 1")
        if self.init not in ("random", "fastica", "given"):
            raise ValueError(f"unknown init {self.init!r}")
        if self.contrast not in ("rcc", "rgv"):
            raise ValueError(f"unknown contrast {self.contrast!r}")


@dataclass(frozen=True)
class UnmixingModel:
    """The estimated unmixing: W = rotation_matrix @ whitening.matrix."""

    whitening: WhiteningTransform
    rotation: RotationParams
    contrast_name: str
    final_contrast: float
    iterations: int
    wall_clock_seconds: float
    restart_index: int = 0
    objective_trace: tuple[float, ...] = ()

    def rotation_matrix(self) -> np.ndarray:
        n = self.whitening.matrix.shape[0]
        return givens_to_matrix(self.rotation, n)

    def full_matrix(self) -> np.ndarray:
        return self.rotation_matrix() @ self.whitening.matrix


@dataclass(frozen=True)
class FastICAResult:
    rotation: np.ndarray
    converged: bool
    sweeps: int


def angle_count(n: int) -> int:
    return n * (n - 1) // 2


def _plane_order(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n - 1) for j in range(i + 1, n)]


def givens_to_matrix(params: RotationParams, n: int) -> np.ndarray:
    """Product of plane rotations in lexicographic order; orthogonal, det +1."""
    if params.angles.shape[0] != angle_count(n):
        raise AngleCountMismatch(
            f"n={n} needs {angle_count(n)} angles, got {params.angles.shape[0]}"
        )
    q = np.eye(n)
    for (i, j), theta in zip(_plane_order(n), params.angles):
        c, s = np.cos(theta), np.sin(theta)
        rot = np.eye(n)
        rot[i, i] = c
        rot[i, j] = -s
        rot[j, i] = s
        rot[j, j] = c
        q = q @ rot
    return q


def matrix_to_givens(q: np.ndarray) -> RotationParams:
    """Invert `givens_to_matrix`: recover angles from a rotation matrix.

    Works by spherical-coordinate peeling of the first column, then recursing
    on the trailing (n-1)-dimensional block. The input must be in SO(n);
    matrices with det -1 cannot be represented (flip one row first).
    """
    q = np.asarray(q, dtype=float)
    n = q.shape[0]
    if np.linalg.det(q) < 0:
        raise ValueError("matrix has determinant -1; not a rotation")
    angles: list[float] = []
    work = q.copy()
    for top in range(n - 1):
        t = work[top:, top]
        k = t.shape[0]
        block = [0.0] * (k - 1)
        # t's spherical coordinates: t[0] = cos(a_1) prod cos(a_j>=2),
        # t[i] = sin(a_i) prod_{j>i} cos(a_j) with cos(a_j>=2) >= 0.
        block[0] = float(np.arctan2(t[1], t[0]))
        partial = float(np.hypot(t[0], t[1]))
        for i in range(2, k):
            block[i - 1] = float(np.arctan2(t[i], partial))
            partial = float(np.hypot(partial, t[i]))
        # Peel the recovered (top, .) rotations off and recurse on the rest.
        inv = np.eye(k)
        for idx in range(k - 2, -1, -1):
            c, s = np.cos(block[idx]), np.sin(block[idx])
            rot = np.eye(k)
            rot[0, 0] = c
            rot[0, idx + 1] = s
            rot[idx + 1, 0] = -s
            rot[idx + 1, idx + 1] = c
            inv = inv @ rot
        work[top:, top:] = inv @ work[top:, top:]
        angles.extend(block)
    return RotationParams(np.array(angles))


def draw_objective_maps(config: OptimizerConfig, n_components: int) -> list[FeatureMap]:
    """Per-component feature maps frozen for one optimizer run.

    Frequencies and phases come in antithetic pairs (w, b) and (w, 2*pi - b),
    sharing the frequency. Negating the data then exactly permutes feature
    rows, so the objective is invariant under sign flips of the rotated
    components (the contrast itself has that symmetry; i.i.d. phases would
    only give it up to Monte Carlo noise). Expectations are unchanged because
    each phase is still marginally uniform. m is rounded up to even.
    """
    kernel = KernelSpec(sigma=config.sigma)
    maps = []
    half = (config.m + 1) // 2
    for comp in range(n_components):
        base = draw_feature_map(kernel, half, 1, seed=_component_seed(config.seed, comp))
        freqs = np.vstack([base.frequencies, base.frequencies])
        phases = np.concatenate([base.phases, 2.0 * np.pi - base.phases])
        maps.append(FeatureMap(frequencies=freqs, phases=phases, seed=base.seed))
    return maps


def _component_seed(seed: int, comp: int) -> int:
    return int(np.random.SeedSequence((seed, 9001, comp)).generate_state(1)[0])


def _restart_seed(seed: int, restart: int) -> int:
    return int(np.random.SeedSequence((seed, 7310, restart)).generate_state(1)[0])


def _check_whitened(values: np.ndarray, tol: float = 1e-5) -> None:
    # Whitened data is centered here, so the covariance is taken about zero.
    cov = values @ values.T / values.shape[1]
    if np.abs(cov - np.eye(values.shape[0])).max() > tol:
        raise ValueError("optimizer input must be whitened (identity covariance)")


def _objective_from_maps(whitened: Dataset, maps: list[FeatureMap], config: OptimizerConfig):
    values = whitened.values
    n = whitened.d

    def objective(angles: np.ndarray) -> float:
        q = givens_to_matrix(RotationParams(angles), n)
        rotated = q @ values
        feats = [apply_feature_map(maps[i], Dataset(rotated[i:i + 1])) for i in range(n)]
        if config.contrast == "rcc":
            return rcc(feats, gamma=config.gamma)
        return rgv(feats, gamma=config.gamma)

    return objective


def contrast_objective(params: RotationParams, whitened: Dataset, config: OptimizerConfig) -> float:
    """RCC or RGV of the rotated components, with run-frozen feature maps."""
    _check_whitened(whitened.values)
    maps = draw_objective_maps(config, whitened.d)
    return _objective_from_maps(whitened, maps, config)(params.angles)


def finite_diff_gradient(params: RotationParams, whitened: Dataset,
                         config: OptimizerConfig) -> np.ndarray:
    """Central differences per angle with step config.fd_step."""
    _check_whitened(whitened.values)
    maps = draw_objective_maps(config, whitened.d)
    objective = _objective_from_maps(whitened, maps, config)
    return _fd_gradient(objective, params.angles, config.fd_step)


def _fd_gradient(objective, angles: np.ndarray, step: float) -> np.ndarray:
    grad = np.empty_like(angles)
    for k in range(angles.shape[0]):
        bumped = angles.copy()
        bumped[k] = angles[k] + step
        up = objective(bumped)
        bumped[k] = angles[k] - step
        down = objective(bumped)
        grad[k] = (up - down) / (2.0 * step)
    return grad


def descend(objective, start: np.ndarray, fd_step: float, tol: float,
            max_iters: int) -> tuple[np.ndarray, float, int, list[float]]:
    """Gradient descent with backtracking (halving) Armijo line search.

    Returns (angles, value, iterations, accepted-value trace). Raises
    NoProgress if the very first line search fails to find a decrease.
    """
    angles = start.copy()
    value = objective(angles)
    trace = [value]
    step0 = 1.0
    for iteration in range(1, max_iters + 1):
        grad = _fd_gradient(objective, angles, fd_step)
        grad_sq = float(grad @ grad)
        if grad_sq == 0.0:
            return angles, value, iteration - 1, trace
        step = step0
        accepted = False
        for _ in range(LINE_SEARCH_MAX_HALVINGS):
            candidate = angles - step * grad
            cand_value = objective(candidate)
            if cand_value <= value - ARMIJO_C * step * grad_sq:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            if iteration == 1:
                raise NoProgress("first line search found no decrease")
            return angles, value, iteration - 1, trace
        improvement = value - cand_value
        angles, value = candidate, cand_value
        trace.append(value)
        step0 = min(1.0, step * 2.0)  # reuse the last scale, allow growth
        if improvement < tol:
            return angles, value, iteration, trace
    return angles, value, max_iters, trace


def fastica_baseline(whitened: Dataset, seed: int, tol: float = 1e-6,
                     max_sweeps: int = 200) -> FastICAResult:
    """Deflation FastICA with the tanh nonlinearity on whitened data.

    Each unit is re-orthonormalized against the previously extracted units on
    every sweep; the final matrix is polished to exact orthogonality via its
    polar factor. Returns the best iterate with converged=False if any unit
    fails to converge within max_sweeps.
    """
    x = whitened.values
    n, n_samples = x.shape
    rng = np.random.default_rng(seed)
    w_all = np.zeros((n, n))
    converged = True
    total_sweeps = 0
    for unit in range(n):
        w = rng.standard_normal(n)
        w /= np.linalg.norm(w)
        unit_converged = False
        for sweep in range(1, max_sweeps + 1):
            u = w @ x
            g = np.tanh(u)
            g_prime = 1.0 - g * g
            w_new = (x @ g) / n_samples - g_prime.mean() * w
            # deflate against already-extracted units
            w_new -= w_all[:unit].T @ (w_all[:unit] @ w_new)
            norm = np.linalg.norm(w_new)
            if norm < 1e-12:
                break
            w_new /= norm
            delta = abs(abs(w_new @ w) - 1.0)
            w = w_new
            if delta < tol:
                unit_converged = True
                break
        total_sweeps += sweep
        if not unit_converged:
            converged = False
        w_all[unit] = w
    u_mat, _, vt_mat = np.linalg.svd(w_all)
    rotation = u_mat @ vt_mat
    return FastICAResult(rotation=rotation, converged=converged, sweeps=total_sweeps)


def _initial_angles(whitened: Dataset, config: OptimizerConfig, restart: int,
                    init_angles: np.ndarray | None) -> np.ndarray:
    n = whitened.d
    k = angle_count(n)
    if restart == 0 and config.init == "given":
        if init_angles is None:
            raise ValueError("init='given' requires init_angles")
        if np.asarray(init_angles).shape[0] != k:
            raise AngleCountMismatch(f"init_angles needs {k} entries")
        return np.asarray(init_angles, dtype=float).copy()
    if restart == 0 and config.init == "fastica":
        rotation = fastica_baseline(whitened, seed=_restart_seed(config.seed, 0)).rotation
        if np.linalg.det(rotation) < 0:
            rotation = rotation.copy()
            rotation[-1] *= -1.0  # sign flip keeps the unmixing, fixes det
        return matrix_to_givens(rotation).angles
    rng = np.random.default_rng(_restart_seed(config.seed, restart))
    return rng.uniform(-np.pi, np.pi, size=k)


def minimize_contrast(whitened: Dataset, config: OptimizerConfig,
                      whitening: WhiteningTransform | None = None,
                      init_angles: np.ndarray | None = None) -> UnmixingModel:
    """Run `restarts` descents from different starts; keep the lowest contrast.

    The first start honors config.init; later restarts are random. Feature
    maps are drawn once from config.seed and shared by every restart, so the
    objective is one fixed deterministic function for the whole run.
    """
    _check_whitened(whitened.values)
    if whitening is None:
        n = whitened.d
        whitening = WhiteningTransform(mean=np.zeros(n), matrix=np.eye(n))
    maps = draw_objective_maps(config, whitened.d)
    objective = _objective_from_maps(whitened, maps, config)
    t_start = time.perf_counter()
    best = None
    failures = 0
    for restart in range(config.restarts):
        start = _initial_angles(whitened, config, restart, init_angles)
        try:
            angles, value, iters, trace = descend(objective, start, config.fd_step,
                                                  config.tol, config.max_iters)
        except NoProgress:
            # A start already at a sharp minimum can fail its first search;
            # keep it as a (zero-iteration) candidate rather than discarding.
            failures += 1
            start_value = objective(start)
            angles, value, iters, trace = start, start_value, 0, [start_value]
        if best is None or value < best[1]:
            best = (angles, value, iters, trace, restart)
    if failures == config.restarts:
        raise NoProgress("every restart failed its first line search")
    angles, value, iters, trace, restart = best
    return UnmixingModel(
        whitening=whitening,
        rotation=RotationParams(angles),
        contrast_name=config.contrast.upper(),
        final_contrast=value,
        iterations=iters,
        wall_clock_seconds=time.perf_counter() - t_start,
        restart_index=restart,
        objective_trace=tuple(trace),
    )
