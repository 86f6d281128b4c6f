"""Competitive swarm optimisation and standard PSO over black-box fitness.

Both optimisers minimise a fitness function on fixed-length real vectors.
The swarm is held as position/velocity/fitness arrays; one row per
particle.  All random draws happen on the coordinating thread in a fixed
order before any fitness evaluation of an iteration begins, so results
are bit-identical regardless of how many worker processes evaluate the
pending positions:

* CSO, per iteration: first the pairing permutation, then a single
  uniform[0, 1) block of shape (s/2, 3, D) whose slices [k, 0], [k, 1],
  [k, 2] are the three mixing vectors of competition k.
* SPSO, per iteration: a single uniform[0, 1) block of shape (s, 2, D)
  holding the cognitive and social draws of each particle.

CSO pairs all particles each iteration, compares cached fitness (ties
favour the first particle drawn), copies winners unchanged, and moves
each loser by a velocity mixing its inertia, the pull toward its winner,
and optionally the pull toward the swarm mean position.  Only the s/2
losers are re-evaluated, so a run costs s + (s/2) * iterations fitness
evaluations.  Positions are never clamped after initialisation.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np


def _validate_bounds(bounds) -> np.ndarray:
    arr = np.asarray(bounds, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] == 0:
        raise ValueError("bounds must be a (D, 2) array of (lo, hi) pairs")
    if np.any(arr[:, 0] > arr[:, 1]):
        raise ValueError("each lower bound must not exceed its upper bound")
    return arr


@dataclass(frozen=True)
class CsoConfig:
    swarm_size: int
    iterations: int
    bounds: np.ndarray  # (D, 2) initialisation box
    phi: float = 0.1
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "bounds", _validate_bounds(self.bounds))
        if self.swarm_size < 2 or self.swarm_size % 2 != 0:
            raise ValueError("swarm size must be an even integer >= 2")
        if self.iterations < 0:
            raise ValueError("iterations must be nonnegative")
        if self.phi < 0:
            raise ValueError("phi must be nonnegative")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class SpsoConfig:
    swarm_size: int
    iterations: int
    bounds: np.ndarray
    inertia: float = 0.6
    cognitive: float = 1.7
    social: float = 1.7
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "bounds", _validate_bounds(self.bounds))
        if self.swarm_size < 2:
            raise ValueError("swarm size must be >= 2")
        if self.iterations < 0:
            raise ValueError("iterations must be nonnegative")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class OptResult:
    best_position: np.ndarray
    best_fitness: float
    trace: np.ndarray  # running best fitness; trace[0] is the initial swarm's best
    evaluations: int


# Worker-side fitness set once per process by the pool initializer, so only
# positions travel over IPC for each evaluation.
_worker_fitness: Callable | None = None


def _init_worker(fitness):
    global _worker_fitness
    _worker_fitness = fitness


def _eval_in_worker(position):
    return _worker_fitness(position)


class _Evaluator:
    """Maps fitness over batches of positions, optionally in parallel."""

    def __init__(self, fitness, workers: int):
        self._fitness = fitness
        self._pool = None
        if workers > 1:
            self._pool = concurrent.futures.ProcessPoolExecutor(
                max_workers=workers, initializer=_init_worker, initargs=(fitness,)
            )
            self._workers = workers

    def __call__(self, positions: np.ndarray) -> np.ndarray:
        if self._pool is None:
            return np.array([float(self._fitness(x)) for x in positions])
        chunk = max(1, len(positions) // (self._workers * 4))
        results = self._pool.map(_eval_in_worker, list(positions), chunksize=chunk)
        return np.array([float(v) for v in results])

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None


def swarm_mean(positions: np.ndarray) -> np.ndarray:
    """Per-dimension mean of all particle positions at the current iteration."""
    return positions.mean(axis=0)


def _init_swarm(rng, bounds, size):
    lo = bounds[:, 0]
    hi = bounds[:, 1]
    positions = lo + (hi - lo) * rng.random((size, bounds.shape[0]))
    velocities = np.zeros_like(positions)
    return positions, velocities


def cso_minimize(
    fitness: Callable[[np.ndarray], float],
    cfg: CsoConfig,
    on_iteration: Callable[[int, float], None] | None = None,
) -> OptResult:
    """Minimise ``fitness`` with competitive swarm optimisation.

    The fitness must be total over the initialisation box and beyond it,
    since loser updates are unclamped.  With ``cfg.workers > 1`` it must
    also be picklable and safe to call concurrently.
    """
    rng = np.random.default_rng(cfg.seed)
    s = cfg.swarm_size
    positions, velocities = _init_swarm(rng, cfg.bounds, s)
    evaluator = _Evaluator(fitness, cfg.workers)
    try:
        fit = evaluator(positions)
        evaluations = s
        best = int(np.argmin(fit))
        best_fitness = float(fit[best])
        best_position = positions[best].copy()
        trace = [best_fitness]

        half = s // 2
        for t in range(cfg.iterations):
            perm = rng.permutation(s)
            mix = rng.random((half, 3, positions.shape[1]))
            first = perm[0::2]
            second = perm[1::2]
            first_wins = fit[first] <= fit[second]
            losers = np.where(first_wins, second, first)
            winners = np.where(first_wins, first, second)

            new_v = mix[:, 0] * velocities[losers]
            new_v += mix[:, 1] * (positions[winners] - positions[losers])
            if cfg.phi > 0:
                center = swarm_mean(positions)
                new_v += cfg.phi * mix[:, 2] * (center - positions[losers])
            velocities[losers] = new_v
            positions[losers] = positions[losers] + new_v

            fit[losers] = evaluator(positions[losers])
            evaluations += half

            it_best = int(np.argmin(fit))
            if float(fit[it_best]) < best_fitness:
                best_fitness = float(fit[it_best])
                best_position = positions[it_best].copy()
            trace.append(best_fitness)
            if on_iteration is not None:
                on_iteration(t, best_fitness)
    finally:
        evaluator.close()
    return OptResult(best_position, best_fitness, np.array(trace), evaluations)


def spso_minimize(
    fitness: Callable[[np.ndarray], float],
    cfg: SpsoConfig,
    on_iteration: Callable[[int, float], None] | None = None,
) -> OptResult:
    """Minimise ``fitness`` with standard PSO (inertia/cognitive/social form).

    Every particle is updated and re-evaluated each iteration, so a run
    costs s * (iterations + 1) fitness evaluations.  Velocities are not
    clamped.
    """
    rng = np.random.default_rng(cfg.seed)
    s = cfg.swarm_size
    positions, velocities = _init_swarm(rng, cfg.bounds, s)
    evaluator = _Evaluator(fitness, cfg.workers)
    try:
        fit = evaluator(positions)
        evaluations = s
        pbest = positions.copy()
        pbest_fit = fit.copy()
        g = int(np.argmin(fit))
        best_position = positions[g].copy()
        best_fitness = float(fit[g])
        trace = [best_fitness]

        for t in range(cfg.iterations):
            draws = rng.random((s, 2, positions.shape[1]))
            velocities = (
                cfg.inertia * velocities
                + cfg.cognitive * draws[:, 0] * (pbest - positions)
                + cfg.social * draws[:, 1] * (best_position - positions)
            )
            positions = positions + velocities

            fit = evaluator(positions)
            evaluations += s

            improved = fit < pbest_fit
            pbest[improved] = positions[improved]
            pbest_fit[improved] = fit[improved]
            g = int(np.argmin(pbest_fit))
            if float(pbest_fit[g]) < best_fitness:
                best_fitness = float(pbest_fit[g])
                best_position = pbest[g].copy()
            trace.append(best_fitness)
            if on_iteration is not None:
                on_iteration(t, best_fitness)
    finally:
        evaluator.close()
    return OptResult(best_position, best_fitness, np.array(trace), evaluations)
