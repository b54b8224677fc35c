"""
Reference optimizers sharing the OptResult contract: global-best particle
swarm and a real-coded genetic algorithm, both over the box [0, 1]^M.
"""
import logging
import time
from dataclasses import dataclass

import numpy as np

from modules.optimization import OptResult, check_param, clip_to_box, evaluate_batch, is_count, make_rng

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PsoParams:
    swarm_size: int = 40
    inertia: float = 0.729
    cognitive: float = 1.49445
    social: float = 1.49445
    velocity_clamp: float = 0.2
    max_iterations: int = 500
    seed: int = 0

    def __post_init__(self):
        check_param(is_count(self.swarm_size) and self.swarm_size >= 4, "swarm_size", "must be an integer >= 4")
        check_param(self.inertia >= 0, "inertia", "must be >= 0")
        check_param(self.cognitive >= 0 and self.social >= 0, "cognitive", "c1 and c2 must be >= 0")
        check_param(self.velocity_clamp > 0, "velocity_clamp", "must be > 0")
        check_param(is_count(self.max_iterations) and self.max_iterations >= 0, "max_iterations", "must be an integer >= 0")

    @property
    def population(self):
        return self.swarm_size


@dataclass(frozen=True)
class GaParams:
    population_size: int = 40
    tournament_size: int = 2
    crossover_rate: float = 0.9
    mutation_rate: float = 0.1
    mutation_sigma: float = 0.05
    elitism: int = 1
    max_iterations: int = 500
    seed: int = 0

    def __post_init__(self):
        check_param(is_count(self.population_size) and self.population_size >= 4, "population_size", "must be an integer >= 4")
        check_param(is_count(self.tournament_size) and 1 <= self.tournament_size <= self.population_size,
                    "tournament_size", "must be an integer in [1, population_size]")
        check_param(0 <= self.crossover_rate <= 1, "crossover_rate", "must lie in [0, 1]")
        check_param(0 <= self.mutation_rate <= 1, "mutation_rate", "must lie in [0, 1]")
        check_param(self.mutation_sigma >= 0, "mutation_sigma", "must be >= 0")
        check_param(is_count(self.elitism) and 0 <= self.elitism < self.population_size,
                    "elitism", "must be an integer in [0, population_size)")
        check_param(is_count(self.max_iterations) and self.max_iterations >= 0, "max_iterations", "must be an integer >= 0")

    @property
    def population(self):
        return self.population_size


def pso_optimize(objective, dimension, params=None, rng=None):
    """
    Global-best PSO with velocity clamping and reflection at the box walls.

    v <- w v + c1 r1 (pbest - x) + c2 r2 (gbest - x), then x <- x + v.
    A particle leaving the box is mirrored back inside and its velocity
    reversed at half speed.
    """
    params = params or PsoParams()
    rng = rng if rng is not None else make_rng(params.seed)
    start = time.perf_counter()
    S = params.swarm_size
    vmax = params.velocity_clamp

    X = rng.random((S, dimension))
    V = rng.uniform(-vmax, vmax, size=(S, dimension))
    pbest = X.copy()
    pbest_fit = evaluate_batch(objective, X)
    evaluations = S
    g = int(np.argmin(pbest_fit))
    gbest, gbest_fit = pbest[g].copy(), float(pbest_fit[g])
    history = [gbest_fit]

    for iteration in range(1, params.max_iterations + 1):
        r1 = rng.random((S, dimension))
        r2 = rng.random((S, dimension))
        V = params.inertia * V + params.cognitive * r1 * (pbest - X) + params.social * r2 * (gbest - X)
        V = np.clip(V, -vmax, vmax)
        X = X + V

        below = X < 0.0
        above = X > 1.0
        X = np.where(below, -X, X)
        X = np.where(above, 2.0 - X, X)
        V = np.where(below | above, -0.5 * V, V)
        X = clip_to_box(X)

        fit = evaluate_batch(objective, X)
        evaluations += S
        improved = fit < pbest_fit
        pbest[improved] = X[improved]
        pbest_fit[improved] = fit[improved]

        g = int(np.argmin(pbest_fit))
        if pbest_fit[g] < gbest_fit:
            gbest, gbest_fit = pbest[g].copy(), float(pbest_fit[g])
        history.append(gbest_fit)

    wall_time = time.perf_counter() - start
    logger.info(f"PSO done: best={gbest_fit:.6g} after {evaluations} evaluations")
    return OptResult(gbest, gbest_fit, history, evaluations, wall_time)


def ga_optimize(objective, dimension, params=None, rng=None):
    """
    Real-coded GA: tournament selection, arithmetic crossover
    (child = l p1 + (1 - l) p2, l ~ U(0, 1)), per-gene Gaussian mutation,
    box clamp. The `elitism` best individuals survive unchanged and are
    not re-evaluated.
    """
    params = params or GaParams()
    rng = rng if rng is not None else make_rng(params.seed)
    start = time.perf_counter()
    P = params.population_size
    n_children = P - params.elitism

    population = rng.random((P, dimension))
    fit = evaluate_batch(objective, population)
    evaluations = P
    b = int(np.argmin(fit))
    best, best_fit = population[b].copy(), float(fit[b])
    history = [best_fit]

    def tournament():
        entrants = rng.choice(P, size=params.tournament_size, replace=False)
        return population[entrants[np.argmin(fit[entrants])]]

    for iteration in range(1, params.max_iterations + 1):
        order = np.argsort(fit, kind="stable")
        elites, elite_fit = population[order[: params.elitism]], fit[order[: params.elitism]]

        children = np.empty((n_children, dimension))
        for i in range(n_children):
            p1, p2 = tournament(), tournament()
            if rng.random() < params.crossover_rate:
                lam = rng.random()
                child = lam * p1 + (1.0 - lam) * p2
            else:
                child = p1.copy()
            genes = rng.random(dimension) < params.mutation_rate
            child[genes] += rng.normal(0.0, params.mutation_sigma, size=int(genes.sum()))
            children[i] = clip_to_box(child)

        child_fit = evaluate_batch(objective, children)
        evaluations += n_children
        population = np.vstack([elites, children])
        fit = np.concatenate([elite_fit, child_fit])

        b = int(np.argmin(fit))
        if fit[b] < best_fit:
            best, best_fit = population[b].copy(), float(fit[b])
        history.append(best_fit)

    wall_time = time.perf_counter() - start
    logger.info(f"GA done: best={best_fit:.6g} after {evaluations} evaluations")
    return OptResult(best, best_fit, history, evaluations, wall_time)
