"""
Ant-bridge colony optimizer.

A colony of N ants searches the amplitude box [0, 1]^M. Foragers sample
around a ranked archive of good solutions (the pheromone trail). Each
iteration the colony may also build a bridge: a chain of candidates
interpolated between two elite anchors. Whether a bridge pays off follows
the forager economics

    rate without bridge   N / (L_T + L_A)
    effective foragers    N - n_b / alpha
    rate with bridge      rho = (N - n_b / alpha) / f

with L_T = D, L_A = kappa * D and f = D for an anchor separation D. A
formed bridge is loaded by the rank of its members' fitness and must pass
a static balance test plus a chance of collapse; collapsed bridges are
replaced by uniform random ants.
"""
import logging
import math
import time
from dataclasses import dataclass, replace

import numpy as np

from modules.errors import (
    BridgeContractError,
    DegenerateAnchorError,
    InfeasibleBridgeError,
    InvalidInputError,
)
from modules.optimization import (
    OptResult,
    box_diagonal,
    check_param,
    clip_to_box,
    evaluate_batch,
    is_count,
    make_rng,
)

logger = logging.getLogger(__name__)

# army-ant forager/builder coefficient
FORAGER_ALPHA = 17.02
MIN_KERNEL_STD = 1e-3
KERNEL_TRUNCATION = 3.0


@dataclass(frozen=True)
class NoabsParams:
    colony_size: int = 40
    archive_size: int = 10
    alpha: float = FORAGER_ALPHA
    detour_factor: float = 2.0
    span_per_ant: float = 0.1
    jitter_sigma: float = 0.02
    collapse_tolerance: float = 0.05
    tie_epsilon: float = 0.02
    pheromone_q: float = 0.3
    capacity: float = 100.0
    capacity_fraction: float = 1.0
    collapse_rate: float = 0.2
    max_iterations: int = 500
    seed: int = 0
    log_every: int = 50

    def __post_init__(self):
        check_param(is_count(self.colony_size) and self.colony_size >= 4,
                    "colony_size", "must be an integer >= 4")
        check_param(is_count(self.archive_size) and 2 <= self.archive_size <= self.colony_size,
                    "archive_size", "must be an integer in [2, colony_size]")
        check_param(self.alpha > 0, "alpha", "must be > 0")
        check_param(self.detour_factor > 0, "detour_factor", "must be > 0")
        check_param(self.span_per_ant > 0, "span_per_ant", "must be > 0")
        check_param(self.jitter_sigma >= 0, "jitter_sigma", "must be >= 0")
        check_param(self.collapse_tolerance > 0, "collapse_tolerance", "must be > 0")
        check_param(self.tie_epsilon >= 0, "tie_epsilon", "must be >= 0")
        check_param(self.pheromone_q > 0, "pheromone_q", "must be > 0")
        check_param(self.capacity > 0, "capacity", "must be > 0")
        check_param(self.capacity_fraction > 0, "capacity_fraction", "must be > 0")
        check_param(0 <= self.collapse_rate <= 1, "collapse_rate", "must lie in [0, 1]")
        check_param(is_count(self.max_iterations) and self.max_iterations >= 0, "max_iterations", "must be an integer >= 0")
        check_param(is_count(self.log_every) and self.log_every >= 1, "log_every", "must be an integer >= 1")

    @property
    def population(self):
        return self.colony_size


@dataclass
class ColonyState:
    colony_size: int
    archive: np.ndarray
    archive_fitness: np.ndarray
    gbest_vector: np.ndarray
    gbest_fitness: float
    pheromone_weights: np.ndarray
    iteration: int = 0
    seed: int = None


@dataclass(frozen=True)
class BridgeProposal:
    anchor_a: int
    anchor_b: int
    span: float
    detour_factor: float
    trail_length: float
    detour_length: float
    n_b: int
    rate_without: float
    rate_with: float
    accepted: bool


@dataclass(frozen=True, eq=False)
class Bridge:
    members: np.ndarray
    stations: np.ndarray
    loads: np.ndarray = None
    capacity: float = 100.0
    stands: bool = None


@dataclass(frozen=True)
class StabilityReport:
    stands: bool
    sum_fx: float
    sum_fy: float
    sum_moment: float
    reaction_a: float
    reaction_b: float
    collapse_probability: float
    overloaded: bool


# ==================== Bridge economics ====================

def benefit_rate_no_bridge(N, L_T, L_A):
    """Ants per unit length when the colony walks the detour: N / (L_T + L_A)."""
    if N <= 0 or L_T < 0 or L_A < 0:
        raise InvalidInputError(f"need N > 0 and non-negative lengths, got N={N}, L_T={L_T}, L_A={L_A}")
    total = L_T + L_A
    if total == 0:
        raise ZeroDivisionError("total trail length L_T + L_A is zero")
    return N / total


def effective_foragers(N, n_b, alpha):
    """Foragers left once n_b builders are sequestered: N - n_b / alpha."""
    if N <= 0 or n_b < 0 or alpha <= 0:
        raise InvalidInputError(f"need N > 0, n_b >= 0, alpha > 0, got N={N}, n_b={n_b}, alpha={alpha}")
    foragers = N - n_b / alpha
    if foragers <= 0:
        raise InfeasibleBridgeError(f"bridge of {n_b} ants consumes all {N} foragers (alpha={alpha})")
    return foragers


def available_foragers(N, n_b):
    """Builders and foragers counted alike (alpha = 1)."""
    return effective_foragers(N, n_b, 1.0)


def bridge_rate(N, n_b, alpha, f):
    """rho = (N - n_b / alpha) / f, f being the shortest distance with the bridge in place."""
    if f <= 0:
        raise ZeroDivisionError(f"shortest distance f must be positive, got {f}")
    return effective_foragers(N, n_b, alpha) / f


def propose_bridge(anchor_a, anchor_b, params, indices=(None, None)):
    """Prices a bridge between two anchor vectors and decides whether the colony builds it."""
    a = np.asarray(anchor_a, dtype=float)
    b = np.asarray(anchor_b, dtype=float)
    span = float(np.linalg.norm(b - a))
    if span == 0.0:
        raise DegenerateAnchorError("bridge anchors coincide")

    N = params.colony_size
    per_ant = params.span_per_ant * box_diagonal(a.size)
    n_b = max(1, min(math.ceil(span / per_ant), N // 2))
    trail, detour = span, params.detour_factor * span

    rate_without = benefit_rate_no_bridge(N, trail, detour)
    try:
        rate_with = bridge_rate(N, n_b, params.alpha, span)
    except InfeasibleBridgeError as e:
        logger.debug(f"Bridge rejected: {e}")
        rate_with = 0.0

    return BridgeProposal(
        anchor_a=indices[0],
        anchor_b=indices[1],
        span=span,
        detour_factor=params.detour_factor,
        trail_length=trail,
        detour_length=detour,
        n_b=n_b,
        rate_without=rate_without,
        rate_with=rate_with,
        accepted=rate_with > rate_without,
    )


# ==================== Bridge construction ====================

def form_bridge(proposal, anchors, rng, params):
    """Places n_b members at t_i = i / (n_b + 1) along the anchor segment, jittered and clamped to the box."""
    if not proposal.accepted:
        raise BridgeContractError("cannot form a bridge from a rejected proposal")
    a, b = (np.asarray(v, dtype=float) for v in anchors)
    n_b = proposal.n_b
    stations = np.arange(1, n_b + 1) / (n_b + 1)
    jitter = rng.normal(0.0, params.jitter_sigma, size=(n_b, a.size))
    members = clip_to_box(a + stations[:, None] * (b - a) + jitter)
    return Bridge(members=members, stations=stations, capacity=params.capacity)


def assign_loads(bridge, member_fitness):
    """Rank-normalized loads (rank + 1) / n_b; the worst member carries load 1."""
    member_fitness = np.asarray(member_fitness, dtype=float)
    if len(member_fitness) != len(bridge.members):
        raise InvalidInputError("one fitness value per bridge member is required")
    ranks = np.argsort(np.argsort(member_fitness, kind="stable"), kind="stable")
    return replace(bridge, loads=(ranks + 1) / len(member_fitness))


def check_stability(bridge, params, rng=None):
    """
    Static balance of the bridge as a simply supported beam of unit span.

    Members sit at x_i = t_i and push down with their loads w_i. The end
    reactions follow from the moment balance about each support,
    R_A = sum w_i (1 - x_i) and R_B = sum w_i x_i; the residuals of
    sum Fx, sum Fy and sum M_a are reported. The bridge stands when it is
    balanced within collapse_tolerance, no member exceeds
    capacity_fraction, and a uniform draw beats the collapse probability
    mean(w) * collapse_rate. Without an rng the chance of collapse is skipped.
    """
    if bridge.loads is None or len(bridge.loads) == 0:
        raise InvalidInputError("bridge has no loaded members")
    x = np.asarray(bridge.stations, dtype=float)
    w = np.asarray(bridge.loads, dtype=float)

    reaction_a = float(np.dot(w, 1.0 - x))
    reaction_b = float(np.dot(w, x))
    sum_fx = 0.0  # no lateral loads
    sum_fy = abs(reaction_a + reaction_b - float(np.sum(w)))
    sum_moment = abs(reaction_b * 1.0 - float(np.dot(w, x)))

    balanced = max(sum_fx, sum_fy, sum_moment) <= params.collapse_tolerance
    overloaded = bool(np.max(w) > params.capacity_fraction)
    collapse_probability = float(np.mean(w)) * params.collapse_rate
    draw = rng.random() if rng is not None else 1.0

    return StabilityReport(
        stands=bool(balanced and not overloaded and draw >= collapse_probability),
        sum_fx=sum_fx,
        sum_fy=sum_fy,
        sum_moment=sum_moment,
        reaction_a=reaction_a,
        reaction_b=reaction_b,
        collapse_probability=collapse_probability,
        overloaded=overloaded,
    )


# ==================== Colony ====================

def pheromone_weights(archive_size, q):
    """Rank weights exp(-k / (q K)), k = 0 for the best, normalized to sum 1."""
    k = np.arange(archive_size)
    weights = np.exp(-k / (q * archive_size))
    return weights / weights.sum()


def init_colony(population, fitness, params):
    order = np.argsort(fitness, kind="stable")[: params.archive_size]
    archive = np.array(population[order], dtype=float)
    archive_fitness = np.array(fitness[order], dtype=float)
    return ColonyState(
        colony_size=params.colony_size,
        archive=archive,
        archive_fitness=archive_fitness,
        gbest_vector=archive[0].copy(),
        gbest_fitness=float(archive_fitness[0]),
        pheromone_weights=pheromone_weights(len(archive), params.pheromone_q),
        seed=params.seed,
    )


def update_archive(colony, candidates, fitness):
    """Merges evaluated candidates into the archive, keeps the K best and never loses gbest."""
    if len(candidates) == 0:
        return colony
    size = len(colony.archive)
    merged = np.vstack([colony.archive, candidates])
    merged_fitness = np.concatenate([colony.archive_fitness, fitness])
    order = np.argsort(merged_fitness, kind="stable")[:size]
    colony.archive = merged[order]
    colony.archive_fitness = merged_fitness[order]
    if colony.archive_fitness[0] < colony.gbest_fitness:
        colony.gbest_vector = colony.archive[0].copy()
        colony.gbest_fitness = float(colony.archive_fitness[0])
    return colony


def forager_step(colony, count, rng):
    """
    Samples `count` foragers from the pheromone trail.

    Per coordinate an archive member is picked with its pheromone weight
    and a Gaussian is drawn around that member's coordinate, with the
    archive's mean absolute deviation as spread (at least 1e-3). The
    kernel is truncated at three deviations and the result clamped to the box.
    """
    archive = colony.archive
    size, dimension = archive.shape
    spread = np.mean(np.abs(archive - archive.mean(axis=0)), axis=0)
    spread = np.maximum(spread, MIN_KERNEL_STD)

    picks = rng.choice(size, size=(count, dimension), p=colony.pheromone_weights)
    centers = archive[picks, np.arange(dimension)]
    deviation = np.clip(rng.standard_normal((count, dimension)), -KERNEL_TRUNCATION, KERNEL_TRUNCATION)
    return clip_to_box(centers + deviation * spread)


def select_anchors(colony, params):
    """
    Pairs the best archive member with the first distinct one. Another
    (best, j) pair whose rate is within tie_epsilon of that default wins
    if it spans a longer path. Returns None when every member coincides.
    """
    best = colony.archive[0]
    proposals = []
    for j in range(1, len(colony.archive)):
        try:
            proposals.append(propose_bridge(best, colony.archive[j], params, indices=(0, j)))
        except DegenerateAnchorError:
            continue
    if not proposals:
        return None

    default = chosen = proposals[0]
    for proposal in proposals[1:]:
        top = max(default.rate_with, proposal.rate_with)
        if top <= 0:
            continue
        if abs(default.rate_with - proposal.rate_with) / top <= params.tie_epsilon and proposal.span > chosen.span:
            chosen = proposal
    return chosen


def optimize(objective, dimension, params=None, rng=None):
    """
    Minimizes `objective` over [0, 1]^dimension.

    Every iteration spends exactly colony_size evaluations: bridge members
    (when a bridge is accepted), uniform replacements for a collapsed
    bridge, and foragers for the rest.
    """
    params = params or NoabsParams()
    rng = rng if rng is not None else make_rng(params.seed)
    start = time.perf_counter()
    N = params.colony_size

    population = rng.random((N, dimension))
    colony = init_colony(population, evaluate_batch(objective, population), params)
    evaluations = N
    history = [colony.gbest_fitness]
    stats = {"proposed": 0, "accepted": 0, "stood": 0, "collapsed": 0, "skipped": 0,
             "capacity": params.capacity, "peak_reaction": 0.0}
    logger.info(f"NOABS start: N={N}, K={params.archive_size}, M={dimension}, best={colony.gbest_fitness:.6g}")

    for iteration in range(1, params.max_iterations + 1):
        new_x, new_f = [], []
        spent = 0
        reseed = 0

        proposal = select_anchors(colony, params)
        if proposal is None:
            stats["skipped"] += 1
        else:
            stats["proposed"] += 1
            if proposal.accepted:
                stats["accepted"] += 1
                anchors = (colony.archive[proposal.anchor_a], colony.archive[proposal.anchor_b])
                bridge = form_bridge(proposal, anchors, rng, params)
                member_fitness = evaluate_batch(objective, bridge.members)
                spent = proposal.n_b
                bridge = assign_loads(bridge, member_fitness)
                report = check_stability(bridge, params, rng)
                bridge = replace(bridge, stands=report.stands)
                # support reactions in body weights
                reaction = max(report.reaction_a, report.reaction_b) * bridge.capacity
                stats["peak_reaction"] = max(stats["peak_reaction"], reaction)
                if bridge.stands:
                    stats["stood"] += 1
                    new_x.append(bridge.members)
                    new_f.append(member_fitness)
                else:
                    stats["collapsed"] += 1
                    reseed = proposal.n_b
                logger.debug(
                    f"iter {iteration}: bridge n_b={proposal.n_b} D={proposal.span:.4g} "
                    f"{'stands' if report.stands else 'collapsed'}"
                )

        batch = []
        if reseed:
            batch.append(rng.random((reseed, dimension)))
        foragers = N - spent - reseed
        if foragers > 0:
            batch.append(forager_step(colony, foragers, rng))
        if batch:
            candidates = np.vstack(batch)
            new_x.append(candidates)
            new_f.append(evaluate_batch(objective, candidates))
            evaluations += len(candidates)
        evaluations += spent

        if new_x:
            colony = update_archive(colony, np.vstack(new_x), np.concatenate(new_f))
        colony.iteration = iteration
        history.append(colony.gbest_fitness)

        if iteration % params.log_every == 0:
            logger.info(f"NOABS iter {iteration}/{params.max_iterations}: best={colony.gbest_fitness:.6g}")

    wall_time = time.perf_counter() - start
    logger.info(f"NOABS done: best={colony.gbest_fitness:.6g} after {evaluations} evaluations")
    return OptResult(
        best_vector=colony.gbest_vector.copy(),
        best_fitness=colony.gbest_fitness,
        history=history,
        evaluation_count=evaluations,
        wall_time=wall_time,
        diagnostics=stats,
    )
