"""
Plumbing shared by every optimizer: the result record, seeded generators,
box projection and batch evaluation of candidate vectors.
"""
import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field

import numpy as np

import config
from modules.errors import InvalidConfigError, InvalidInputError

logger = logging.getLogger(__name__)


@dataclass
class OptResult:
    best_vector: np.ndarray
    best_fitness: float
    history: list
    evaluation_count: int
    wall_time: float = 0.0
    diagnostics: dict = field(default_factory=dict)


def is_count(value):
    return isinstance(value, (int, np.integer)) and not isinstance(value, bool)


def check_param(ok, key, message):
    if not ok:
        raise InvalidConfigError(f"{key}: {message}", key=key)


def make_rng(seed):
    """Deterministic generator for a 64-bit seed."""
    if seed is None:
        raise InvalidInputError("a seed is required; optimizers never fall back to entropy")
    return np.random.default_rng(int(seed))


def clip_to_box(x):
    return np.clip(x, 0.0, 1.0)


def box_diagonal(dimension):
    return float(np.sqrt(dimension))


def evaluate_batch(objective, candidates):
    """
    Evaluates a batch of candidate vectors.
    Uses multithreading if enabled in config and the batch is large enough.

    Results are written back by index, so the output never depends on
    which thread finishes first.
    """
    candidates = np.atleast_2d(candidates)
    fitness = np.empty(len(candidates))
    if not config.ENABLE_MULTITHREADING or len(candidates) < config.PARALLEL_MIN_BATCH:
        for idx, x in enumerate(candidates):
            fitness[idx] = objective(x)
        return fitness

    with ThreadPoolExecutor(max_workers=config.MAX_WORKERS) as executor:
        future_to_index = {executor.submit(objective, x): idx for idx, x in enumerate(candidates)}
        for future in as_completed(future_to_index):
            idx = future_to_index[future]
            try:
                fitness[idx] = future.result()
            except Exception as e:
                logger.error(f"Evaluation of candidate {idx} failed: {e}")
                raise
    return fitness
