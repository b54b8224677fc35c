"""
Experiment harness: YAML run configuration, seeded synthesis runs and
optimizer comparisons, with their artifacts written to an output directory.
"""
import dataclasses
import hashlib
import logging
import os
import time
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
import yaml

import config
from modules import noabs
from modules.alerting import send_alert
from modules.array_model import (
    Excitation,
    compute_pattern,
    first_null_beamwidth,
    half_power_beamwidth,
    main_lobe_bounds,
    null_depth,
    side_lobe_level,
    theta_grid,
    uniform_geometry,
)
from modules.baselines import GaParams, PsoParams, ga_optimize, pso_optimize
from modules.errors import ConfigParseError, InvalidConfigError, InvalidInputError, NoSideLobesError
from modules.mask_fitness import NullSector, build_mask, make_objective
from modules.optimization import is_count, make_rng
from modules.storage import (
    ensure_output_dir,
    load_best_vector,
    write_best_vector,
    write_convergence,
    write_json,
    write_mask,
    write_pattern,
    write_table,
)

logger = logging.getLogger(__name__)

OPTIMIZER_REGISTRY = {
    "noabs": (noabs.NoabsParams, noabs.optimize),
    "pso": (PsoParams, pso_optimize),
    "ga": (GaParams, ga_optimize),
}

TOP_LEVEL_KEYS = {
    "seed", "iterations", "num_elements", "spacing_wavelengths", "grid_step_deg",
    "floor_db", "output_dir", "evaluation_budget", "mask", "optimizer",
}
MASK_KEYS = {"main_sector", "sll_ceiling_db", "null_sectors"}
NULL_SECTOR_KEYS = ("center", "half_width", "depth_db")
SEED_LIMIT = 2 ** 64


@dataclass(frozen=True)
class MaskConfig:
    main_sector: tuple = config.DEFAULT_MAIN_SECTOR
    sll_ceiling_db: float = config.DEFAULT_SLL_CEILING_DB
    null_sectors: tuple = ()


@dataclass
class ExperimentConfig:
    seed: int
    optimizer: str = "noabs"
    optimizer_params: dict = field(default_factory=dict)
    num_elements: int = config.DEFAULT_NUM_ELEMENTS
    spacing_wavelengths: float = config.DEFAULT_SPACING_WAVELENGTHS
    grid_step_deg: float = config.DEFAULT_GRID_STEP_DEG
    floor_db: float = config.DEFAULT_FLOOR_DB
    iterations: int = config.DEFAULT_ITERATIONS
    output_dir: str = config.OUTPUT_DIR
    evaluation_budget: int = None
    mask: MaskConfig = field(default_factory=MaskConfig)

    @property
    def num_pairs(self):
        return self.num_elements // 2


@dataclass
class RunSummary:
    best_fitness: float
    sll_db: float
    null_depths: list
    main_lobe_bounds: tuple
    hpbw_deg: float
    fnbw_deg: float
    evaluation_count: int
    wall_time: float
    seed: int
    optimizer: str
    uniform_fitness: float
    uniform_sll_db: float
    diagnostics: dict
    config: dict

    def to_record(self):
        """Everything except wall_time, which lives in timing.json."""
        record = dataclasses.asdict(self)
        record.pop("wall_time")
        return record


# ==================== Configuration ====================

def _require(ok, key, message):
    if not ok:
        raise InvalidConfigError(f"{key}: {message}", key=key)


def _is_number(value):
    return isinstance(value, (int, float, np.integer, np.floating)) and not isinstance(value, bool)


def _unknown_keys(section, allowed, prefix=""):
    for key in section:
        if key not in allowed:
            name = f"{prefix}{key}"
            raise InvalidConfigError(f"unknown key '{name}'", key=name)


def _parse_optimizer_params(name, raw):
    params_cls = OPTIMIZER_REGISTRY[name][0]
    _require(isinstance(raw, dict), f"optimizer.{name}", "must be a mapping of parameters")
    allowed = {f.name for f in dataclasses.fields(params_cls)} - {"seed", "max_iterations"}
    _unknown_keys(raw, allowed, prefix=f"optimizer.{name}.")
    # validates value ranges with the dataclass's own checks
    try:
        params_cls(**raw)
    except TypeError as e:
        raise InvalidConfigError(f"optimizer.{name}: {e}", key=f"optimizer.{name}") from e
    return dict(raw)


def _parse_optimizer(raw):
    if raw is None:
        raw = {}
    if isinstance(raw, str):
        raw = {"name": raw}
    _require(isinstance(raw, dict), "optimizer", "must be a name or a mapping")
    name = raw.get("name", "noabs")
    _require(isinstance(name, str), "optimizer.name", "must be a string")
    if name not in OPTIMIZER_REGISTRY:
        raise InvalidConfigError(
            f"unknown optimizer '{name}'; valid names: {', '.join(config.OPTIMIZERS)}", key="optimizer.name"
        )
    _unknown_keys(raw, {"name", *OPTIMIZER_REGISTRY}, prefix="optimizer.")
    params = {key: _parse_optimizer_params(key, value) for key, value in raw.items() if key != "name"}
    return name, params


def _parse_null_sector(raw, idx):
    key = f"mask.null_sectors[{idx}]"
    if isinstance(raw, dict):
        _unknown_keys(raw, set(NULL_SECTOR_KEYS), prefix=f"{key}.")
        missing = [k for k in NULL_SECTOR_KEYS if k not in raw]
        _require(not missing, key, f"missing {', '.join(missing)}")
        values = [raw[k] for k in NULL_SECTOR_KEYS]
    else:
        _require(isinstance(raw, (list, tuple)) and len(raw) == 3, key, "expects center, half_width, depth_db")
        values = list(raw)
    _require(all(_is_number(v) for v in values), key, "values must be numbers")
    return NullSector(*(float(v) for v in values))


def _parse_mask(raw):
    if raw is None:
        return MaskConfig()
    _require(isinstance(raw, dict), "mask", "must be a mapping")
    _unknown_keys(raw, MASK_KEYS, prefix="mask.")
    sector = raw.get("main_sector", config.DEFAULT_MAIN_SECTOR)
    _require(
        isinstance(sector, (list, tuple)) and len(sector) == 2 and all(_is_number(v) for v in sector),
        "mask.main_sector", "expects [low, high] in degrees",
    )
    ceiling = raw.get("sll_ceiling_db", config.DEFAULT_SLL_CEILING_DB)
    _require(_is_number(ceiling), "mask.sll_ceiling_db", "must be a number")
    nulls = raw.get("null_sectors") or []
    _require(isinstance(nulls, list), "mask.null_sectors", "must be a list")
    return MaskConfig(
        main_sector=(float(sector[0]), float(sector[1])),
        sll_ceiling_db=float(ceiling),
        null_sectors=tuple(_parse_null_sector(s, i) for i, s in enumerate(nulls)),
    )


def config_from_dict(data):
    """Validates a parsed configuration mapping and applies defaults."""
    _require(isinstance(data, dict), "config", "top level must be a mapping")
    _unknown_keys(data, TOP_LEVEL_KEYS)

    _require("seed" in data, "seed", "is required")
    seed = data["seed"]
    _require(is_count(seed) and 0 <= seed < SEED_LIMIT, "seed", "must be an integer in [0, 2**64)")

    num_elements = data.get("num_elements", config.DEFAULT_NUM_ELEMENTS)
    _require(is_count(num_elements) and num_elements >= 4 and num_elements % 2 == 0,
             "num_elements", "must be an even integer >= 4")

    spacing = data.get("spacing_wavelengths", config.DEFAULT_SPACING_WAVELENGTHS)
    _require(_is_number(spacing) and spacing > 0, "spacing_wavelengths", "must be > 0")

    grid_step = data.get("grid_step_deg", config.DEFAULT_GRID_STEP_DEG)
    _require(_is_number(grid_step), "grid_step_deg", "must be a number")
    try:
        theta_grid(float(grid_step))
    except InvalidInputError as e:
        raise InvalidConfigError(f"grid_step_deg: {e}", key="grid_step_deg") from e

    floor_db = data.get("floor_db", config.DEFAULT_FLOOR_DB)
    _require(_is_number(floor_db) and floor_db < 0, "floor_db", "must be < 0")

    iterations = data.get("iterations", config.DEFAULT_ITERATIONS)
    _require(is_count(iterations) and iterations >= 1, "iterations", "must be an integer >= 1")

    budget = data.get("evaluation_budget")
    _require(budget is None or (is_count(budget) and budget > 0), "evaluation_budget", "must be a positive integer")

    output_dir = data.get("output_dir", config.OUTPUT_DIR)
    _require(isinstance(output_dir, str) and output_dir, "output_dir", "must be a path")

    name, params = _parse_optimizer(data.get("optimizer"))
    mask = _parse_mask(data.get("mask"))
    try:
        build_mask(theta_grid(float(grid_step)), mask.main_sector, mask.sll_ceiling_db, mask.null_sectors)
    except InvalidConfigError as e:
        raise InvalidConfigError(f"mask.{e}", key=f"mask.{e.key}") from e
    return ExperimentConfig(
        seed=int(seed),
        optimizer=name,
        optimizer_params=params,
        num_elements=int(num_elements),
        spacing_wavelengths=float(spacing),
        grid_step_deg=float(grid_step),
        floor_db=float(floor_db),
        iterations=int(iterations),
        output_dir=output_dir,
        evaluation_budget=None if budget is None else int(budget),
        mask=mask,
    )


def load_config(path):
    """Reads and validates a YAML experiment file."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise InvalidConfigError(f"cannot read config {path}: {e}", key=None) from e
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        where = f" at line {line}" if line else ""
        raise ConfigParseError(f"cannot parse {path}{where}: {getattr(e, 'problem', e)}", line=line) from e
    if data is None:
        data = {}
    return config_from_dict(data)


def config_echo(cfg):
    """Plain mapping of the run-defining settings (output location excluded)."""
    return {
        "seed": cfg.seed,
        "num_elements": cfg.num_elements,
        "spacing_wavelengths": cfg.spacing_wavelengths,
        "grid_step_deg": cfg.grid_step_deg,
        "floor_db": cfg.floor_db,
        "iterations": cfg.iterations,
        "evaluation_budget": cfg.evaluation_budget,
        "mask": {
            "main_sector": list(cfg.mask.main_sector),
            "sll_ceiling_db": cfg.mask.sll_ceiling_db,
            "null_sectors": [dataclasses.asdict(s) for s in cfg.mask.null_sectors],
        },
        "optimizer": {"name": cfg.optimizer, **cfg.optimizer_params},
    }


# ==================== Problem setup ====================

def build_problem(cfg):
    """Geometry, mask and objective described by a configuration."""
    geometry = uniform_geometry(cfg.num_pairs, cfg.spacing_wavelengths)
    mask = build_mask(
        theta_grid(cfg.grid_step_deg),
        cfg.mask.main_sector,
        cfg.mask.sll_ceiling_db,
        cfg.mask.null_sectors,
    )
    objective = make_objective(geometry, mask, cfg.grid_step_deg, cfg.floor_db)
    return geometry, mask, objective


def make_params(name, cfg, iterations, seed):
    params_cls = OPTIMIZER_REGISTRY[name][0]
    overrides = cfg.optimizer_params.get(name, {})
    return params_cls(**overrides, max_iterations=iterations, seed=seed)


def run_optimizer(name, objective, dimension, params):
    optimize = OPTIMIZER_REGISTRY[name][1]
    return optimize(objective, dimension, params, make_rng(params.seed))


def sub_seed(seed, name):
    """Per-optimizer seed: the run seed XOR a stable 64-bit hash of the optimizer name."""
    digest = hashlib.md5(name.encode("utf-8")).digest()
    return (seed ^ int.from_bytes(digest[:8], "little")) % SEED_LIMIT


def _safe_sll(pattern):
    try:
        return side_lobe_level(pattern)
    except NoSideLobesError:
        return None


def _pattern_for(geometry, amplitudes, cfg):
    return compute_pattern(geometry, Excitation(tuple(amplitudes)), cfg.grid_step_deg, cfg.floor_db)


def summarize(cfg, geometry, mask, objective, result, name):
    pattern = _pattern_for(geometry, result.best_vector, cfg)
    uniform = np.ones(geometry.num_pairs)
    return pattern, RunSummary(
        best_fitness=float(result.best_fitness),
        sll_db=_safe_sll(pattern),
        null_depths=[[s.center, null_depth(pattern, s.center)] for s in mask.null_sectors],
        main_lobe_bounds=list(main_lobe_bounds(pattern)),
        hpbw_deg=half_power_beamwidth(pattern),
        fnbw_deg=first_null_beamwidth(pattern),
        evaluation_count=int(result.evaluation_count),
        wall_time=float(result.wall_time),
        seed=cfg.seed,
        optimizer=name,
        uniform_fitness=float(objective(uniform)),
        uniform_sll_db=_safe_sll(_pattern_for(geometry, uniform, cfg)),
        diagnostics=dict(result.diagnostics),
        config=config_echo(cfg),
    )


# ==================== Runs ====================

def run_experiment(cfg, output_dir=None):
    """
    Runs the configured optimizer once and writes pattern.csv, mask.csv,
    convergence.csv, best_vector.json, summary.json and timing.json.
    """
    out = ensure_output_dir(output_dir or cfg.output_dir)
    print(f"[*] Starting synthesis: {cfg.num_elements} elements, optimizer {cfg.optimizer}, seed {cfg.seed}")

    geometry, mask, objective = build_problem(cfg)
    params = make_params(cfg.optimizer, cfg, cfg.iterations, cfg.seed)
    result = run_optimizer(cfg.optimizer, objective, geometry.num_pairs, params)
    logger.info(f"{cfg.optimizer} finished in {result.wall_time:.2f}s ({result.evaluation_count} evaluations)")
    pattern, summary = summarize(cfg, geometry, mask, objective, result, cfg.optimizer)

    write_pattern(os.path.join(out, "pattern.csv"), pattern)
    write_mask(os.path.join(out, "mask.csv"), mask)
    write_convergence(os.path.join(out, "convergence.csv"), result.history)
    write_best_vector(os.path.join(out, "best_vector.json"), result.best_vector)
    write_json(os.path.join(out, "summary.json"), summary.to_record())
    write_json(os.path.join(out, "timing.json"), {"wall_time": summary.wall_time})

    sll = "n/a" if summary.sll_db is None else f"{summary.sll_db:.2f} dB"
    print(f"[+] Fitness {summary.best_fitness:.6g} (uniform {summary.uniform_fitness:.6g}), SLL {sll}")
    for angle, depth in summary.null_depths:
        print(f"    - Null at {angle:g}°: {depth:.2f} dB")
    print(f"[+] Artifacts written to {out}")

    send_alert(
        "Synthesis run finished",
        severity="info",
        details={"best_fitness": summary.best_fitness, "sll_db": summary.sll_db, "output_dir": out},
        run={"optimizer": cfg.optimizer, "seed": cfg.seed, "num_elements": cfg.num_elements},
    )
    return summary


def _evaluations_per_iteration(params):
    if isinstance(params, GaParams):
        return params.population_size - params.elitism
    return params.population


def plan_budget(cfg, optimizer_names):
    """
    Iteration count per optimizer so that all spend the same evaluation
    budget, within one population.
    """
    first = make_params(optimizer_names[0], cfg, cfg.iterations, cfg.seed)
    budget = cfg.evaluation_budget or first.population * (cfg.iterations + 1)
    plan = {}
    for name in optimizer_names:
        sample = make_params(name, cfg, 0, cfg.seed)
        population = sample.population
        per_iteration = _evaluations_per_iteration(sample)
        iterations = (budget - population) // per_iteration if per_iteration else 0
        if population > budget or iterations < 1:
            raise InvalidConfigError(
                f"budget mismatch: {name} needs {population} evaluations to start, budget is {budget}",
                key="evaluation_budget",
            )
        plan[name] = iterations
    return budget, plan


def _worst_null(pattern, mask):
    depths = [null_depth(pattern, s.center) for s in mask.null_sectors]
    return max(depths) if depths else None


def compare(cfg, optimizer_names, output_dir=None):
    """
    Runs each named optimizer under an equal evaluation budget and writes
    comparison.csv; row 0 is always the uniform excitation baseline.
    """
    names = list(optimizer_names)
    if len(names) < 2:
        raise InvalidConfigError("compare needs at least two optimizer names", key="optimizers")
    for name in names:
        if not isinstance(name, str) or name not in OPTIMIZER_REGISTRY:
            raise InvalidConfigError(
                f"unknown optimizer '{name}'; valid names: {', '.join(config.OPTIMIZERS)}", key="optimizers"
            )
    out = ensure_output_dir(output_dir or cfg.output_dir)
    budget, plan = plan_budget(cfg, names)
    logger.info(f"Evaluation budget {budget}, iterations per optimizer: {plan}")
    print(f"[*] Comparing {', '.join(names)} with a budget of {budget} evaluations")

    geometry, mask, objective = build_problem(cfg)
    start = time.perf_counter()
    uniform = np.ones(geometry.num_pairs)
    uniform_pattern = _pattern_for(geometry, uniform, cfg)
    rows = [{
        "name": "uniform",
        "best_fitness": float(objective(uniform)),
        "sll_db": _safe_sll(uniform_pattern),
        "worst_null_depth_db": _worst_null(uniform_pattern, mask),
        "evaluation_count": 1,
        "wall_time": time.perf_counter() - start,
    }]

    for name in names:
        print(f"[*] Running {name} for {plan[name]} iterations...")
        params = make_params(name, cfg, plan[name], sub_seed(cfg.seed, name))
        result = run_optimizer(name, objective, geometry.num_pairs, params)
        pattern = _pattern_for(geometry, result.best_vector, cfg)
        rows.append({
            "name": name,
            "best_fitness": float(result.best_fitness),
            "sll_db": _safe_sll(pattern),
            "worst_null_depth_db": _worst_null(pattern, mask),
            "evaluation_count": int(result.evaluation_count),
            "wall_time": float(result.wall_time),
        })
        write_convergence(os.path.join(out, f"convergence_{name}.csv"), result.history)
        print(f"[+] {name}: fitness {result.best_fitness:.6g} after {result.evaluation_count} evaluations")

    table = pd.DataFrame(rows, columns=list(rows[0]))
    write_table(os.path.join(out, "comparison.csv"), {col: table[col].tolist() for col in table.columns})
    print(f"[+] Comparison written to {os.path.join(out, 'comparison.csv')}")
    send_alert(
        "Optimizer comparison finished",
        severity="info",
        details={row["name"]: row["best_fitness"] for row in rows},
        run={"optimizer": ",".join(names), "seed": cfg.seed, "num_elements": cfg.num_elements, "budget": budget},
    )
    return table


def regenerate_pattern(vector_path, cfg, output_dir=None):
    """Re-emits pattern.csv for a persisted best_vector.json."""
    amplitudes = load_best_vector(vector_path)
    if len(amplitudes) != cfg.num_pairs:
        raise InvalidInputError(
            f"{vector_path} holds {len(amplitudes)} amplitudes, config describes {cfg.num_pairs} element pairs"
        )
    geometry = uniform_geometry(cfg.num_pairs, cfg.spacing_wavelengths)
    pattern = _pattern_for(geometry, amplitudes, cfg)
    out = ensure_output_dir(output_dir or cfg.output_dir)
    path = write_pattern(os.path.join(out, "pattern.csv"), pattern)
    print(f"[+] Pattern written to {path}")
    return pattern
