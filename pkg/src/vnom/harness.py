"""Configuration-driven Monte-Carlo experiment runner: simulation
experiments, the real-data seed-resampling protocol, and the
subsample-and-average-position procedure."""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

import vnom
from vnom.canonical import (
    InfeasibleEnumerationError,
    canonical_nominate,
    partition_count,
)
from vnom.core import (
    PROB_EPS,
    BlockModel,
    LabeledGraph,
    contiguous_assignment,
    estimate_lambda,
    load_edge_list,
    mix_lambda,
    sample_sbm,
    sample_sbm_blockwise,
)
from vnom.likelihood import likelihood_nominate
from vnom.metrics import average_precision, mean_average_precision
from vnom.spectral import default_dimension, spectral_nominate

SCHEMES = ("canonical", "likelihood", "spectral")

# Above this vertex count the SBM sampler draws block pairs separately to
# avoid materializing an N x N float matrix.
_BLOCKWISE_LIMIT = 2000


class ConfigError(ValueError):
    """An invalid or unparseable experiment configuration."""


@dataclass(frozen=True)
class Hyperparameters:
    d: int | None = None
    kmeans_restarts: int = 10
    sgm_max_iter: int = 20
    sgm_tol: float = 1e-6
    sgm_restarts: int = 1
    eps: float = PROB_EPS
    enumeration_guard: int = 10**8

    @classmethod
    def from_dict(cls, data):
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown hyperparameter keys: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    mode: str
    schemes: tuple
    replicates: int
    master_seed: int
    model: dict | None = None
    data: dict | None = None
    hyper: Hyperparameters = field(default_factory=Hyperparameters)

    def __post_init__(self):
        if self.mode not in ("simulation", "realdata", "subsample"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if not self.schemes and self.mode != "subsample":
            raise ConfigError("at least one scheme is required")
        for s in self.schemes:
            if s not in SCHEMES:
                raise ConfigError(f"unknown scheme {s!r}")
        if self.replicates < 1:
            raise ConfigError("replicates must be at least 1")
        if self.mode == "simulation" and self.model is None:
            raise ConfigError("simulation mode requires a 'model' section")
        if self.mode in ("realdata", "subsample") and self.data is None:
            raise ConfigError(f"{self.mode} mode requires a 'data' section")


_TOP_KEYS = {"name", "mode", "schemes", "replicates", "master_seed",
             "model", "data", "hyperparameters"}
_MODEL_KEYS = {"K", "base_lambda", "theta", "m_sizes", "n_sizes"}
_DATA_KEYS = {"edges", "labels", "K", "seed_counts", "subsample_sizes",
              "seeds_per_class"}


def parse_config(data):
    """Validate a config dict (strict: unknown keys are errors)."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key in ("mode", "replicates", "master_seed"):
        if key not in data:
            raise ConfigError(f"missing required config key {key!r}")
    model = data.get("model")
    if model is not None:
        bad = set(model) - _MODEL_KEYS
        if bad:
            raise ConfigError(f"unknown model keys: {sorted(bad)}")
        for key in ("K", "base_lambda", "m_sizes", "n_sizes"):
            if key not in model:
                raise ConfigError(f"missing model key {key!r}")
    section = data.get("data")
    if section is not None:
        bad = set(section) - _DATA_KEYS
        if bad:
            raise ConfigError(f"unknown data keys: {sorted(bad)}")
    return ExperimentConfig(
        name=str(data.get("name", "experiment")),
        mode=data["mode"],
        schemes=tuple(data.get("schemes", ())),
        replicates=int(data["replicates"]),
        master_seed=int(data["master_seed"]),
        model=model,
        data=section,
        hyper=Hyperparameters.from_dict(data.get("hyperparameters", {})),
    )


def load_config(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return parse_config(data)


def build_model(config):
    spec = config.model
    K = int(spec["K"])
    base = np.asarray(spec["base_lambda"], dtype=float)
    if base.shape != (K, K):
        raise ConfigError(f"base_lambda must be {K}x{K}")
    lam = mix_lambda(base, float(spec.get("theta", 1.0)))
    return BlockModel(m_sizes=spec["m_sizes"], n_sizes=spec["n_sizes"], lam=lam)


@dataclass
class SchemeOutcome:
    curve: np.ndarray
    map: float
    se: float
    seconds_per_replicate: float


@dataclass
class ExperimentResult:
    name: str
    n: int
    n1: int
    chance: float
    replicates: int
    master_seed: int
    schemes: dict
    config_echo: dict
    raw_hits: dict | None = None


def _replicate_seed(master_seed, replicate, stream):
    return int(np.random.SeedSequence((master_seed, replicate, stream)).generate_state(1)[0])


def _nominate_all(graph, model, config, replicate):
    """Run every requested scheme on one realized graph."""
    hyper = config.hyper
    results = {}
    for scheme in config.schemes:
        start = time.perf_counter()
        if scheme == "canonical":
            nomination = canonical_nominate(
                graph, model, guard=hyper.enumeration_guard, eps=hyper.eps
            )
        elif scheme == "likelihood":
            nomination = likelihood_nominate(
                graph, model, eps=hyper.eps, max_iter=hyper.sgm_max_iter,
                tol=hyper.sgm_tol, restarts=hyper.sgm_restarts,
                rng_seed=_replicate_seed(config.master_seed, replicate, 1),
            )
        else:
            d = hyper.d if hyper.d is not None else default_dimension(model.lam)
            nomination = spectral_nominate(
                graph, model.K, d=d, restarts=hyper.kmeans_restarts,
                rng_seed=_replicate_seed(config.master_seed, replicate, 2),
            )
        elapsed = time.perf_counter() - start
        truth = graph.true_labels
        hits = (truth[nomination.positions()] == 1).astype(np.int64)
        ap = average_precision(nomination, truth, model.n_sizes[0])
        results[scheme] = (hits, ap, elapsed)
    return results


def _simulation_replicate(config, replicate):
    model = build_model(config)
    membership = contiguous_assignment(model)
    seed = _replicate_seed(config.master_seed, replicate, 0)
    if model.num_vertices > _BLOCKWISE_LIMIT:
        graph = sample_sbm_blockwise(model, membership, seed)
    else:
        graph = sample_sbm(model, membership, seed)
    graph = _shuffle_ambiguous(graph, config, replicate)
    return _nominate_all(graph, model, config, replicate)


def _shuffle_ambiguous(graph, config, replicate):
    """Relabel the ambiguous vertices by a random permutation.

    Distributionally a no-op (the SBM is exchangeable given block sizes),
    but it keeps deterministic vertex-id tie-breaks from aligning with the
    contiguous planted membership, which would fake signal in models where
    schemes produce tied scores.
    """
    m, n = graph.seed_count, graph.ambiguous_count
    rng = np.random.default_rng(
        np.random.SeedSequence((config.master_seed, replicate, 3))
    )
    perm = rng.permutation(n)
    order = np.concatenate([np.arange(m), m + perm])
    return LabeledGraph(
        adjacency=graph.adjacency[np.ix_(order, order)],
        seed_labels=graph.seed_labels,
        true_labels=graph.true_labels[perm],
    )


def _realdata_replicate(config, replicate):
    graph, model = _realdata_instance(config, replicate)
    return _nominate_all(graph, model, config, replicate)


def _run_replicates(config, replicate_fn, workers=1):
    indices = range(config.replicates)
    if workers <= 1:
        return [replicate_fn(config, r) for r in indices]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # order preserved by map, so aggregation stays deterministic
        return list(pool.map(replicate_fn, [config] * config.replicates, indices))


def _aggregate(config, per_replicate, n, n1):
    schemes = {}
    for scheme in config.schemes:
        hit_matrix = np.stack([rep[scheme][0] for rep in per_replicate])
        aps = [rep[scheme][1] for rep in per_replicate]
        seconds = float(np.mean([rep[scheme][2] for rep in per_replicate]))
        map_, se = mean_average_precision(aps)
        schemes[scheme] = SchemeOutcome(
            curve=hit_matrix.mean(axis=0),
            map=map_,
            se=se,
            seconds_per_replicate=seconds,
        )
    return schemes, {s: np.stack([rep[s][0] for rep in per_replicate]) for s in config.schemes}


def _config_echo(config):
    echo = {
        "name": config.name,
        "mode": config.mode,
        "schemes": list(config.schemes),
        "replicates": config.replicates,
        "master_seed": config.master_seed,
    }
    if config.model is not None:
        echo["model"] = config.model
    if config.data is not None:
        echo["data"] = config.data
    echo["hyperparameters"] = {
        k: getattr(config.hyper, k) for k in config.hyper.__dataclass_fields__
    }
    return echo


def run_simulation(config, workers=1, log_raw=False):
    """Realize, nominate, and score `replicates` SBM graphs; aggregate
    per-position hit curves and MAP per scheme."""
    model = build_model(config)
    if "canonical" in config.schemes:
        count = partition_count(model.n_sizes)
        if count > config.hyper.enumeration_guard:
            raise InfeasibleEnumerationError(
                f"{count} partitions exceed the enumeration guard; "
                "drop the canonical scheme at this scale"
            )
    per_replicate = _run_replicates(config, _simulation_replicate, workers)
    schemes, raw = _aggregate(config, per_replicate, model.n, model.n_sizes[0])
    return ExperimentResult(
        name=config.name,
        n=model.n,
        n1=model.n_sizes[0],
        chance=model.n_sizes[0] / model.n,
        replicates=config.replicates,
        master_seed=config.master_seed,
        schemes=schemes,
        config_echo=_config_echo(config),
        raw_hits=raw if log_raw else None,
    )


def _load_full_labels(path, K):
    """Labels file covering every vertex (vertex_id block_id per line)."""
    labels = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.split()
            if len(parts) != 2:
                raise ConfigError(f"{path}:{lineno}: expected 'vertex block'")
            v, blk = int(parts[0]), int(parts[1])
            if not 1 <= blk <= K:
                raise ConfigError(f"{path}:{lineno}: block {blk} outside 1..{K}")
            labels[v] = blk
    if not labels:
        raise ConfigError(f"{path}: no labels found")
    N = max(labels)
    if set(labels) != set(range(1, N + 1)):
        raise ConfigError(f"{path}: labels must cover vertices 1..{N} exactly")
    return np.array([labels[v] for v in range(1, N + 1)], dtype=int)


_dataset_cache = {}


def _load_dataset(config):
    section = config.data
    if "edges" not in section or "labels" not in section or "K" not in section:
        raise ConfigError("data section requires 'edges', 'labels', and 'K'")
    key = (section["edges"], section["labels"], int(section["K"]))
    if key not in _dataset_cache:
        K = int(section["K"])
        truth = _load_full_labels(section["labels"], K)
        graph = load_edge_list(section["edges"], num_vertices=len(truth))
        _dataset_cache[key] = (graph.adjacency, truth, K)
    return _dataset_cache[key]


def _reorder_instance(adjacency, truth, seed_ids, ambiguous_ids, lam, eps):
    """Build a LabeledGraph with the sampled seeds occupying the vertex
    prefix, plus the matching BlockModel."""
    order = np.concatenate([seed_ids, ambiguous_ids])
    adj = adjacency[np.ix_(order, order)]
    seed_labels = truth[seed_ids]
    true_labels = truth[ambiguous_ids]
    graph = LabeledGraph(adjacency=adj, seed_labels=seed_labels, true_labels=true_labels)
    K = int(truth.max())
    m_sizes = [int((seed_labels == k).sum()) for k in range(1, K + 1)]
    n_sizes = [int((true_labels == k).sum()) for k in range(1, K + 1)]
    model = BlockModel(m_sizes=m_sizes, n_sizes=n_sizes, lam=lam)
    return graph, model


def _realdata_instance(config, replicate):
    adjacency, truth, K = _load_dataset(config)
    seed_counts = config.data.get("seed_counts")
    if seed_counts is None or len(seed_counts) != K:
        raise ConfigError("realdata mode requires 'seed_counts' with one entry per block")
    rng = np.random.default_rng(
        np.random.SeedSequence((config.master_seed, replicate, 0))
    )
    seed_ids = []
    for k in range(1, K + 1):
        members = np.flatnonzero(truth == k)
        want = int(seed_counts[k - 1])
        if want > len(members):
            raise ConfigError(
                f"block {k} has {len(members)} vertices; cannot seed {want}"
            )
        picked = rng.choice(members, size=want, replace=False)
        seed_ids.append(np.sort(picked))
    seed_ids = np.concatenate(seed_ids)
    ambiguous_ids = np.setdiff1d(np.arange(len(truth)), seed_ids)
    # estimate Lambda from the seed-induced subgraph of this split
    tmp = LabeledGraph(
        adjacency=adjacency[np.ix_(
            np.concatenate([seed_ids, ambiguous_ids]),
            np.concatenate([seed_ids, ambiguous_ids]),
        )],
        seed_labels=truth[seed_ids],
        true_labels=truth[ambiguous_ids],
    )
    lam_hat = estimate_lambda(tmp, K, eps=config.hyper.eps)
    return _reorder_instance(adjacency, truth, seed_ids, ambiguous_ids, lam_hat,
                             config.hyper.eps)


def run_realdata(config, workers=1, log_raw=False):
    """Seed-resampling protocol on a user-supplied labeled graph: per
    replicate, sample seeds per block, estimate Lambda-hat from their
    induced densities, nominate, and score against the held-out labels."""
    _, truth, K = _load_dataset(config)
    per_replicate = _run_replicates(config, _realdata_replicate, workers)
    graph0, model0 = _realdata_instance(config, 0)
    schemes, raw = _aggregate(config, per_replicate, model0.n, model0.n_sizes[0])
    return ExperimentResult(
        name=config.name,
        n=model0.n,
        n1=model0.n_sizes[0],
        chance=model0.n_sizes[0] / model0.n,
        replicates=config.replicates,
        master_seed=config.master_seed,
        schemes=schemes,
        config_echo=_config_echo(config),
        raw_hits=raw if log_raw else None,
    )


def run_subsample_average(config, workers=1):
    """Subsample two classes repeatedly, nominate the ambiguous members
    with the likelihood scheme, and average each vertex's nomination
    position over its selections."""
    adjacency, truth, K = _load_dataset(config)
    if K != 2:
        raise ConfigError("subsample mode expects exactly two classes")
    sizes = config.data.get("subsample_sizes", [125, 125])
    seeds_per = config.data.get("seeds_per_class", [50, 50])
    if len(sizes) != 2 or len(seeds_per) != 2:
        raise ConfigError("subsample_sizes and seeds_per_class need two entries")
    for k in (1, 2):
        have = int((truth == k).sum())
        if sizes[k - 1] > have:
            raise ConfigError(f"class {k} has {have} vertices; cannot sample {sizes[k-1]}")
        if seeds_per[k - 1] >= sizes[k - 1]:
            raise ConfigError("seeds_per_class must be below subsample_sizes")

    position_sum = np.zeros(len(truth))
    selected = np.zeros(len(truth), dtype=np.int64)
    for r in range(config.replicates):
        rng = np.random.default_rng(
            np.random.SeedSequence((config.master_seed, r, 0))
        )
        seed_ids, ambiguous_ids = [], []
        for k in (1, 2):
            members = np.flatnonzero(truth == k)
            chosen = rng.choice(members, size=int(sizes[k - 1]), replace=False)
            seeds = rng.choice(chosen, size=int(seeds_per[k - 1]), replace=False)
            seed_ids.append(np.sort(seeds))
            ambiguous_ids.append(np.sort(np.setdiff1d(chosen, seeds)))
        seed_ids = np.concatenate(seed_ids)
        ambiguous_ids = np.concatenate(ambiguous_ids)
        graph, model = _subsample_instance(
            adjacency, truth, seed_ids, ambiguous_ids, config.hyper.eps
        )
        nomination = likelihood_nominate(
            graph, model, eps=config.hyper.eps,
            max_iter=config.hyper.sgm_max_iter, tol=config.hyper.sgm_tol,
            restarts=config.hyper.sgm_restarts,
            rng_seed=_replicate_seed(config.master_seed, r, 1),
        )
        for pos, local_v in enumerate(nomination.order, start=1):
            original = ambiguous_ids[local_v - graph.seed_count]
            position_sum[original] += pos
            selected[original] += 1

    with np.errstate(invalid="ignore"):
        mean_position = np.where(selected > 0, position_sum / np.maximum(selected, 1), np.nan)
    return {
        "vertex_class": truth,
        "times_selected": selected,
        "mean_position": mean_position,
    }


def _subsample_instance(adjacency, truth, seed_ids, ambiguous_ids, eps):
    order = np.concatenate([seed_ids, ambiguous_ids])
    adj = adjacency[np.ix_(order, order)]
    graph = LabeledGraph(
        adjacency=adj, seed_labels=truth[seed_ids], true_labels=truth[ambiguous_ids]
    )
    lam_hat = estimate_lambda(graph, int(truth.max()), eps=eps)
    K = int(truth.max())
    m_sizes = [int((truth[seed_ids] == k).sum()) for k in range(1, K + 1)]
    n_sizes = [int((truth[ambiguous_ids] == k).sum()) for k in range(1, K + 1)]
    model = BlockModel(m_sizes=m_sizes, n_sizes=n_sizes, lam=lam_hat)
    return graph, model


def _format_float(x):
    return f"{x:.10g}"


def emit_results(result, csv_path=None, json_path=None):
    """Write the per-position curve CSV and the deterministic JSON
    summary. Per-replicate timing goes to a separate sidecar so the main
    outputs are byte-identical across reruns."""
    if csv_path is not None:
        _write_file(csv_path, _curve_csv(result))
        if result.raw_hits is not None:
            _write_file(str(csv_path) + ".raw.csv", _raw_csv(result))
    if json_path is not None:
        _write_file(json_path, _summary_json(result))
        _write_file(str(json_path) + ".timing.json", _timing_json(result))


def _write_file(path, text):
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def _curve_csv(result):
    names = list(result.schemes)
    lines = ["position," + ",".join(names) + ",chance"]
    for i in range(result.n):
        row = [str(i + 1)]
        row.extend(_format_float(result.schemes[s].curve[i]) for s in names)
        row.append(_format_float(result.chance))
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _raw_csv(result):
    lines = ["replicate,scheme," + ",".join(f"pos{i+1}" for i in range(result.n))]
    for scheme, hits in result.raw_hits.items():
        for r in range(hits.shape[0]):
            lines.append(f"{r},{scheme}," + ",".join(str(int(h)) for h in hits[r]))
    return "\n".join(lines) + "\n"


def _summary_json(result):
    payload = {
        "name": result.name,
        "version": vnom.__version__,
        "master_seed": result.master_seed,
        "replicates": result.replicates,
        "n": result.n,
        "n1": result.n1,
        "chance": result.chance,
        "schemes": {
            s: {"map": o.map, "se": o.se, "curve": [float(x) for x in o.curve]}
            for s, o in result.schemes.items()
        },
        "config": result.config_echo,
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _timing_json(result):
    payload = {
        s: {"seconds_per_replicate": o.seconds_per_replicate}
        for s, o in result.schemes.items()
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def subsample_table_csv(table):
    """CSV for the per-vertex average nomination position table."""
    lines = ["vertex,class,times_selected,mean_position"]
    truth = table["vertex_class"]
    for v in range(len(truth)):
        cnt = int(table["times_selected"][v])
        mean = "" if cnt == 0 else _format_float(float(table["mean_position"][v]))
        lines.append(f"{v + 1},{int(truth[v])},{cnt},{mean}")
    return "\n".join(lines) + "\n"
