"""Experiment orchestration: datasets in, trace CSVs out.

Repetition seeding: each repetition seed ``r`` spawns two independent
streams, ``default_rng([r, 0])`` for dataset generation (unless the synth
config pins its own seed, which freezes the dataset across repetitions)
and ``default_rng([r, 1])`` for the algorithm.  With ``timing`` disabled
the recorded seconds are all zero and trace files are byte-reproducible.

Trace CSV: header ``iteration,cells_total,loss,cumulative_seconds,
cumulative_solver_calls,cumulative_solver_iterations``; floats carry
9 significant digits (``format(x, '.9g')``, so 0.0 prints as ``0``).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import fileio
from .baselines import SphConfig, infer_random, infer_sph
from .complexes import CellComplex, InvalidCell
from .fileio import InvariantViolation, ParseError
from .hodge import SolverConfig, make_timer
from .mfci import InferenceConfig, infer_mfci
from .synth import SynthConfig, random_complex, sample_flows, save_dataset


class DegenerateReference(Exception):
    """Relative performance is undefined when the random baseline is not
    strictly worse than the reference algorithm."""


ALGORITHMS = ("mfci", "sph", "random")


@dataclass(frozen=True)
class DatasetPaths:
    edges: Path
    flows: Path
    cells: Path | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: a data source, an algorithm, and repetition seeds."""

    algo: str
    seeds: tuple
    out_dir: Path
    synth: SynthConfig | None = None
    data: DatasetPaths | None = None
    mfci: InferenceConfig | None = None
    sph: SphConfig | None = None
    random_cells: int | None = None
    timing: bool = True

    def __post_init__(self):
        if self.algo not in ALGORITHMS:
            raise ValueError(f"algo must be one of {ALGORITHMS}, got {self.algo!r}")
        if (self.synth is None) == (self.data is None):
            raise ValueError("exactly one of synth config and data paths is required")
        if not self.seeds:
            raise ValueError("at least one repetition seed is required")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("repetition seeds must be distinct")
        needed = {"mfci": self.mfci, "sph": self.sph, "random": self.random_cells}[self.algo]
        if needed is None:
            raise ValueError(f"missing configuration for algorithm {self.algo!r}")


class TraceRecord(NamedTuple):
    iteration: int
    cells_total: int
    loss: float
    cumulative_seconds: float
    cumulative_solver_calls: int
    cumulative_solver_iterations: int


TRACE_HEADER = "iteration,cells_total,loss,cumulative_seconds,cumulative_solver_calls,cumulative_solver_iterations"


def trace_to_records(trace):
    return [TraceRecord(r.iteration, r.cells_total, r.loss, r.cumulative_seconds,
                        r.cumulative_solver_calls, r.cumulative_solver_iterations)
            for r in trace.records]


def write_trace(records, path):
    """Write trace records as CSV (see module docstring for the format)."""
    if not records:
        raise ValueError("no records to write")
    lines = [TRACE_HEADER]
    for r in records:
        lines.append(",".join([
            str(r.iteration),
            str(r.cells_total),
            format(r.loss, ".9g"),
            format(r.cumulative_seconds, ".9g"),
            str(r.cumulative_solver_calls),
            str(r.cumulative_solver_iterations),
        ]))
    Path(path).write_text("\n".join(lines) + "\n")


def read_trace(path):
    path = Path(path)
    if not path.exists():
        raise ParseError(f"{path}: file not found")
    lines = [l for l in path.read_text().splitlines() if l.strip()]
    if not lines or lines[0] != TRACE_HEADER:
        raise ParseError(f"{path}:1: bad trace header")
    out = []
    for i, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 6:
            raise ParseError(f"{path}:{i}: expected 6 fields")
        out.append(TraceRecord(int(parts[0]), int(parts[1]), float(parts[2]),
                               float(parts[3]), int(parts[4]), int(parts[5])))
    return out


def relative_performance(random_err, algo_err, reference_err):
    """Normalized error position: 0 means as good as random cells, 1 as good
    as the reference algorithm, above 1 better than the reference.
    Computed as (r - a) / (r - b).

    Raises
    ------
    DegenerateReference
        When the random baseline is not strictly worse than the reference.
    """
    if random_err <= reference_err:
        raise DegenerateReference(
            f"random error {random_err} must exceed reference error {reference_err}")
    return (random_err - algo_err) / (random_err - reference_err)


def load_dataset(paths):
    """Load ``(graph, flows, ground_truth_cells_or_None)`` from dataset files,
    validating every structural invariant.

    Raises
    ------
    ParseError, InvariantViolation
    """
    graph = fileio.read_edge_list(paths.edges)
    flows = fileio.read_flows(paths.flows, edge_count=graph.edge_count)
    truth = None
    if paths.cells is not None:
        cells = fileio.read_cells(paths.cells, graph)
        try:
            truth = CellComplex(graph, cells)
        except InvalidCell as exc:
            raise InvariantViolation(f"{paths.cells}: {exc}") from exc
    return graph, flows, truth


def _materialize(cfg, seed):
    """Dataset for one repetition: load files, or generate synthetically."""
    if cfg.data is not None:
        graph, flows, _ = load_dataset(cfg.data)
        return graph, flows
    synth = cfg.synth
    if synth.seed is not None:
        data_rng = np.random.default_rng(synth.seed)
    else:
        data_rng = np.random.default_rng([seed, 0])
    complex_ = random_complex(synth, data_rng)
    flows = sample_flows(complex_, synth.flow_count, synth.cell_std, synth.noise_std, data_rng)
    return complex_.graph, flows


def run_one(cfg, seed):
    """Run a single repetition and return its InferenceTrace."""
    graph, flows = _materialize(cfg, seed)
    rng = np.random.default_rng([seed, 1])
    timer = make_timer(cfg.timing)
    if cfg.algo == "mfci":
        _, trace = infer_mfci(graph, flows, cfg.mfci, rng, timer)
    elif cfg.algo == "sph":
        _, trace = infer_sph(graph, flows, cfg.sph, rng, timer)
    else:
        _, trace = infer_random(graph, flows, cfg.random_cells, rng, timer)
    return trace


def run_experiment(cfg, echo=print):
    """Run every repetition, write one trace CSV per repetition plus a
    summary line, and return the traces."""
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    traces = []
    for seed in cfg.seeds:
        trace = run_one(cfg, seed)
        path = out_dir / f"trace_{cfg.algo}_seed{seed}.csv"
        write_trace(trace_to_records(trace), path)
        final = trace.final
        echo(f"algo={cfg.algo} seed={seed} cells={final.cells_total} "
             f"loss={format(final.loss, '.9g')} seconds={format(final.cumulative_seconds, '.9g')} "
             f"solver_calls={final.cumulative_solver_calls} -> {path}")
        traces.append(trace)
    return traces


def run_bench(cfg, algos, echo=print):
    """Sweep algorithms x seeds and write one combined CSV with ``algo`` and
    ``seed`` columns prepended to the trace columns."""
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = ["algo,seed," + TRACE_HEADER]
    for algo in algos:
        algo_cfg = _replace_algo(cfg, algo)
        for seed in cfg.seeds:
            trace = run_one(algo_cfg, seed)
            for r in trace_to_records(trace):
                lines.append(f"{algo},{seed}," + ",".join([
                    str(r.iteration), str(r.cells_total), format(r.loss, ".9g"),
                    format(r.cumulative_seconds, ".9g"),
                    str(r.cumulative_solver_calls), str(r.cumulative_solver_iterations)]))
            echo(f"bench: algo={algo} seed={seed} final_loss={format(trace.final.loss, '.9g')}")
    path = out_dir / "bench.csv"
    path.write_text("\n".join(lines) + "\n")
    return path


def _replace_algo(cfg, algo):
    import dataclasses

    return dataclasses.replace(cfg, algo=algo)


# ---------------------------------------------------------------------------
# Config-file binding


def _need(raw, key, cast, default=None):
    if key not in raw:
        if default is not None:
            return default
        raise ValueError(f"missing config key {key!r}")
    try:
        return cast(raw[key])
    except (TypeError, ValueError) as exc:
        raise ValueError(f"config key {key!r}: {exc}") from exc


def _opt(raw, key, cast, default=None):
    if key not in raw or raw[key] == "":
        return default
    try:
        return cast(raw[key])
    except (TypeError, ValueError) as exc:
        raise ValueError(f"config key {key!r}: {exc}") from exc


def _as_bool(text):
    lowered = text.strip().lower()
    if lowered in ("1", "true", "on", "yes"):
        return True
    if lowered in ("0", "false", "off", "no"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _as_seeds(text):
    seeds = tuple(int(tok) for tok in text.split())
    if not seeds:
        raise ValueError("empty seed list")
    return seeds


def solver_from_raw(raw):
    return SolverConfig(
        residual_tolerance=_opt(raw, "solver.tolerance", float, 1e-8),
        max_iterations=_opt(raw, "solver.max_iterations", int, None),
    )


def synth_from_raw(raw):
    if "synth.nodes" not in raw:
        return None
    return SynthConfig(
        node_count=_need(raw, "synth.nodes", int),
        edge_probability=_need(raw, "synth.edge_probability", float),
        planted_cells=_need(raw, "synth.cells", int),
        flow_count=_need(raw, "synth.flows", int),
        cell_std=_opt(raw, "synth.cell_std", float, 1.0),
        noise_std=_opt(raw, "synth.noise_std", float, 0.0),
        seed=_opt(raw, "synth.seed", int, None),
    )


def data_from_raw(raw):
    if "data.edges" not in raw:
        return None
    cells = _opt(raw, "data.cells", Path, None)
    return DatasetPaths(
        edges=_need(raw, "data.edges", Path),
        flows=_need(raw, "data.flows", Path),
        cells=cells,
    )


def mfci_from_raw(raw, solver):
    if "mfci.total_cells" not in raw:
        return None
    return InferenceConfig(
        total_cells=_need(raw, "mfci.total_cells", int),
        candidates_per_iteration=_opt(raw, "mfci.candidates", int, 1),
        added_per_iteration=_opt(raw, "mfci.added", int, 1),
        factorization_rank=_opt(raw, "mfci.rank", int, None),
        method=_opt(raw, "mfci.method", str, "svd"),
        discretization=_opt(raw, "mfci.discretization", str, "deterministic"),
        evaluate_candidates=_opt(raw, "mfci.evaluate", _as_bool, None),
        projection=_opt(raw, "mfci.projection", str, "exact"),
        solver=solver,
    )


def sph_from_raw(raw, solver):
    if "sph.total_cells" not in raw:
        return None
    return SphConfig(
        total_cells=_need(raw, "sph.total_cells", int),
        candidates_per_iteration=_opt(raw, "sph.candidates", int, 11),
        solver=solver,
    )


def experiment_from_config(path, out_dir=None, seed=None, algo=None):
    """Build an ExperimentConfig from a flat config file; the CLI flags
    --out/--seed/--algo override the corresponding keys."""
    raw = fileio.parse_config(path)
    solver = solver_from_raw(raw)
    chosen_algo = algo or raw.get("algo")
    if chosen_algo is None:
        raise ValueError("missing config key 'algo' (or --algo flag)")
    seeds = (seed,) if seed is not None else _opt(raw, "run.seeds", _as_seeds, (0,))
    out = Path(out_dir) if out_dir is not None else Path(_need(raw, "run.out", str, "."))
    return ExperimentConfig(
        algo=chosen_algo,
        seeds=tuple(seeds),
        out_dir=out,
        synth=synth_from_raw(raw),
        data=data_from_raw(raw),
        mfci=mfci_from_raw(raw, solver),
        sph=sph_from_raw(raw, solver),
        random_cells=_opt(raw, "random.total_cells", int, None),
        timing=_opt(raw, "run.timing", _as_bool, True),
    )


def synth_dataset_from_config(path, out_dir, seed=None):
    """The ``synth`` subcommand: generate one dataset and write it out."""
    raw = fileio.parse_config(path)
    synth = synth_from_raw(raw)
    if synth is None:
        raise ValueError("config has no synth.* section")
    if seed is not None:
        import dataclasses

        synth = dataclasses.replace(synth, seed=seed)
    rng = np.random.default_rng(synth.seed)
    complex_ = random_complex(synth, rng)
    flows = sample_flows(complex_, synth.flow_count, synth.cell_std, synth.noise_std, rng)
    return save_dataset(out_dir, complex_, flows, synth)


def evaluate_cells_from_config(path):
    """The ``eval`` subcommand: exact loss of a cell file against flows."""
    raw = fileio.parse_config(path)
    data = data_from_raw(raw)
    if data is None or data.cells is None:
        raise ValueError("eval requires data.edges, data.flows and data.cells")
    graph, flows, truth = load_dataset(data)
    from .hodge import loss, remove_gradient

    solver = solver_from_raw(raw)
    flows0 = remove_gradient(graph, flows, solver)
    return loss(truth, flows0, solver)
