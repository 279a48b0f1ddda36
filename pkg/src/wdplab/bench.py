"""Benchmark orchestration and the end-to-end training pipeline.

`run_benchmark` runs a method grid over an instance set, verifies every
returned allocation, computes gaps against a reference revenue (the
proven optimum when available, otherwise the best result in the run) and
emits deterministic CSV rows.  `pipeline_train` goes from instance
generation through labeling, sample generation, and training to a saved
model.

The WDPLAB_SEED environment variable overrides configured seeds so CI
runs can pin reproducibility from the outside.
"""

from __future__ import annotations

import dataclasses
import glob
import os
import time
import warnings
from dataclasses import dataclass, field

from . import gnn, heuristics, postprocess, samples as samples_mod
from .exact import branch_and_bound, brute_force
from .graph import build_graph
from .instgen import (
    GenerationExhaustedError,
    SynthConfig,
    VmConfig,
    gen_synthetic,
    gen_vm,
)
from .model import (
    Allocation,
    AuctionInstance,
    evaluate_allocation,
    load_instance,
    metrics,
)
from .rng import make_rng

METHODS = (
    "exact", "brute", "gnn-basic", "gnn-traversal",
    "rlp", "ss", "casanova", "greedy",
)
CSV_HEADER = (
    "instance,M,N,u_max,method,revenue,reference,gap,time_ms,"
    "utilization,satisfaction,iterations,proven_optimal"
)
SEED_ENV_VAR = "WDPLAB_SEED"


def effective_seed(seed: int) -> int:
    env = os.environ.get(SEED_ENV_VAR)
    return int(env) if env else seed


@dataclass(frozen=True)
class ReportRow:
    instance: str
    num_bids: int
    num_items: int
    u_max: int
    method: str
    revenue: float
    reference: float
    gap: float
    time_ms: float
    utilization: float
    satisfaction: float
    iterations: int
    proven_optimal: bool

    def to_csv(self) -> str:
        return ",".join([
            self.instance, str(self.num_bids), str(self.num_items),
            str(self.u_max), self.method, repr(float(self.revenue)),
            repr(float(self.reference)), repr(float(self.gap)),
            repr(float(self.time_ms)), repr(float(self.utilization)),
            repr(float(self.satisfaction)), str(int(self.iterations)),
            "true" if self.proven_optimal else "false",
        ])


@dataclass
class BenchConfig:
    instances: list[AuctionInstance] | str
    methods: tuple[str, ...]
    model: gnn.GnnModel | str | None = None
    reference: str = "exact"  # exact | best-known
    seed: int = 0
    out: str | None = None
    time_limit: float = 60.0
    zero_time: bool = False  # record time_ms as 0 for byte-stable CSVs

    def validate(self) -> None:
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}")
        if self.reference not in ("exact", "best-known"):
            raise ValueError("reference must be 'exact' or 'best-known'")
        if any(m.startswith("gnn") for m in self.methods) and self.model is None:
            raise ValueError("gnn methods require a model")


def _load_instances(source) -> list[AuctionInstance]:
    if isinstance(source, str):
        paths = sorted(glob.glob(os.path.join(source, "*.json")))
        if not paths:
            raise ValueError(f"no instance files in {source}")
        return [load_instance(p) for p in paths]
    return list(source)


@dataclass
class _Solved:
    allocation: Allocation
    revenue: float
    elapsed: float
    iterations: int
    proven_optimal: bool = False


def _run_method(method: str, instance: AuctionInstance, cfg: BenchConfig,
                model, inst_idx: int) -> _Solved:
    rng = make_rng(effective_seed(cfg.seed), inst_idx, METHODS.index(method))
    if method in ("gnn-basic", "gnn-traversal"):
        graph = build_graph(instance)  # initial encoding stays untimed
        solver = (postprocess.basic_solve if method == "gnn-basic"
                  else postprocess.traversal_solve)
        start = time.perf_counter()
        trace = solver(model, instance, initial_graph=graph)
        elapsed = time.perf_counter() - start
        rev = evaluate_allocation(instance, trace.allocation).revenue
        return _Solved(trace.allocation, rev, elapsed, trace.gnn_calls)
    if method in ("exact", "brute"):
        start = time.perf_counter()
        res = (branch_and_bound(instance, time_limit=cfg.time_limit)
               if method == "exact" else brute_force(instance))
        elapsed = time.perf_counter() - start
        return _Solved(res.allocation, res.revenue, elapsed,
                       res.nodes_explored, res.proven_optimal)
    start = time.perf_counter()
    if method == "rlp":
        alloc = heuristics.rlp(instance, rng)
    elif method == "ss":
        alloc = heuristics.ss(instance)
    elif method == "casanova":
        alloc = heuristics.casanova(instance, heuristics.CasanovaParams(), rng)
    else:
        alloc = heuristics.greedy_density(instance)
    elapsed = time.perf_counter() - start
    rev = evaluate_allocation(instance, alloc).revenue
    return _Solved(alloc, rev, elapsed, 0)


def run_benchmark(cfg: BenchConfig) -> list[ReportRow]:
    """Solve every (instance, method) cell and emit one report row each.

    Any infeasible solver output aborts the run: feasibility is a hard
    guarantee of every solver here.
    """
    cfg.validate()
    instances = _load_instances(cfg.instances)
    model = cfg.model
    if isinstance(model, str):
        model = gnn.load_model_file(model)

    rows: list[ReportRow] = []
    for inst_idx, instance in enumerate(instances):
        name = instance.name or f"instance-{inst_idx}"
        solved: dict[str, _Solved] = {}
        for method in cfg.methods:
            result = _run_method(method, instance, cfg, model, inst_idx)
            ev = evaluate_allocation(instance, result.allocation)
            if not ev.feasible:
                raise RuntimeError(
                    f"method {method} returned an infeasible allocation "
                    f"on instance {name}"
                )
            solved[method] = result

        best_known = max(s.revenue for s in solved.values())
        exact_like = [s for m, s in solved.items()
                      if m in ("exact", "brute") and s.proven_optimal]
        if cfg.reference == "exact" and exact_like:
            reference = max(s.revenue for s in exact_like)
            ref_proven = True
        else:
            reference = best_known
            ref_proven = bool(exact_like) and any(
                abs(s.revenue - reference) <= 1e-9 for s in exact_like
            )

        u_max = max(it.units for it in instance.items)
        for method in cfg.methods:
            s = solved[method]
            row_metrics = metrics(instance, s.allocation, reference,
                                  iterations=s.iterations, elapsed=s.elapsed)
            rows.append(ReportRow(
                instance=name,
                num_bids=instance.num_bids,
                num_items=instance.num_items,
                u_max=u_max,
                method=method,
                revenue=s.revenue,
                reference=reference,
                gap=row_metrics.gap,
                time_ms=0.0 if cfg.zero_time else s.elapsed * 1000.0,
                utilization=row_metrics.utilization,
                satisfaction=row_metrics.satisfaction,
                iterations=s.iterations,
                proven_optimal=ref_proven,
            ))

    rows.sort(key=lambda r: (r.instance, r.method))
    if cfg.out:
        write_report(rows, cfg.out)
    return rows


def write_report(rows: list[ReportRow], path: str) -> None:
    with open(path, "w") as fh:
        fh.write(CSV_HEADER + "\n")
        for row in rows:
            fh.write(row.to_csv() + "\n")


def read_report(path: str) -> list[dict]:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        out = []
        for line in fh:
            parts = line.strip().split(",")
            if len(parts) == len(header):
                out.append(dict(zip(header, parts)))
    return out


# --- end-to-end training pipeline ---------------------------------------------


@dataclass
class PipelineConfig:
    """Generation, labeling, sampling, and training in one config."""

    generator: SynthConfig | VmConfig
    num_label_instances: int = 100
    num_validation_instances: int = 20
    time_limit: float = 10.0
    sample_mode: str = "optimum-only"  # optimum-only | mix
    keep_prob: float = 0.8
    gap_threshold: float = 0.01
    expansion_copies: int = 7
    q: int = 16
    train: gnn.TrainConfig = field(default_factory=gnn.TrainConfig)
    seed: int = 0
    min_train_samples: int | None = None
    model_out: str | None = None

    def validate(self) -> None:
        if self.sample_mode not in ("optimum-only", "mix"):
            raise ValueError("sample_mode must be 'optimum-only' or 'mix'")
        if not 0 <= self.keep_prob <= 1:
            raise ValueError("keep_prob must be in [0, 1]")


def _instance_with_seed(template, seed: int) -> AuctionInstance:
    cfg = dataclasses.replace(template, seed=seed, name="")
    if isinstance(cfg, VmConfig):
        return gen_vm(cfg)
    return gen_synthetic(cfg)


def _collect_labeled(cfg: PipelineConfig, count: int, seed_offset: int,
                     sample_rng, min_samples: int | None):
    """Generate, label, and sample instances until targets are met."""
    labeled_used = 0
    dropped = 0
    gen_failures = 0
    collected: list[samples_mod.TrainingSample] = []
    per_instance: list[dict] = []
    attempts = 0
    max_attempts = max(6 * count, 50)
    base = effective_seed(cfg.seed)
    while labeled_used < count or (min_samples is not None
                                   and len(collected) < min_samples):
        if attempts >= max_attempts:
            raise RuntimeError(
                f"labeling stalled after {attempts} attempts "
                f"({labeled_used} labeled, {dropped} dropped)"
            )
        inst_seed = base * 1_000_000 + seed_offset + attempts
        attempts += 1
        try:
            instance = _instance_with_seed(cfg.generator, inst_seed)
        except GenerationExhaustedError:
            gen_failures += 1
            continue
        res = branch_and_bound(instance, time_limit=cfg.time_limit)
        if not res.proven_optimal:
            warnings.warn(
                f"dropping {instance.name}: not proven optimal within "
                f"{cfg.time_limit}s"
            )
            dropped += 1
            if dropped > max(labeled_used, count) // 2 and dropped > 2:
                raise RuntimeError(
                    f"more than half of label instances dropped "
                    f"({dropped} dropped, {labeled_used} labeled)"
                )
            continue
        li = samples_mod.LabeledInstance(
            instance=instance, allocation=res.allocation, optimal_flag=True
        )
        group = [li]
        if cfg.sample_mode == "mix":
            group = samples_mod.expand_instance_set(
                group, cfg.gap_threshold, cfg.expansion_copies, sample_rng
            )
        new = samples_mod.single_label_sample_generation(
            group, cfg.keep_prob, sample_rng
        )
        collected.extend(new)
        per_instance.append({
            "name": instance.name,
            "allocated": li.allocation.num_accepted(),
            "expanded_to": len(group),
            "samples": len(new),
        })
        labeled_used += 1
    return collected, per_instance, dropped, gen_failures


def pipeline_train(cfg: PipelineConfig) -> tuple[gnn.GnnModel, dict]:
    """Generate instances, label them exactly, build samples, and train."""
    cfg.validate()
    base = effective_seed(cfg.seed)
    train_rng = make_rng(base, 1)
    val_rng = make_rng(base, 2)

    train_samples, per_instance, dropped, gen_fail = _collect_labeled(
        cfg, cfg.num_label_instances, seed_offset=0,
        sample_rng=train_rng, min_samples=cfg.min_train_samples,
    )
    val_samples, val_info, val_dropped, val_gen_fail = _collect_labeled(
        cfg, cfg.num_validation_instances, seed_offset=500_000,
        sample_rng=val_rng, min_samples=None,
    )

    model = gnn.init_model(cfg.q, seed=base)
    result = gnn.train(model, train_samples, cfg.train,
                       validation=val_samples)
    if cfg.model_out:
        gnn.save_model_file(result.model, cfg.model_out)

    summary = {
        "train_instances": len(per_instance),
        "train_samples": len(train_samples),
        "val_instances": len(val_info),
        "val_samples": len(val_samples),
        "dropped": dropped + val_dropped,
        "generation_failures": gen_fail + val_gen_fail,
        "per_instance": per_instance,
        "epochs_run": len(result.train_loss),
        "best_epoch": result.best_epoch,
        "train_loss": result.train_loss,
        "val_loss": result.val_loss,
        "expansion_multiplier": (
            sum(p["expanded_to"] for p in per_instance) / len(per_instance)
            if per_instance else 0.0
        ),
    }
    return result.model, summary
