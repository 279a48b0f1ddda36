"""Command-line interface.

Subcommands mirror the workflow: `gen` instances, `label` them with the
exact solver, build `samples`, `train` a model, `solve` single instances,
run a `bench` grid, and summarize a CSV with `report`.
"""

from __future__ import annotations

import argparse
import glob
import os
import sys

from . import bench, gnn, heuristics, postprocess, samples as samples_mod
from .bench import BenchConfig, effective_seed, run_benchmark
from .exact import branch_and_bound
from .instgen import SynthConfig, VmConfig, gen_synthetic, gen_vm
from .model import load_instance, save_allocation, save_instance
from .rng import make_rng


def _add_gen(sub):
    p = sub.add_parser("gen", help="generate instances")
    kinds = p.add_subparsers(dest="kind", required=True)

    synth = kinds.add_parser("synth", help="decay-distribution instance")
    synth.add_argument("--bids", type=int, required=True)
    synth.add_argument("--items", type=int, required=True)
    synth.add_argument("--umax", type=int, required=True)
    synth.add_argument("--item-prob", type=float, default=0.8)
    synth.add_argument("--unit-prob", type=float, default=0.65)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--name", default="")
    synth.add_argument("--out", required=True)

    vm = kinds.add_parser("vm", help="VM-allocation instance")
    vm.add_argument("--users", type=int, required=True)
    vm.add_argument("--vm-types", type=int, default=90)
    vm.add_argument("--units-per-type", type=int, default=500)
    vm.add_argument("--unit-cap", type=int, default=5)
    vm.add_argument("--dist", default="0.1,0.4,0.5",
                    help="user-type fractions, comma separated")
    vm.add_argument("--factors", default="2,1.5,1",
                    help="user-type demand factors, comma separated")
    vm.add_argument("--item-prob", type=float, default=0.8)
    vm.add_argument("--unit-prob", type=float, default=0.65)
    vm.add_argument("--seed", type=int, default=0)
    vm.add_argument("--name", default="")
    vm.add_argument("--out", required=True)


def _cmd_gen(args) -> int:
    seed = effective_seed(args.seed)
    if args.kind == "synth":
        cfg = SynthConfig(
            num_bids=args.bids, num_items=args.items, max_units=args.umax,
            item_prob=args.item_prob, unit_prob=args.unit_prob,
            seed=seed, name=args.name,
        )
        instance = gen_synthetic(cfg)
    else:
        cfg = VmConfig(
            num_users=args.users, num_vm_types=args.vm_types,
            units_per_type=args.units_per_type, unit_cap=args.unit_cap,
            type_fractions=tuple(float(x) for x in args.dist.split(",")),
            type_factors=tuple(float(x) for x in args.factors.split(",")),
            item_prob=args.item_prob, unit_prob=args.unit_prob,
            seed=seed, name=args.name,
        )
        instance = gen_vm(cfg)
    save_instance(instance, args.out)
    print(f"wrote {instance.name} ({instance.num_bids} bids, "
          f"{instance.num_items} items) to {args.out}")
    return 0


def _cmd_label(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    paths = sorted(glob.glob(os.path.join(args.instances, "*.json")))
    if not paths:
        print(f"no instance files in {args.instances}", file=sys.stderr)
        return 1
    written = 0
    for path in paths:
        instance = load_instance(path)
        res = branch_and_bound(instance, time_limit=args.time_limit)
        li = samples_mod.LabeledInstance(
            instance=instance, allocation=res.allocation,
            optimal_flag=res.proven_optimal,
        )
        out_path = os.path.join(args.out, os.path.basename(path))
        samples_mod.save_labeled(li, out_path)
        written += 1
        flag = "optimal" if res.proven_optimal else "incumbent"
        print(f"{instance.name or path}: revenue {res.revenue:.6g} "
              f"({flag}, {res.nodes_explored} nodes)")
    print(f"labeled {written} instances into {args.out}")
    return 0


def _cmd_samples(args) -> int:
    paths = sorted(glob.glob(os.path.join(args.labels, "*.json")))
    if not paths:
        print(f"no labeled files in {args.labels}", file=sys.stderr)
        return 1
    labeled = [samples_mod.load_labeled(p) for p in paths]
    skipped = [li for li in labeled if not li.optimal_flag]
    labeled = [li for li in labeled if li.optimal_flag]
    if skipped:
        print(f"skipping {len(skipped)} non-optimal labels")
    rng = make_rng(effective_seed(args.seed), 1)
    if args.mode == "mix":
        labeled = samples_mod.expand_instance_set(
            labeled, args.gap_threshold, args.copies, rng
        )
    dataset = samples_mod.single_label_sample_generation(labeled, args.pk, rng)
    samples_mod.save_dataset(dataset, args.out)
    print(f"wrote {len(dataset)} samples from {len(labeled)} labeled "
          f"instances to {args.out}")
    return 0


def _cmd_train(args) -> int:
    dataset = samples_mod.load_dataset(args.samples)
    validation = (samples_mod.load_dataset(args.val_samples)
                  if args.val_samples else None)
    cfg = gnn.TrainConfig(
        learning_rate=args.lr, epochs=args.epochs, batch_size=args.batch,
        optimizer=args.optimizer, seed=effective_seed(args.seed),
        patience=args.patience,
    )
    model = gnn.init_model(args.q, seed=effective_seed(args.seed))
    result = gnn.train(model, dataset, cfg, validation=validation)
    gnn.save_model_file(result.model, args.out)
    last = result.train_loss[-1]
    print(f"trained {len(result.train_loss)} epochs "
          f"(final mean loss {last:.4f}); model saved to {args.out}")
    return 0


def _cmd_solve(args) -> int:
    instance = load_instance(getattr(args, "in"))
    if args.solver == "exact":
        res = branch_and_bound(instance, time_limit=args.time_limit)
        save_allocation(args.out, res.allocation, res.revenue,
                        proven_optimal=res.proven_optimal)
        flag = "proven optimal" if res.proven_optimal else "incumbent"
        print(f"revenue {res.revenue:.6g} ({flag}); wrote {args.out}")
    elif args.solver == "heuristic":
        rng = make_rng(effective_seed(args.seed), 3)
        if args.method == "rlp":
            alloc = heuristics.rlp(instance, rng)
        elif args.method == "ss":
            alloc = heuristics.ss(instance)
        elif args.method == "casanova":
            alloc = heuristics.casanova(instance,
                                        heuristics.CasanovaParams(), rng)
        else:
            alloc = heuristics.greedy_density(instance)
        from .model import evaluate_allocation
        rev = evaluate_allocation(instance, alloc).revenue
        save_allocation(args.out, alloc, rev, method=args.method)
        print(f"{args.method}: revenue {rev:.6g}; wrote {args.out}")
    else:
        model = gnn.load_model_file(args.model)
        solver = (postprocess.basic_solve if args.mode == "basic"
                  else postprocess.traversal_solve)
        trace = solver(model, instance)
        from .model import evaluate_allocation
        rev = evaluate_allocation(instance, trace.allocation).revenue
        save_allocation(args.out, trace.allocation, rev,
                        gnn_calls=trace.gnn_calls, mode=args.mode)
        print(f"gnn-{args.mode}: revenue {rev:.6g} "
              f"({trace.gnn_calls} model calls); wrote {args.out}")
    return 0


def _cmd_bench(args) -> int:
    cfg = BenchConfig(
        instances=args.instances,
        methods=tuple(args.methods.split(",")),
        model=args.model,
        reference=args.reference,
        seed=effective_seed(args.seed),
        out=args.out,
        time_limit=args.time_limit,
        zero_time=args.zero_time,
    )
    rows = run_benchmark(cfg)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def _cmd_report(args) -> int:
    rows = bench.read_report(getattr(args, "in"))
    if not rows:
        print("empty report", file=sys.stderr)
        return 1
    by_method: dict[str, list[dict]] = {}
    for row in rows:
        by_method.setdefault(row["method"], []).append(row)
    print(f"{'method':<14}{'instances':>10}{'mean gap':>10}"
          f"{'mean ms':>12}{'mean uti':>10}{'mean sat':>10}")
    for method in sorted(by_method):
        group = by_method[method]
        n = len(group)
        mean = lambda key: sum(float(r[key]) for r in group) / n
        print(f"{method:<14}{n:>10}{mean('gap'):>10.4f}"
              f"{mean('time_ms'):>12.2f}{mean('utilization'):>10.4f}"
              f"{mean('satisfaction'):>10.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wdplab",
        description="multi-unit auction winner determination toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    _add_gen(sub)

    label = sub.add_parser("label", help="solve instances to create labels")
    label.add_argument("--instances", required=True,
                       help="directory of instance JSON files")
    label.add_argument("--out", required=True, help="output directory")
    label.add_argument("--time-limit", type=float, default=60.0)

    smp = sub.add_parser("samples", help="build a training dataset")
    smp.add_argument("--labels", required=True,
                     help="directory of labeled instance files")
    smp.add_argument("--mode", choices=["optimum-only", "mix"],
                     default="optimum-only")
    smp.add_argument("--pk", type=float, default=0.8,
                     help="sample keeping probability")
    smp.add_argument("--copies", type=int, default=7)
    smp.add_argument("--gap-threshold", type=float, default=0.01)
    smp.add_argument("--seed", type=int, default=0)
    smp.add_argument("--out", required=True)

    tr = sub.add_parser("train", help="train a model on a dataset")
    tr.add_argument("--samples", required=True)
    tr.add_argument("--val-samples", default=None)
    tr.add_argument("--q", type=int, default=16)
    tr.add_argument("--epochs", type=int, default=100)
    tr.add_argument("--lr", type=float, default=1e-3)
    tr.add_argument("--batch", type=int, default=32)
    tr.add_argument("--optimizer", choices=["adam", "sgd"], default="adam")
    tr.add_argument("--patience", type=int, default=20)
    tr.add_argument("--seed", type=int, default=0)
    tr.add_argument("--out", required=True)

    solve = sub.add_parser("solve", help="solve one instance")
    solvers = solve.add_subparsers(dest="solver", required=True)
    ex = solvers.add_parser("exact")
    ex.add_argument("--in", required=True)
    ex.add_argument("--time-limit", type=float, default=60.0)
    ex.add_argument("--out", required=True)
    heur = solvers.add_parser("heuristic")
    heur.add_argument("--method", choices=["rlp", "ss", "casanova", "greedy"],
                      required=True)
    heur.add_argument("--in", required=True)
    heur.add_argument("--seed", type=int, default=0)
    heur.add_argument("--out", required=True)
    gn = solvers.add_parser("gnn")
    gn.add_argument("--model", required=True)
    gn.add_argument("--in", required=True)
    gn.add_argument("--mode", choices=["basic", "traversal"], default="basic")
    gn.add_argument("--out", required=True)

    bn = sub.add_parser("bench", help="run a benchmark grid")
    bn.add_argument("--instances", required=True,
                    help="directory of instance JSON files")
    bn.add_argument("--methods", required=True,
                    help="comma-separated subset of: " + ",".join(bench.METHODS))
    bn.add_argument("--model", default=None)
    bn.add_argument("--reference", choices=["exact", "best-known"],
                    default="exact")
    bn.add_argument("--seed", type=int, default=0)
    bn.add_argument("--time-limit", type=float, default=60.0)
    bn.add_argument("--zero-time", action="store_true",
                    help="record time_ms as 0 for byte-stable output")
    bn.add_argument("--out", required=True)

    rep = sub.add_parser("report", help="summarize a benchmark CSV")
    rep.add_argument("--in", required=True)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "gen": _cmd_gen,
        "label": _cmd_label,
        "samples": _cmd_samples,
        "train": _cmd_train,
        "solve": _cmd_solve,
        "bench": _cmd_bench,
        "report": _cmd_report,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
