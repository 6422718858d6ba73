"""Command-line entry point.

Exit codes: 0 success, 2 input error, 3 internal error.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

from . import io
from .entropy import one_dim_entropy, tree_entropy
from .errors import DomainError, InvalidInputError, StrucabsError
from .optimize import DEFAULT_K, OptimizeConfig, optimize
from .sparsify import sparsify
from .graph import similarity_graph

EXIT_OK, EXIT_INPUT, EXIT_INTERNAL = 0, 2, 3


class InputProblem(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    inputs: tuple[Path, ...]
    out: Path | None
    k_cap: int
    seed: int | None

    def meta(self, **extra) -> dict:
        return io.header(self.seed, command=self.subcommand, k_cap=self.k_cap, **extra)


def _run_config(args) -> RunConfig:
    inputs = tuple(Path(p) for p in (getattr(args, "input", None), getattr(args, "trajectories", None)) if p)
    for p in inputs:
        if not p.is_file():
            raise InputProblem(f"{p}: no such file")
    out = Path(args.out) if getattr(args, "out", None) else None
    if out is not None:
        if out.exists() and not out.is_dir():
            raise InputProblem(f"{out}: exists and is not a directory")
        out.mkdir(parents=True, exist_ok=True)
    k_cap = getattr(args, "k_cap", DEFAULT_K)
    if k_cap < 2:
        raise InputProblem("--k-cap must be at least 2")
    return RunConfig(args.command, inputs, out, k_cap, getattr(args, "seed", None))


def _write_curve(path, curve, meta):
    lines = [io.comment_line(meta), "k,entropy\n"]
    lines += [f"{k},{io.fmt(h)}\n" for k, h in curve]
    Path(path).write_text("".join(lines), encoding="utf-8")


def _operator_rows(trace) -> list[str]:
    rows = ["step,kind,beta1,beta2,delta"]
    rows += [f"{i},{d.kind},{d.beta1},{d.beta2},{io.fmt(d.delta)}" for i, d in enumerate(trace, 1)]
    return rows


# -- subcommands ------------------------------------------------------------


def cmd_entropy(args, rc: RunConfig) -> int:
    g = io.read_edge_list(rc.inputs[0])
    print(io.fmt(one_dim_entropy(g)))
    return EXIT_OK


def cmd_sparsify(args, rc: RunConfig) -> int:
    e = io.read_embeddings(rc.inputs[0])
    result = sparsify(similarity_graph(e))
    meta = rc.meta(k_star=result.k_star)
    io.write_edge_list(rc.out / "sparse.tsv", result.graph, meta)
    _write_curve(rc.out / "curve.csv", result.entropy_curve, meta)
    if not args.no_plot:
        from .plotting import plot_entropy_curve

        plot_entropy_curve(result.entropy_curve, result.k_star, rc.out / "curve.png")
    print(f"k*={result.k_star}")
    return EXIT_OK


def cmd_optimize(args, rc: RunConfig) -> int:
    g = io.read_edge_list(rc.inputs[0])
    one_dim_entropy(g)  # rejects isolated vertices up front
    trace: list = []
    tree = optimize(g, OptimizeConfig(rc.k_cap), trace=trace)
    initial, final = one_dim_entropy(g), tree_entropy(g, tree)
    meta = rc.meta()
    rows = _operator_rows(trace)
    summary = [
        io.comment_line(meta).rstrip("\n"),
        f"initial_entropy,{io.fmt(initial)}",
        f"final_entropy,{io.fmt(final)}",
        f"tree_height,{tree.height}",
    ]
    print("\n".join(summary + rows))
    if rc.out is not None:
        io.write_tree(rc.out / "tree.json", tree, g.vertex_labels, meta)
        (rc.out / "operators.csv").write_text(
            io.comment_line(meta) + "\n".join(rows) + "\n", encoding="utf-8"
        )
        io.dump_json(
            rc.out / "summary.json",
            {"meta": meta, "initial_entropy": io.fmt(initial), "final_entropy": io.fmt(final),
             "tree_height": tree.height, "operators": len(trace)},
        )
    return EXIT_OK


def _write_report_files(rc: RunConfig, report, meta, plot: bool) -> None:
    payload = report.to_dict()
    payload["meta"] = meta
    io.dump_json(rc.out / "report.json", payload)
    io.write_tree(rc.out / "tree.json", report.tree, report.labels, meta)
    io.write_edge_list(rc.out / "sparse.tsv", report.sparse_graph, meta)
    _write_curve(rc.out / "curve.csv", report.sparse.entropy_curve, meta)
    if plot:
        from .plotting import plot_entropy_curve

        plot_entropy_curve(report.sparse.entropy_curve, report.sparse.k_star, rc.out / "curve.png")


def cmd_abstract(args, rc: RunConfig) -> int:
    from .pipeline import abstract_states

    e = io.read_embeddings(rc.inputs[0])
    log = io.read_trajectories(rc.inputs[1]) if len(rc.inputs) > 1 else None
    report = abstract_states(e, log, OptimizeConfig(rc.k_cap))
    _write_report_files(rc, report, rc.meta(), not args.no_plot)
    print(f"k*={report.sparse.k_star}")
    print(f"clusters={len(set(report.assignment.values()))}")
    print(f"final_entropy={io.fmt(report.final_entropy)}")
    print(f"clustering_loss={io.fmt(report.clusters.loss)}")
    if report.si is not None:
        print(f"si_loss={io.fmt(report.si.total)}")
    return EXIT_OK


def cmd_demo(args, rc: RunConfig) -> int:
    from . import gridworld as gw

    spec = gw.GridworldSpec(
        width=args.width, height=args.height, sigma=args.sigma, obs_dim=args.obs_dim
    )
    obs = gw.generate_observations(spec, args.samples, rc.seed)
    log = gw.explore(spec, obs, args.steps, rc.seed + 1)
    result = gw.run_pipeline(obs, OptimizeConfig(rc.k_cap), log if args.steps else None)
    cells = result.cell_abstraction(obs, spec.n_cells)
    sisa = gw.train_q(spec, cells, args.episodes, rc.seed + 2)
    ident = gw.train_q(spec, gw.identity_abstraction(spec), args.episodes, rc.seed + 2)
    oracle = gw.optimal_mean_return(spec)
    meta = rc.meta(
        width=spec.width, height=spec.height, sigma=spec.sigma, samples=args.samples,
        episodes=args.episodes, steps=args.steps, obs_dim=spec.obs_dim,
    )

    io.write_embeddings(rc.out / "observations.csv", obs.embeddings)
    io.write_trajectories(rc.out / "trajectories.jsonl", log)
    lines = [io.comment_line(meta), "episode,abstract,identity\n"]
    lines += [
        f"{i},{io.fmt(a)},{io.fmt(b)}\n"
        for i, (a, b) in enumerate(zip(sisa.episode_rewards, ident.episode_rewards), 1)
    ]
    (rc.out / "rewards.csv").write_text("".join(lines), encoding="utf-8")
    evaluation = {
        "ari": io.fmt(result.ari),
        "oracle_mean_reward": io.fmt(oracle),
        "abstract_mean_reward": io.fmt(sisa.eval_mean),
        "abstract_success_rate": io.fmt(sisa.success_rate),
        "identity_mean_reward": io.fmt(ident.eval_mean),
        "abstract_states": int(len(set(result.clusters.tolist()))),
    }
    if result.report is not None:
        result.report.extra["evaluation"] = evaluation
        _write_report_files(rc, result.report, meta, not args.no_plot)
    else:
        io.dump_json(rc.out / "report.json", {"meta": meta, "evaluation": evaluation})
    if not args.no_plot:
        from .plotting import plot_partition, plot_reward_curves

        plot_reward_curves(
            {"abstract states": sisa.episode_rewards, "true cells": ident.episode_rewards},
            rc.out / "rewards.png",
            oracle=oracle,
        )
        plot_partition(spec, cells, rc.out / "partition.png")
    for key in ("ari", "abstract_mean_reward", "identity_mean_reward", "oracle_mean_reward"):
        print(f"{key}={evaluation[key]}")
    if sisa.failed:
        print("warning: greedy policy over abstract states never reached the goal", file=sys.stderr)
    return EXIT_OK


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="strucabs",
        description="Structural-entropy encoding trees and hierarchical state abstraction.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("entropy", help="one-dimensional structural entropy of an edge list")
    p.add_argument("input", help="edge-list TSV: <u>\\t<v>\\t<weight>")
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("sparsify", help="entropy-minimizing k-NN sparsification of embeddings")
    p.add_argument("input", help="embedding CSV with header label,x0,...")
    p.add_argument("--out", required=True, help="output directory for sparse.tsv and curve.csv")
    p.add_argument("--no-plot", action="store_true", help="skip curve.png")
    p.set_defaults(func=cmd_sparsify)

    p = sub.add_parser("optimize-tree", help="greedy encoding-tree optimization of an edge list")
    p.add_argument("input", help="edge-list TSV")
    p.add_argument("--k-cap", type=int, default=DEFAULT_K, help="maximal tree height (default 3)")
    p.add_argument("--out", help="directory for tree.json, operators.csv and summary.json")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("abstract", help="full abstraction report from embeddings and trajectories")
    p.add_argument("input", help="embedding CSV")
    p.add_argument("--trajectories", help="JSON Lines trajectory log {s, a, r, s2}")
    p.add_argument("--k-cap", type=int, default=DEFAULT_K, help="maximal tree height (default 3)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--no-plot", action="store_true", help="skip figures")
    p.set_defaults(func=cmd_abstract)

    p = sub.add_parser("demo-gridworld", help="noisy gridworld abstraction plus tabular Q-learning")
    p.add_argument("--width", type=int, default=6, help="grid width (default 6)")
    p.add_argument("--height", type=int, default=6, help="grid height (default 6)")
    p.add_argument("--sigma", type=float, default=0.0, help="observation noise scale (default 0)")
    p.add_argument("--samples", type=int, default=5, help="observations per cell (default 5)")
    p.add_argument("--obs-dim", type=int, default=32, help="observation dimension (default 32)")
    p.add_argument("--steps", type=int, default=2000, help="random-exploration steps logged (default 2000)")
    p.add_argument("--k-cap", type=int, default=DEFAULT_K, help="maximal tree height (default 3)")
    p.add_argument("--episodes", type=int, default=2000, help="Q-learning training episodes (default 2000)")
    p.add_argument("--seed", type=int, required=True, help="random seed (required)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--no-plot", action="store_true", help="skip figures")
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        rc = _run_config(args)
        return args.func(args, rc)
    except (InputProblem, InvalidInputError, DomainError, FileNotFoundError, UnicodeDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except StrucabsError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
