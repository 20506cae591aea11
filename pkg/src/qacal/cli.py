"""Command-line entry point.

Commands exchange data through files in the output directory only::

    generate   -> problem.json
    embed      -> embedding.json
    sample-dq  -> dataset.csv (+ dataset.json sidecar)
    argmax     -> argmax.json
    predict    -> report.json, fig2bcd.csv
    walk       -> fig3.csv
    curve      -> fig2a.csv (+ learning_curve.csv)
    hist       -> fig1bcd.csv, hist_summary.json

Exit codes: 0 success, 2 bad configuration, 3 missing input, 4 backend failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._io import atomic_write_text, config_hash, dump_json
from .analysis import (bootstrap_performance_curve, embedding_variation_histograms,
                       learning_curve, random_walk_probe, write_curve_csv,
                       write_eta_sweep_csv, write_histograms_csv, write_walks_csv)
from .annealer import AnnealSchedule, NoiseModel, SimulatedAnnealer
from .chimera import Embedding, EmbeddingError, build_chimera, embed_clique, translate_embedding
from .config import ConfigError, load_config
from .de import DEConfig
from .qubo import QuboProblem, dq_ranges, generate_clique_problem, with_ground_energy
from .remote import RemoteSampler, SamplerError
from .sampling import DatasetFormatError, derive_seed, evaluate_batch, lhs, load_dataset, save_dataset
from .strategies import argmax_strategy, evaluate_repeated, predictive_strategy, strategy_report

COMMANDS = ("generate", "embed", "sample-dq", "argmax", "predict", "walk", "curve", "hist")

EXIT_CONFIG, EXIT_MISSING, EXIT_BACKEND = 2, 3, 4

# stream tags for seeds derived from the root seed
_SAMPLE, _REPEAT, _PREDICT, _WALK, _CURVE, _HIST = range(1, 7)


class BackendFailure(RuntimeError):
    pass


class Context:
    def __init__(self, config: dict, command: str):
        self.config = config
        self.command = command
        self.out = Path(config["output"])
        self.seed = config["seed"]

    def provenance(self) -> dict:
        cfg = self.config
        noise = cfg["backend"]["noise"]
        return {
            "command": self.command,
            # where the files land is not part of the experiment
            "config_sha256": config_hash({k: v for k, v in cfg.items() if k != "output"}),
            "seed": self.seed,
            "problem_seed": cfg["problem"]["seed"],
            "noise_seed": None if noise is None else noise["seed"],
            "version": __version__,
        }

    def path(self, name: str) -> Path:
        return self.out / name

    def write_json(self, name: str, doc: dict) -> Path:
        doc = dict(doc, provenance=self.provenance())
        atomic_write_text(self.path(name), dump_json(doc))
        return self.path(name)

    def require(self, name: str) -> Path:
        p = self.path(name)
        if not p.exists():
            raise FileNotFoundError(f"{p} not found (run the upstream command first)")
        return p

    def problem(self) -> QuboProblem:
        q = QuboProblem.loads(self.require("problem.json").read_text(encoding="utf-8"))
        if q.ground_energy is None:
            raise ConfigError("problem", "problem.json lacks a ground energy")
        return q

    def embedding(self) -> Embedding:
        return Embedding.loads(self.require("embedding.json").read_text(encoding="utf-8"))

    def graph(self):
        chim = self.config["embedding"]["chimera"]
        return build_chimera(chim["rows"], chim["cols"])

    def backend(self):
        b = self.config["backend"]
        if b["kind"] == "remote":
            return RemoteSampler(b["endpoint"], b["timeout"])
        g = self.graph()
        noise = None
        if b["noise"] is not None:
            n = b["noise"]
            if n["level"] == "logical":
                noise = NoiseModel.logical(self.config["problem"]["dim"], n["scale"], n["sigma"],
                                           n["seed"])
            else:
                noise = NoiseModel.physical(g, n["scale"], n["sigma"], n["seed"])
        s = b["schedule"]
        schedule = AnnealSchedule(s["sweeps"], s["beta_start"], s["beta_end"], s["kind"])
        return SimulatedAnnealer(g, noise, schedule, self.config["embedding"]["chain_strength"])

    def de_config(self) -> DEConfig:
        d = self.config["strategy"]["de"]
        return DEConfig(d["popsize"], d["mutation"], d["crossover"], d["max_generations"],
                        d["tol"])


# -- commands ---------------------------------------------------------------------------

def cmd_generate(ctx: Context) -> str:
    p = ctx.config["problem"]
    q = with_ground_energy(generate_clique_problem(p["dim"], p["generator"], p["seed"]))
    path = ctx.write_json("problem.json", q.to_json_dict())
    return f"generate: dim={q.dim} ground_energy={q.ground_energy:.6f} -> {path}"


def cmd_embed(ctx: Context) -> str:
    g = ctx.graph()
    dim = ctx.config["problem"]["dim"]
    e = translate_embedding(embed_clique(dim, g), g, ctx.config["embedding"]["offset"])
    path = ctx.write_json("embedding.json", e.to_json_dict())
    return f"embed: {dim} chains of length {e.chain_lengths[0]} on {g.rows}x{g.cols} -> {path}"


def cmd_sample_dq(ctx: Context) -> str:
    q, e = ctx.problem(), ctx.embedding()
    s = ctx.config["sampling"]
    seed = derive_seed(ctx.seed, _SAMPLE)
    matrices = lhs(dq_ranges(q, s["eta"]), s["m"], seed)
    failures = []
    ds = evaluate_batch(q, matrices, ctx.backend(), e, s["reads"], seed, eta=s["eta"],
                        keying=s["keying"], on_error=lambda i, exc: failures.append(str(exc)))
    ds.metadata["campaign_seed"] = ctx.seed
    save_dataset(ctx.path("dataset.csv"), ds, ctx.provenance())
    if failures:
        raise BackendFailure(f"{len(failures)} of {len(ds)} rows failed; first: {failures[0]}")
    return (f"sample-dq: {len(ds)} rows, mean success rate {np.mean(ds.success_rate):.4f}"
            f" -> {ctx.path('dataset.csv')}")


def _baseline_and_argmax(ctx, q, e, backend, ds):
    st = ctx.config["strategy"]
    seed = derive_seed(ctx.seed, _REPEAT)
    baseline = evaluate_repeated(q, None, backend, e, st["repeats"], st["reads"], seed)
    am = argmax_strategy(ds, st["metric"])
    verified = evaluate_repeated(q, am.matrix, backend, e, st["repeats"], st["reads"], seed)
    return seed, baseline, am, verified


def cmd_argmax(ctx: Context) -> str:
    q, e = ctx.problem(), ctx.embedding()
    ds = load_dataset(ctx.require("dataset.csv"))
    _, baseline, am, verified = _baseline_and_argmax(ctx, q, e, ctx.backend(), ds)
    path = ctx.write_json("argmax.json", strategy_report(baseline, am, verified))
    return (f"argmax: baseline sr={baseline.mean_sr:.4f}, calibrated sr={verified.mean_sr:.4f}"
            f" (row {am.row}) -> {path}")


def cmd_predict(ctx: Context) -> str:
    q, e = ctx.problem(), ctx.embedding()
    ds = load_dataset(ctx.require("dataset.csv"))
    backend = ctx.backend()
    st = ctx.config["strategy"]
    seed, baseline, am, verified = _baseline_and_argmax(ctx, q, e, backend, ds)
    pr = predictive_strategy(ds, q, backend, e, st["eta_list"], st["repeats"], st["reads"],
                             seed, ctx.de_config(), st["k"], st["metric"], baseline=baseline)
    path = ctx.write_json("report.json", strategy_report(baseline, am, verified, pr))
    write_eta_sweep_csv(ctx.path("fig2bcd.csv"), pr, ctx.provenance())
    return (f"predict: baseline sr={baseline.mean_sr:.4f}, argmax sr={verified.mean_sr:.4f},"
            f" predictive sr={pr.best.measured.mean_sr:.4f} (eta={pr.best.eta}) -> {path}")


def cmd_walk(ctx: Context) -> str:
    q, e = ctx.problem(), ctx.embedding()
    a = ctx.config["analysis"]
    walks = random_walk_probe(q, ctx.backend(), e, a["walks"], a["walk_delta"], a["walk_steps"],
                              a["walk_repeats"], a["walk_reads"], derive_seed(ctx.seed, _WALK))
    write_walks_csv(ctx.path("fig3.csv"), walks, ctx.provenance())
    improving = sum(bool(np.max(w.mean_sr) > w.mean_sr[0]) for w in walks)
    return f"walk: {len(walks)} walks, {improving} improve on Q0 -> {ctx.path('fig3.csv')}"


def cmd_curve(ctx: Context) -> str:
    ds = load_dataset(ctx.require("dataset.csv"))
    a = ctx.config["analysis"]
    metric = ctx.config["strategy"]["metric"]
    usable = len(ds.valid())
    sizes = [s for s in a["curve_sizes"] if s <= usable] or [usable]
    seed = derive_seed(ctx.seed, _CURVE)
    points = bootstrap_performance_curve(ds, sizes, a["bootstrap_reps"], seed, metric)
    write_curve_csv(ctx.path("fig2a.csv"), points, ctx.provenance(), label=metric)
    msg = f"curve: {len(points)} sizes -> {ctx.path('fig2a.csv')}"
    if a["learning_sizes"]:
        lc = learning_curve(ds, a["learning_sizes"], a["learning_reps"], seed,
                            ctx.config["strategy"]["k"])
        write_curve_csv(ctx.path("learning_curve.csv"), lc, ctx.provenance(), label="r2")
        msg += f", learning curve -> {ctx.path('learning_curve.csv')}"
    return msg


def cmd_hist(ctx: Context) -> str:
    q = ctx.problem()
    g = ctx.graph()
    a = ctx.config["analysis"]
    base = embed_clique(q.dim, g)
    embeddings = [translate_embedding(base, g, off) for off in a["hist_offsets"]]
    hists = embedding_variation_histograms(q, embeddings, ctx.backend(), a["hist_samplings"],
                                           a["hist_experiments"], a["hist_reads"],
                                           derive_seed(ctx.seed, _HIST))
    write_histograms_csv(ctx.path("fig1bcd.csv"), hists, ctx.provenance())
    summary = {"embeddings": [
        {"offset": off, "mean": h.mean, "standard_error": h.standard_error,
         "sampling_means": [float(v) for v in h.means],
         "sampling_stds": [float(v) for v in h.stds]}
        for off, h in zip(a["hist_offsets"], hists)]}
    ctx.write_json("hist_summary.json", summary)
    means = ", ".join(f"{h.mean:.4f}" for h in hists)
    return f"hist: {len(hists)} embeddings, mean success rates [{means}] -> {ctx.path('fig1bcd.csv')}"


HANDLERS = {
    "generate": cmd_generate, "embed": cmd_embed, "sample-dq": cmd_sample_dq,
    "argmax": cmd_argmax, "predict": cmd_predict, "walk": cmd_walk, "curve": cmd_curve,
    "hist": cmd_hist,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qacal", description="Annealer input-Hamiltonian calibration")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("config", nargs="?", help="JSON campaign config")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="PATH=VALUE", help="override a config field (dotted path)")
    parser.add_argument("--seed", type=int, help="root seed (overrides config 'seed')")
    parser.add_argument("--out", help="output directory (overrides config 'output')")
    parser.add_argument("--threads", type=int, help="threads for the annealing kernel")
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = list(args.overrides)
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    if args.out is not None:
        overrides.append(f"output={json.dumps(args.out)}")
    try:
        config = load_config(args.config, overrides)
        if args.threads:
            import numba
            numba.set_num_threads(max(1, min(args.threads, numba.config.NUMBA_NUM_THREADS)))
        print(HANDLERS[args.command](Context(config, args.command)))
        return 0
    except (ConfigError, EmbeddingError, DatasetFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except (SamplerError, BackendFailure) as exc:
        print(f"error: backend failure: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
