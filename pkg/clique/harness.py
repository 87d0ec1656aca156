import argparse
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from clique import model
from clique.constants import (
    BETA_PRESETS,
    METHOD_EXACT,
    METHOD_HYBRID,
    METHOD_LOCAL_SEARCH,
    METHOD_LOW_PASS,
    PRESETS,
    REFERENCE_AUTO,
    REFERENCE_EXACT,
    REFERENCE_PROVIDED,
)
from clique.datagen import Instance, dataset_stats, generate_preset
from clique.decoder import CliqueResult, DecoderConfig, decode, default_tau
from clique.decorators import record_failures, timed
from clique.features import compute_features
from clique.model import ModelConfig, ModelParams
from clique.oracles import HeuristicConfig, approximation_score, exact_max_clique, local_search
from clique.training import TrainConfig, train
from clique.ui import ReportFormatter
from clique.utils import parse_key_value_file, parse_method, resolve_threads
from dataset_manager import CheckpointManager, load_dataset, parse_edge_list, save_dataset
from logging_config import eval_logger, logger

REPORT_COLUMNS = [
    "method",
    "instance_id",
    "pred_size",
    "ref_size",
    "score",
    "forward_s",
    "decode_s",
    "p_var",
]
BENCHMARK_COLUMNS = ["method", "mean_score", "std", "mean_s_per_graph", "error"]
TIMING_NOTE = "s/G = forward + decode wall-clock seconds; dataset load and report write excluded"


@dataclass
class Prediction:
    nodes: frozenset
    forward_s: float
    decode_s: float
    p_var: float = float("nan")


Solver = Callable[[Instance], Prediction]


@dataclass
class EvalReport:
    method: str
    rows: pd.DataFrame
    config: Dict = field(default_factory=dict)

    @property
    def mean_score(self) -> float:
        return float(self.rows["score"].mean())

    @property
    def std_score(self) -> float:
        return float(self.rows["score"].std(ddof=0))

    @property
    def mean_seconds(self) -> float:
        return float((self.rows["forward_s"] + self.rows["decode_s"]).mean())

    @property
    def mean_p_var(self) -> float:
        return float(self.rows["p_var"].mean()) if self.rows["p_var"].notna().any() else float("nan")

    def write_csv(self, path: str):
        _write_with_header(self.rows, path, {"method": self.method, "timing": TIMING_NOTE})


def _write_with_header(frame: pd.DataFrame, path: str, meta: Dict[str, str]):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w") as handle:
        for key, value in meta.items():
            handle.write(f"# {key}: {value}\n")
        handle.write(f"# generated_at: {datetime.now().isoformat(timespec='seconds')}\n")
        frame.to_csv(handle, index=False)


# --- References ---
def resolve_reference(instance: Instance, mode: str, force_exact: bool = False) -> int:
    """Manifest mc_size first, then the exact solver; never a heuristic."""
    if mode in (REFERENCE_PROVIDED, REFERENCE_AUTO) and instance.mc_size is not None:
        return int(instance.mc_size)
    if mode == REFERENCE_PROVIDED:
        raise ValueError(f"Instance '{instance.name}' has no provided mc_size")
    if mode not in (REFERENCE_EXACT, REFERENCE_AUTO):
        raise ValueError(f"Unknown reference mode '{mode}'")
    try:
        return len(exact_max_clique(instance.graph, override=force_exact))
    except ValueError as e:
        raise ValueError(f"No reference for instance '{instance.name}': {e}")


# --- Solvers ---
def decoder_for(instance: Instance, dcfg: DecoderConfig) -> DecoderConfig:
    """Fills a missing tau from the instance's known or planted clique size."""
    if dcfg.tau is not None:
        return dcfg
    n = instance.graph.node_count
    expected = instance.mc_size or (len(instance.planted) if instance.planted else None)
    tau = n if expected is None else max(default_tau(n, expected), min(dcfg.kappa, n))
    return replace(dcfg, tau=tau)


def model_solver(params: ModelParams, mcfg: ModelConfig, dcfg: DecoderConfig, threads: int = 1) -> Solver:
    def solve(instance: Instance) -> Prediction:
        start = time.perf_counter()
        features = compute_features(instance.graph)
        p, _ = model.forward(instance.graph, features, params, mcfg)
        forward_s = time.perf_counter() - start
        result = decode(instance.graph, p, decoder_for(instance, dcfg), threads=threads)
        return Prediction(result.nodes, forward_s, result.elapsed, float(np.var(p)))

    return solve


def exact_solver(force_exact: bool = False) -> Solver:
    solve_exact = timed(exact_max_clique)

    def solve(instance: Instance) -> Prediction:
        nodes, seconds = solve_exact(instance.graph, override=force_exact)
        return Prediction(nodes, 0.0, seconds)

    return solve


def local_search_solver(cfg: HeuristicConfig) -> Solver:
    solve_local = timed(local_search)

    def solve(instance: Instance) -> Prediction:
        nodes, seconds = solve_local(instance.graph, cfg)
        return Prediction(nodes, 0.0, seconds)

    return solve


# --- Evaluation ---
def evaluate_solver(
    dataset: Sequence[Instance],
    solver: Solver,
    method: str,
    references: Sequence[int],
    threads: int = 1,
    snapshot: Optional[Dict] = None,
) -> EvalReport:
    if not dataset:
        raise ValueError("Cannot evaluate an empty dataset")

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            predictions = list(pool.map(solver, dataset))
    else:
        predictions = [solver(instance) for instance in dataset]

    rows = []
    for instance, prediction, reference in zip(dataset, predictions, references):
        if not instance.graph.is_clique(prediction.nodes):
            raise AssertionError(f"{method} returned a non-clique on '{instance.name}'")
        score = approximation_score(len(prediction.nodes), reference)
        rows.append(
            {
                "method": method,
                "instance_id": instance.name,
                "pred_size": len(prediction.nodes),
                "ref_size": reference,
                "score": score,
                "forward_s": prediction.forward_s,
                "decode_s": prediction.decode_s,
                "p_var": prediction.p_var,
            }
        )
        eval_logger.info(
            f"PREDICT -> {method} on {instance.name}: {len(prediction.nodes)}/{reference} "
            f"({prediction.forward_s + prediction.decode_s:.4f}s)"
        )
    return EvalReport(method, pd.DataFrame(rows, columns=REPORT_COLUMNS), snapshot or {})


def evaluate(
    dataset: Sequence[Instance],
    params: ModelParams,
    mcfg: ModelConfig,
    dcfg: DecoderConfig,
    reference: str = REFERENCE_AUTO,
    threads: int = 1,
    force_exact: bool = False,
) -> EvalReport:
    if not dataset:
        raise ValueError("Cannot evaluate an empty dataset")
    references = [resolve_reference(inst, reference, force_exact) for inst in dataset]
    method = METHOD_LOW_PASS if mcfg.low_pass_only else METHOD_HYBRID
    snapshot = {"model": mcfg.to_dict(), "kappa": dcfg.kappa, "tau": dcfg.tau, "reference": reference}
    return evaluate_solver(dataset, model_solver(params, mcfg, dcfg), method, references, threads, snapshot)


def benchmark(
    dataset: Sequence[Instance],
    methods: Sequence[Tuple[str, Optional[Solver]]],
    output_path: Optional[str] = None,
    reference: str = REFERENCE_AUTO,
    threads: int = 1,
    force_exact: bool = False,
) -> pd.DataFrame:
    """
    One row per method: mean and population std of the score, mean s/G. A method
    whose solver is None or raises gets an error row and the run continues.
    """
    if not dataset:
        raise ValueError("Cannot benchmark an empty dataset")
    references = [resolve_reference(inst, reference, force_exact) for inst in dataset]

    rows = []
    for label, solver in methods:
        report = None
        if solver is not None:
            run = record_failures(label)(evaluate_solver)
            report = run(dataset, solver, label, references, threads)
        if report is None:
            rows.append({"method": label, "mean_score": np.nan, "std": np.nan,
                         "mean_s_per_graph": np.nan, "error": "failed, see errors.log"})
            continue
        rows.append(
            {
                "method": label,
                "mean_score": report.mean_score,
                "std": report.std_score,
                "mean_s_per_graph": report.mean_seconds,
                "error": "",
            }
        )
        eval_logger.info(f"BENCHMARK -> {label}: {report.mean_score:.4f} ± {report.std_score:.4f}")

    table = pd.DataFrame(rows, columns=BENCHMARK_COLUMNS)
    if output_path:
        _write_with_header(table, output_path, {"graphs": str(len(dataset)), "timing": TIMING_NOTE})
    return table


# --- Command Handlers ---
def _default_kappa(dataset: Sequence[Instance]) -> int:
    presets = {inst.meta.get("preset") for inst in dataset}
    if len(presets) == 1 and next(iter(presets)) in PRESETS:
        return PRESETS[next(iter(presets))].kappa
    return 1


def _decoder_from_args(args, dataset: Sequence[Instance]) -> DecoderConfig:
    kappa = args.kappa if args.kappa is not None else _default_kappa(dataset)
    return DecoderConfig(kappa=kappa, tau=args.tau, strict=args.strict_decoder)


def generate_command(args) -> int:
    instances = generate_preset(args.preset, args.count, args.seed)
    generator = {"preset": args.preset, "count": args.count, "seed": args.seed}
    save_dataset(instances, args.out, generator)
    stats = dataset_stats(instances)
    print(
        f"Wrote {len(instances)} graphs to {args.out} "
        f"(nodes {stats['nodes_mean']:.1f} ± {stats['nodes_std']:.1f}, "
        f"edges {stats['edges_mean']:.1f} ± {stats['edges_std']:.1f})"
    )
    return 0


def features_command(args) -> int:
    features = compute_features(parse_edge_list(args.graph), standardize=args.standardize)
    if args.out:
        features.to_csv(args.out)
        print(f"Wrote {features.node_count} feature rows to {args.out}")
    else:
        print(features.to_frame().to_string())
    return 0


def _train_config_from_args(args) -> Tuple[ModelConfig, TrainConfig]:
    values = parse_key_value_file(args.config) if args.config else {}
    overrides = {
        "epochs": args.epochs,
        "beta": BETA_PRESETS[args.beta_preset] if args.beta_preset else args.beta,
        "seed": args.seed,
        "learning_rate": args.lr,
        "patience": args.patience,
        "clip_norm": args.clip_norm,
        "validation_fraction": args.validation_fraction,
        "hidden_dim": args.hidden,
        "num_layers": args.layers,
    }
    values.update({k: v for k, v in overrides.items() if v is not None})
    if args.low_pass_only:
        values["low_pass_only"] = True
    if args.standardize:
        values["standardize_features"] = True

    model_keys = {"hidden_dim", "num_layers", "low_pass_only", "mlp_depth", "standardize_features", "seed"}
    train_keys = set(TrainConfig.__dataclass_fields__)
    unknown = set(values) - model_keys - train_keys
    if unknown:
        raise ValueError(f"Unknown training options: {sorted(unknown)}")
    mcfg = ModelConfig(**{k: v for k, v in values.items() if k in model_keys})
    tcfg = TrainConfig(**{k: v for k, v in values.items() if k in train_keys})
    return mcfg, tcfg


def train_command(args) -> int:
    dataset = load_dataset(args.data)
    mcfg, tcfg = _train_config_from_args(args)
    params, report = train(dataset, mcfg, tcfg, threads=resolve_threads(args.threads))
    CheckpointManager(args.out).save(mcfg, params, report.to_dict())
    print(ReportFormatter.format_train_report(report, model.count_params(mcfg)))
    return 0


def evaluate_command(args) -> int:
    dataset = load_dataset(args.data)
    mcfg, params, _ = CheckpointManager(args.ckpt).load()
    dcfg = _decoder_from_args(args, dataset)
    report = evaluate(
        dataset, params, mcfg, dcfg, args.reference, resolve_threads(args.threads), args.force_exact
    )
    if args.out:
        report.write_csv(args.out)
    print(ReportFormatter.format_eval_summary(report))
    return 0


def decode_command(args) -> int:
    instance = Instance(parse_edge_list(args.graph), name=os.path.basename(args.graph))
    mcfg, params, _ = CheckpointManager(args.ckpt).load()
    p, _ = model.forward(instance.graph, compute_features(instance.graph), params, mcfg)
    dcfg = DecoderConfig(kappa=args.kappa or 1, tau=args.tau, strict=args.strict_decoder)
    result: CliqueResult = decode(instance.graph, p, dcfg, threads=resolve_threads(args.threads))
    print(ReportFormatter.format_clique(instance.name, result))
    return 0


def oracle_command(args) -> int:
    dataset = load_dataset(args.data)
    for instance in dataset:
        if args.method == METHOD_EXACT:
            nodes = exact_max_clique(instance.graph, override=args.force_exact)
        else:
            nodes = local_search(instance.graph, HeuristicConfig(args.eta1, args.eta2, args.seed))
        print(f"{instance.name}: size {len(nodes)} nodes {' '.join(map(str, sorted(nodes)))}")
    return 0


def _build_solver(name: str, numbers: Tuple[int, ...], args, dcfg: DecoderConfig) -> Tuple[str, Solver]:
    if name in (METHOD_HYBRID, METHOD_LOW_PASS):
        path = args.ckpt if name == METHOD_HYBRID else args.lowpass_ckpt
        if not path:
            raise ValueError(f"Method '{name}' needs a checkpoint (--ckpt / --lowpass-ckpt)")
        mcfg, params, _ = CheckpointManager(path).load()
        return name, model_solver(params, mcfg, dcfg)
    if name == METHOD_LOCAL_SEARCH:
        eta1, eta2 = numbers if len(numbers) == 2 else (5, 100)
        cfg = HeuristicConfig(eta1, eta2, args.seed)
        return cfg.label, local_search_solver(cfg)
    return METHOD_EXACT, exact_solver(args.force_exact)


def _solvers_from_args(args, dataset: Sequence[Instance]) -> List[Tuple[str, Optional[Solver]]]:
    """A method whose solver cannot be built is kept with solver None."""
    dcfg = _decoder_from_args(args, dataset)
    solvers = []
    for spec in args.methods.split(","):
        name, numbers = parse_method(spec)
        built = record_failures(spec.strip())(_build_solver)(name, numbers, args, dcfg)
        solvers.append(built if built is not None else (spec.strip(), None))
    return solvers


def benchmark_command(args) -> int:
    dataset = load_dataset(args.data)
    table = benchmark(
        dataset,
        _solvers_from_args(args, dataset),
        args.out,
        args.reference,
        resolve_threads(args.threads),
        args.force_exact,
    )
    print(ReportFormatter.format_benchmark(table))
    return 0


# --- Argument Parsing ---
def _add_decoder_flags(parser):
    parser.add_argument("--kappa", type=int, default=None, help="number of samplers")
    parser.add_argument("--tau", type=int, default=None, help="ranked prefix length")
    parser.add_argument("--strict-decoder", action="store_true", help="pseudocode loop bounds")


def _add_reference_flags(parser):
    parser.add_argument(
        "--reference",
        choices=[REFERENCE_EXACT, REFERENCE_PROVIDED, REFERENCE_AUTO],
        default=REFERENCE_AUTO,
    )
    parser.add_argument("--force-exact", action="store_true", help="lift the exact solver node cap")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clique", description="Scattering GNN maximum clique approximation"
    )
    parser.add_argument("--threads", type=int, default=None, help="worker threads (default CLIQUE_THREADS)")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate a synthetic dataset")
    gen.add_argument("--preset", choices=sorted(PRESETS), required=True)
    gen.add_argument("--count", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.set_defaults(handler=generate_command)

    feat = sub.add_parser("features", help="compute node features of one graph")
    feat.add_argument("--graph", required=True)
    feat.add_argument("--out")
    feat.add_argument("--standardize", action="store_true")
    feat.set_defaults(handler=features_command)

    tr = sub.add_parser("train", help="train a model on a dataset")
    tr.add_argument("--data", required=True)
    tr.add_argument("--out", required=True)
    tr.add_argument("--config", help="flat key=value training config file")
    tr.add_argument("--epochs", type=int)
    tr.add_argument("--beta", type=float)
    tr.add_argument("--beta-preset", choices=sorted(BETA_PRESETS))
    tr.add_argument("--seed", type=int)
    tr.add_argument("--lr", type=float)
    tr.add_argument("--patience", type=int)
    tr.add_argument("--clip-norm", type=float)
    tr.add_argument("--validation-fraction", type=float)
    tr.add_argument("--hidden", type=int)
    tr.add_argument("--layers", type=int)
    tr.add_argument("--low-pass-only", action="store_true")
    tr.add_argument("--standardize", action="store_true")
    tr.set_defaults(handler=train_command)

    ev = sub.add_parser("evaluate", help="score a checkpoint against references")
    ev.add_argument("--data", required=True)
    ev.add_argument("--ckpt", required=True)
    ev.add_argument("--out")
    _add_decoder_flags(ev)
    _add_reference_flags(ev)
    ev.set_defaults(handler=evaluate_command)

    dec = sub.add_parser("decode", help="decode one graph with a checkpoint")
    dec.add_argument("--graph", required=True)
    dec.add_argument("--ckpt", required=True)
    _add_decoder_flags(dec)
    dec.set_defaults(handler=decode_command)

    orc = sub.add_parser("oracle", help="exact or local-search cliques")
    orc.add_argument("--data", required=True)
    orc.add_argument("--method", choices=[METHOD_EXACT, METHOD_LOCAL_SEARCH], default=METHOD_EXACT)
    orc.add_argument("--eta1", type=int, default=5)
    orc.add_argument("--eta2", type=int, default=100)
    orc.add_argument("--seed", type=int, default=0)
    orc.add_argument("--force-exact", action="store_true")
    orc.set_defaults(handler=oracle_command)

    bench = sub.add_parser("benchmark", help="compare methods on a dataset")
    bench.add_argument("--data", required=True)
    bench.add_argument("--methods", required=True, help="e.g. hybrid,low-pass,local-search:5:100,exact")
    bench.add_argument("--ckpt")
    bench.add_argument("--lowpass-ckpt")
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--out")
    _add_decoder_flags(bench)
    _add_reference_flags(bench)
    bench.set_defaults(handler=benchmark_command)
    return parser


def cli(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    logger.info(f"COMMAND -> {args.command} {' '.join(argv or sys.argv[1:])}")
    try:
        return args.handler(args)
    except (ValueError, OSError) as e:
        logger.error(f"Command '{args.command}' failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 1
