"""Command-line entry point: ``qconv {verify,train,eval,export-plots,init-config}``.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 I/O error.
"""

from __future__ import annotations

import argparse
import copy
import json
import logging
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .mnist import DATA_DIR_ENV, IdxFormatError, load_mnist, subset
from .model import ModelConfig
from .trainer import TrainConfig, evaluate, train
from .verify import SCHEMA_VERSION, SUITES, run_suite

log = logging.getLogger("qconv")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3

_ANSATZ_SCHEMA = {
    "type": "object", "additionalProperties": False,
    "properties": {
        "num_qubits": {"type": "integer", "minimum": 1},
        "num_layers": {"type": "integer", "minimum": 0},
        "entangler": {"enum": ["ring", "line", "none"]},
        "entangler_gate": {"enum": ["cz", "cnot"]},
        "axes": {"type": "array", "items": {"enum": ["x", "y", "z"]}, "minItems": 1},
    },
}

RUN_CONFIG_SCHEMA = {
    "type": "object", "additionalProperties": False,
    "required": ["schema_version", "seed", "data", "model", "train"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "seed": {"type": "integer", "minimum": 0},
        "data": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "dir": {"type": ["string", "null"]},
                "prefix": {"type": "string"},
                "classes": {"type": ["array", "null"], "items": {"type": "integer", "minimum": 0,
                                                                 "maximum": 9}},
                "train_per_class": {"type": "integer", "minimum": 1},
                "test_per_class": {"type": "integer", "minimum": 1},
            },
        },
        "model": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "data_qubits": {"type": "integer"},
                "kernel_qubits": {"type": "integer"},
                "channels": {"type": "integer", "minimum": 0},
                "num_classes": {"type": "integer", "minimum": 2},
                "measured_channels": {"type": "integer", "minimum": 1},
                "second_layer": {"enum": ["shared", "per-channel"]},
                "pad_anchor": {"enum": ["center", "corner"]},
                "ansatz": _ANSATZ_SCHEMA,
            },
        },
        "train": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "epochs": {"type": "integer", "minimum": 0},
                "learning_rate": {"type": "number", "exclusiveMinimum": 0},
                "beta1": {"type": "number"},
                "beta2": {"type": "number"},
                "eps": {"type": "number"},
                "batch_size": {"type": "integer", "minimum": 0},
                "gradient_mode": {"enum": ["adjoint", "parameter-shift", "finite-difference"]},
                "grad_clip": {"type": "number", "exclusiveMinimum": 0},
                "fd_step": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "output": {
            "type": "object", "additionalProperties": False,
            "properties": {"dir": {"type": "string"}},
        },
    },
}

CHECKPOINT_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "kind", "seed", "config", "params"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "kind": {"const": "checkpoint"},
        "seed": {"type": "integer"},
        "config": {"type": "object"},
        "params": {"type": "array", "items": {"type": "number"}},
    },
}

METRICS_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "kind", "seed", "config", "metrics"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "kind": {"const": "metrics"},
        "metrics": {
            "type": "object", "required": ["epochs"],
            "properties": {"epochs": {"type": "array"}},
        },
    },
}


class ConfigError(Exception):
    pass


def default_run_config() -> dict:
    train_cfg = TrainConfig().to_dict()
    return {
        "schema_version": SCHEMA_VERSION,
        "seed": 0,
        "data": {"dir": None, "prefix": "train", "classes": None,
                 "train_per_class": train_cfg.pop("train_per_class"),
                 "test_per_class": train_cfg.pop("test_per_class")},
        "model": ModelConfig().to_dict(),
        "train": {k: v for k, v in train_cfg.items() if k != "seed"},
        "output": {"dir": "runs/default"},
    }


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def validate_run_config(raw: dict) -> dict:
    """Schema-check a (partial) run config and fill in defaults."""
    try:
        jsonschema.validate(raw, RUN_CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config: {exc.message} at /{'/'.join(map(str, exc.absolute_path))}") from None
    cfg = _merge(default_run_config(), raw)
    if cfg["data"]["classes"] is None:
        cfg["data"]["classes"] = list(range(cfg["model"]["num_classes"]))
    if len(cfg["data"]["classes"]) != cfg["model"]["num_classes"]:
        raise ConfigError("data.classes must list model.num_classes digits")
    try:
        build_configs(cfg)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config: {exc}") from None
    return cfg


def build_configs(cfg: dict) -> tuple[ModelConfig, TrainConfig]:
    model_cfg = ModelConfig.from_dict(cfg["model"])
    train_cfg = TrainConfig(seed=cfg["seed"], train_per_class=cfg["data"]["train_per_class"],
                            test_per_class=cfg["data"]["test_per_class"], **cfg["train"])
    return model_cfg, train_cfg


def split_seed(seed: int) -> list[int]:
    """Entropy for the train/test draw; kept apart from the trainer's own streams."""
    return [seed, 0x5117]


def _load_json(path) -> dict:
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from None


def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2) + "\n")


def _load_split(cfg: dict, data_dir, seed: int):
    d = cfg["data"]
    dataset = load_mnist(data_dir or d["dir"], d["prefix"])
    return subset(dataset, d["classes"], d["train_per_class"], d["test_per_class"],
                  split_seed(seed))


def cmd_verify(args) -> int:
    suites = SUITES if args.suite == "all" else (args.suite,)
    if args.max_qubits > 12:
        raise ConfigError("--max-qubits must be <= 12")
    reports = []
    for name in suites:
        report = run_suite(name, args.trials, args.seed, args.max_qubits)
        status = "PASS" if report.passed else "FAIL"
        print(f"{status} {name:<10} cases={len(report.cases):<4} "
              f"max_error={report.max_error:.3e} ({report.seconds:.1f}s)")
        for case in report.cases:
            if not case.passed:
                print(f"     {case.case}: {case.max_error:.3e} > {case.tolerance:.0e}")
        reports.append(report.to_dict())
    payload = {"schema_version": SCHEMA_VERSION, "kind": "verify-report", "seed": args.seed,
               "trials": args.trials, "max_qubits": args.max_qubits,
               "passed": all(r["passed"] for r in reports), "suites": reports}
    if args.out:
        _write_json(Path(args.out), payload)
    return EXIT_OK if payload["passed"] else EXIT_FAIL


def cmd_train(args) -> int:
    raw = _load_json(args.config)
    if args.seed is not None:
        raw["seed"] = args.seed
    cfg = validate_run_config(raw)
    model_cfg, train_cfg = build_configs(cfg)
    out_dir = Path(args.out or cfg["output"]["dir"])
    train_set, test_set = _load_split(cfg, args.data_dir, cfg["seed"])
    params, metrics = train(train_cfg, model_cfg, train_set, test_set)
    sub_seeds = dict(metrics.sub_seeds, split=split_seed(cfg["seed"]))
    common = {"schema_version": SCHEMA_VERSION, "seed": cfg["seed"], "sub_seeds": sub_seeds,
              "config": cfg}
    _write_json(out_dir / "checkpoint.json",
                {**common, "kind": "checkpoint", "params": params.tolist(),
                 "final_test": metrics.final_test.to_dict() if metrics.final_test else None})
    _write_json(out_dir / "metrics.json", {**common, "kind": "metrics", "metrics": metrics.to_dict()})
    final = metrics.final_test.accuracy if metrics.final_test else None
    print(f"wrote {out_dir}/checkpoint.json and metrics.json; final test accuracy {final}")
    return EXIT_OK


def cmd_eval(args) -> int:
    ckpt = _load_json(args.checkpoint)
    try:
        jsonschema.validate(ckpt, CHECKPOINT_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"checkpoint: {exc.message}") from None
    cfg = validate_run_config(ckpt["config"])
    model_cfg, _ = build_configs(cfg)
    params = np.asarray(ckpt["params"], dtype=np.float64)
    if params.shape != (model_cfg.num_params,):
        raise ConfigError(f"checkpoint has {params.size} params, config needs {model_cfg.num_params}")
    seed = cfg["seed"] if args.seed is None else args.seed
    _, test_set = _load_split(cfg, args.data_dir, seed)
    result = evaluate(model_cfg, params, test_set)
    payload = {"schema_version": SCHEMA_VERSION, "kind": "evaluation", "seed": seed,
               "checkpoint_seed": ckpt["seed"], "sub_seeds": {"split": split_seed(seed)},
               "config": cfg, "test": result.to_dict()}
    out = Path(args.out) if args.out else Path(args.checkpoint).with_name("eval.json")
    _write_json(out, payload)
    print(f"test accuracy {result.accuracy} ({result.categories_learned} categories learned); "
          f"wrote {out}")
    return EXIT_OK


def cmd_export_plots(args) -> int:
    """Plain tab-separated files; seed and config provenance go to ``export.json``."""
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    sources = []
    for path in args.metrics:
        doc = _load_json(path)
        try:
            jsonschema.validate(doc, METRICS_SCHEMA)
        except jsonschema.ValidationError as exc:
            raise ConfigError(f"{path}: malformed metrics ({exc.message})") from None
        stem = Path(path).stem if len(args.metrics) == 1 else Path(path).parent.name + "_" + Path(path).stem
        lines = ["epoch\tcategories_learned\ttrain_loss\ttest_accuracy\tseed\n"]
        for e in doc["metrics"]["epochs"]:
            lines.append(f"{e['epoch']}\t{e['categories_learned']}\t{e['train_loss']}\t"
                         f"{e['test_accuracy']}\t{doc['seed']}\n")
        files = [f"{stem}_categories.tsv"]
        (out_dir / files[0]).write_text("".join(lines))
        final = doc["metrics"].get("final_test")
        if final:
            grid = "".join("\t".join(str(int(v)) for v in row) + "\n"
                           for row in final["confusion_matrix"])
            files.append(f"{stem}_confusion.tsv")
            (out_dir / files[1]).write_text(grid)
        sources.append({"metrics": str(path), "seed": doc["seed"], "config": doc["config"],
                        "files": files})
    _write_json(out_dir / "export.json",
                {"schema_version": SCHEMA_VERSION, "kind": "export", "sources": sources})
    print(f"wrote column files to {out_dir}")
    return EXIT_OK


def cmd_init_config(args) -> int:
    text = json.dumps(default_run_config(), indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qconv", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run seeded theorem/property suites")
    p.add_argument("--suite", default="all", choices=SUITES + ("all",))
    p.add_argument("--trials", type=int, default=None, help="trials per case (suite default if omitted)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-qubits", type=int, default=10)
    p.add_argument("--out", help="write a JSON report here")
    p.set_defaults(func=cmd_verify)

    data_help = f"MNIST IDX directory (default: config value, then ${DATA_DIR_ENV})"
    p = sub.add_parser("train", help="train a classifier from a run config")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--data-dir", default=None, help=data_help)
    p.add_argument("--out", default=None, help="output directory (default: config output.dir)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="re-evaluate a checkpoint on its test split")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--seed", type=int, default=None, help="draw the test split from another seed")
    p.add_argument("--data-dir", default=None, help=data_help)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("export-plots", help="metrics JSON -> tab-separated column files")
    p.add_argument("metrics", nargs="+")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_plots)

    p = sub.add_parser("init-config", help="print the default run config")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_init_config)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FileNotFoundError, IdxFormatError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
