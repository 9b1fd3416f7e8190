"""Command-line driver: generate, features, train-eval, noise-sweep, report.

Exit codes: 0 success, 1 usage or configuration error, 2 I/O error,
3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import pipeline
from ._serde import ConfigError
from .config import RunConfig, load_config
from .features import FeatureView
from .orbital import ConfigurationError, OrbitDomainError
from .rflink import LinkParameterError
from .scenario import SchemaError

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_INTERNAL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _sigma_list(text: str) -> list[float]:
    try:
        values = [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("sigma grid is empty")
    if any(v < 0 for v in values):
        raise argparse.ArgumentTypeError("sigma values must be non-negative")
    return values


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="proxsim", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--config", type=Path, help="JSON run config (missing keys keep defaults)")
        p.add_argument("--out", type=Path, help="output directory")
        p.add_argument("--seed", type=_u64, help="override the master seed")
        p.add_argument("--scenarios-per-cell", type=int, help="override scenarios per (class, regime) cell")

    p = sub.add_parser("generate", help="simulate scenarios and write CSV shards + manifest")
    common(p)
    p = sub.add_parser("features", help="build a feature view from a dataset directory")
    common(p)
    p.add_argument("--data", type=Path, required=True, help="dataset directory")
    p.add_argument("--view", choices=[v.value for v in FeatureView], default="fused")
    p = sub.add_parser("train-eval", help="grouped split, train a forest, write metrics for one view")
    common(p)
    p.add_argument("--data", type=Path, required=True, help="dataset directory (features built on demand)")
    p.add_argument("--view", choices=[v.value for v in FeatureView], default="fused")
    p = sub.add_parser("noise-sweep", help="jammer-activity detection versus estimation-noise scale")
    common(p)
    p.add_argument("--sigma-grid", type=_sigma_list, help="comma-separated noise scales, e.g. 0,0.5,1")
    p = sub.add_parser("report", help="collect per-view metrics into ablation tables")
    common(p)
    return parser


def _load(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.scenarios_per_cell is not None and args.scenarios_per_cell < 1:
        raise ConfigError("--scenarios-per-cell must be >= 1")
    return cfg.with_overrides(seed=args.seed, scenarios_per_cell=args.scenarios_per_cell,
                              sigma_grid=getattr(args, "sigma_grid", None),
                              out_dir=str(args.out) if args.out else None)


def _dispatch(args) -> int:
    cfg = _load(args)
    out = Path(cfg.out_dir)
    if args.command == "generate":
        summary = pipeline.run_generate(cfg, out)
        print(json.dumps(summary, indent=1, sort_keys=True))
    elif args.command == "features":
        path = pipeline.run_features(cfg, args.data, out, args.view)
        print(json.dumps({"features": str(path), "config_hash": cfg.hash}))
    elif args.command == "train-eval":
        m = pipeline.run_train_eval(cfg, args.data, args.view, out)
        print(json.dumps({"view": m["view"], "accuracy": m["accuracy"], "macro_f1": m["macro_f1"],
                          "macro_auroc": m["macro_auroc"], "config_hash": m["config_hash"]}))
    elif args.command == "noise-sweep":
        rows = pipeline.run_noise_sweep(cfg, out)
        for r in rows:
            print(f"sigma={r['sigma']:<5g} accuracy={r['accuracy']:.4f} precision={r['precision']:.4f} "
                  f"recall={r['recall']:.4f} f1={r['f1']:.4f}")
    elif args.command == "report":
        print(pipeline.run_report(out))
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _dispatch(args)
    except (ConfigError, ConfigurationError, LinkParameterError, OrbitDomainError, SchemaError) as exc:
        print(f"proxsim: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"proxsim: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (AssertionError, FloatingPointError) as exc:
        print(f"proxsim: internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
