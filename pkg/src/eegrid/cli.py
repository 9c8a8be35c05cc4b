"""Command line entry point: ``eegrid <command> [--config FILE] [--key value ...]``."""
from __future__ import annotations

import argparse
import json
import sys
import typing
from dataclasses import fields
from pathlib import Path

from . import selftest
from .config import ConfigError, ExperimentConfig
from .mlcore import LeakageError
from .recording import FormatError, save_labels, save_recording
from .topomap import write_pgm, write_slice_csv

EXIT_OK, EXIT_FAIL, EXIT_INVALID = 0, 1, 2


def _parse_tuple(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(",") if v.strip())


def _converter(tp):
    hints = typing.get_type_hints(ExperimentConfig)
    t = hints[tp]
    origin = typing.get_origin(t)
    args = typing.get_args(t)
    if origin is tuple:
        return _parse_tuple
    if args and type(None) in args:  # optional
        t = next(a for a in args if a is not type(None))
    return t if t in (int, float, str) else str


def add_config_flags(parser: argparse.ArgumentParser, suffix: str = "") -> None:
    group = parser.add_argument_group("config overrides" + (f" ({suffix.strip('_')})" if suffix else ""))
    for f in fields(ExperimentConfig):
        name = f.name + suffix
        flags = [f"--{name}"]
        if "_" in name:
            flags.append(f"--{name.replace('_', '-')}")
        group.add_argument(*flags, dest=name, type=_converter(f.name), default=None, metavar=f.name.upper())


def build_config(path, args, suffix: str = "", base: dict | None = None) -> ExperimentConfig:
    d = dict(base or {})
    if path:
        d.update(ExperimentConfig.load(path).to_dict())
    for f in fields(ExperimentConfig):
        v = getattr(args, f.name + suffix, None)
        if v is not None:
            d[f.name] = v
    return ExperimentConfig.from_dict(d)


def _emit(text: str) -> None:
    sys.stdout.write(text)
    sys.stdout.flush()


# ---------------------------------------------------------------------------
# commands


def cmd_extract(args) -> int:
    from .pipeline import run_extract

    cfg = build_config(args.config, args)
    path = run_extract(cfg)
    _emit(json.dumps({"samples": str(path), "extraction_hash": cfg.extraction_hash(),
                      "config_hash": cfg.config_hash()}, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_experiment(args) -> int:
    from .pipeline import run_experiment

    cfg = build_config(args.config, args)
    report = run_experiment(cfg)
    _emit(report.to_jsonl())
    path = report.write()
    print(f"summary written to {path}", file=sys.stderr)
    return EXIT_OK


def cmd_compare(args) -> int:
    from .pipeline import run_compare

    cfg1 = build_config(args.config, args)
    if not args.config2 and not any(getattr(args, f.name + "_2", None) is not None
                                    for f in fields(ExperimentConfig)):
        raise ConfigError("compare needs a second arm: --config2 FILE and/or --<key>_2 overrides")
    base = None if args.config2 else cfg1.to_dict()
    cfg2 = build_config(args.config2, args, suffix="_2", base=base)
    report = run_compare(cfg1, cfg2)
    _emit(report.to_jsonl())
    path = report.write()
    print(f"summary written to {path}", file=sys.stderr)
    return EXIT_OK


def cmd_interp_dump(args) -> int:
    from .pipeline import load_or_extract

    cfg = build_config(args.config, args)
    if cfg.model != 2:
        cfg = cfg.replace(model=2)
    ss = load_or_extract(cfg)
    if not 0 <= args.sample < len(ss):
        raise ConfigError(f"sample index {args.sample} outside 0..{len(ss) - 1}")
    out = Path(args.out or Path(cfg.output_dir) / f"interp-{cfg.extraction_hash()}")
    out.mkdir(parents=True, exist_ok=True)
    grid = ss.X[args.sample]
    written = []
    for j, name in enumerate(ss.feature_layout):
        stem = f"sample{args.sample:05d}_{name.replace(':', '_')}"
        write_pgm(grid[..., j], out / f"{stem}.pgm")
        write_slice_csv(grid[..., j], out / f"{stem}.csv")
        written.append(stem)
    _emit(json.dumps({"directory": str(out), "subject": ss.subjects[args.sample], "trial": ss.trials[args.sample],
                      "window": int(ss.windows[args.sample]), "slices": written}, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_selftest(args) -> int:
    return EXIT_OK if selftest.run(sys.stdout, seed=args.seed) else EXIT_FAIL


def cmd_synthesize(args) -> int:
    from .synthetic import SyntheticSpec, synthetic_dataset

    spec = SyntheticSpec(n_subjects=args.subjects, duration_seconds=args.seconds, alpha_gain=args.gain,
                         seed=args.seed)
    recs, labels, montage = synthetic_dataset(spec)
    out = Path(args.out)
    (out / "recordings").mkdir(parents=True, exist_ok=True)
    for r in recs:
        save_recording(r, out / "recordings" / f"{r.subject_id}_{r.trial_id}.{args.format}",
                       "raw_f32" if args.format == "f32" else "csv")
    save_labels(labels, out / "labels.csv")
    with open(out / "montage.csv", "w") as fh:
        fh.write("name,x,y\n")
        for name, (x, y) in montage.entries.items():
            fh.write(f"{name},{x!r},{y!r}\n")
    _emit(json.dumps({"directory": str(out), "recordings": len(recs)}) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="eegrid", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def with_config(name, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", help="JSON config file; flags override its keys")
        add_config_flags(sp)
        return sp

    with_config("extract", "window, featurize and save samples").set_defaults(func=cmd_extract)
    with_config("experiment", "cross-validated experiment; JSON lines on stdout").set_defaults(func=cmd_experiment)
    sp = with_config("compare", "paired signed-rank comparison of two configs (arm 2 > arm 1)")
    sp.add_argument("--config2", help="config file of arm 2 (default: arm 1 plus the _2 overrides)")
    add_config_flags(sp, suffix="_2")
    sp.set_defaults(func=cmd_compare)
    sp = with_config("interp-dump", "write the K x K slices of one model-2 sample as PGM and CSV")
    sp.add_argument("--sample", type=int, default=0, help="sample index")
    sp.add_argument("--out", help="output directory")
    sp.set_defaults(func=cmd_interp_dump)
    sp = sub.add_parser("selftest", help="run the quick oracle checks")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_selftest)
    sp = sub.add_parser("synthesize", help="write a synthetic planted-signal dataset to disk")
    sp.add_argument("--out", required=True)
    sp.add_argument("--subjects", type=int, default=64)
    sp.add_argument("--seconds", type=float, default=60.0)
    sp.add_argument("--gain", type=float, default=8.0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--format", choices=("f32", "csv"), default="f32")
    sp.set_defaults(func=cmd_synthesize)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FormatError, LeakageError, FileNotFoundError, KeyError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
