"""Command line driver: ``mnclab run | list-presets | export-csv``.

Exit codes: 0 success; 1 invalid configuration or a task error; 2 a failed
consistency check (or, with ``--strict``, any inconclusive verdict).
"""

from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path

from .config import ExperimentConfig, load_config, override_seed, parse_config
from .errors import ConfigError, MnclabError
from .report import export_csv, load_report, write_report
from .runner import exit_code, run_config


def preset_names() -> list[str]:
    root = resources.files("mnclab") / "presets"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".toml"))


def preset_text(name: str) -> str:
    return (resources.files("mnclab") / "presets" / f"{name}.toml").read_text()


def list_presets() -> list[tuple[str, str]]:
    out = []
    for name in preset_names():
        cfg = parse_config(preset_text(name), f"preset:{name}")
        out.append((name, cfg.raw.get("description", "")))
    return out


def resolve_config(target: str) -> tuple[ExperimentConfig, str]:
    """A path to a TOML file, or the name of a bundled preset."""
    path = Path(target)
    if path.is_file():
        return load_config(path), path.stem
    if target in preset_names():
        return parse_config(preset_text(target), f"preset:{target}"), target
    raise ConfigError(f"{target!r} is neither a config file nor a preset (see list-presets)")


def cmd_run(args) -> int:
    try:
        cfg, stem = resolve_config(args.config)
        if args.seed_override is not None:
            cfg = override_seed(cfg, args.seed_override)
        report = run_config(cfg)
    except ConfigError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 1
    out = Path(args.out)
    path = write_report(report, out / f"{stem}.report.json")
    for t in report["tasks"]:
        if t.get("tables"):
            export_csv(report, t["name"], out / f"{stem}.csv")
    code = exit_code(report, args.strict)
    s = report["summary"]
    for t in report["tasks"]:
        bad = [c["what"] for c in t["checks"] if not c["holds"]]
        status = "error" if t["status"] == "error" else ("FAILED" if bad else "ok")
        extra = t.get("error") or "; ".join(bad)
        verdicts = ",".join(dict.fromkeys(t["verdicts"]))
        print(f"{t['name']:<32} {status:<7} {verdicts}{'  ' + extra if extra else ''}")
    print(f"report: {path}  tasks={s['tasks']} errors={len(s['errors'])} "
          f"failed_checks={len(s['failed_checks'])} inconclusive={len(s['inconclusive'])} exit={code}")
    return code


def cmd_list(args) -> int:
    for name, desc in list_presets():
        print(f"{name:<22} {desc}")
    return 0


def cmd_export(args) -> int:
    try:
        paths = export_csv(load_report(args.report), args.task, args.dir)
    except (OSError, ValueError, MnclabError) as exc:
        print(f"export failed: {exc}", file=sys.stderr)
        return 1
    for p in paths:
        print(p)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mnclab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a config file or a named preset")
    r.add_argument("config")
    r.add_argument("--out", default="mnclab-out", help="output directory (default: %(default)s)")
    r.add_argument("--seed-override", type=int, default=None, help="replace every seed in the config")
    r.add_argument("--strict", action="store_true", help="exit 2 on any inconclusive verdict")
    r.set_defaults(func=cmd_run)
    ls = sub.add_parser("list-presets", help="names and descriptions of the bundled presets")
    ls.set_defaults(func=cmd_list)
    ex = sub.add_parser("export-csv", help="write the tables of one task as CSV")
    ex.add_argument("report")
    ex.add_argument("task")
    ex.add_argument("dir")
    ex.set_defaults(func=cmd_export)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
