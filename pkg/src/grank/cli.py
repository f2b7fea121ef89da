"""Command-line front end: ``validate``, ``run``, ``sweep`` and ``export-plots``.

Exit status: 0 success, 2 bad configuration or usage, 3 bad input data,
4 runtime failure. ``GRANK_OUTPUT_DIR`` sets the default output directory.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import datetime as dt
import hashlib
import io
import itertools
import json
import logging
import os
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .catalog import CatalogError, fixture_path, load_catalog
from .metrics import detail_jsonl, read_snapshots_csv, snapshots_csv
from .simulator import SCENARIOS, ConfigError, ExperimentConfig, build_world, run_experiment

log = logging.getLogger("grank")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_RUNTIME = 0, 2, 3, 4
OUTPUT_ENV = "GRANK_OUTPUT_DIR"
CONFIG_FIELDS = [f.name for f in dataclasses.fields(ExperimentConfig)]


class DataError(Exception):
    """Input files are missing or malformed."""


# --- config loading ----------------------------------------------------------

def read_config_file(path: str | Path) -> dict:
    """JSON object, or ``key = value`` lines (an optional ``[experiment]`` section)."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if path.suffix == ".json" or text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: expected a JSON object")
        return data
    parser = configparser.ConfigParser()
    parser.optionxform = str   # keep "F" upper-case
    try:
        if not text.lstrip().startswith("["):
            text = "[experiment]\n" + text
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    out = {}
    for section in parser.sections():
        out.update(parser[section])
    return out


def build_config(args, **fixed) -> ExperimentConfig:
    data = read_config_file(args.config) if args.config else {}
    for name in CONFIG_FIELDS:
        value = getattr(args, name, None)
        if value is not None:
            data[name] = value
    data.update(fixed)
    return ExperimentConfig.from_mapping(data)


def _load_catalog(path):
    try:
        return load_catalog(path or fixture_path())
    except FileNotFoundError as exc:
        raise DataError(f"catalog not found: {exc.filename or path}") from exc
    except CatalogError as exc:
        raise DataError(f"{path}: {exc}") from exc


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _now() -> str:
    return dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds")


def run_name(cfg: ExperimentConfig) -> str:
    return f"{cfg.scenario}_F{cfg.F:g}_seed{cfg.seed}"


# --- run ---------------------------------------------------------------------

def execute_run(cfg: ExperimentConfig, out_dir: Path, catalog_path=None) -> dict:
    """Run one experiment, write its files and return the manifest."""
    catalog_file = Path(catalog_path) if catalog_path else fixture_path()
    catalog = _load_catalog(catalog_file)
    out_dir.mkdir(parents=True, exist_ok=True)
    started = _now()
    world = build_world(cfg, catalog)
    snaps = run_experiment(cfg, catalog, world=world)

    outputs = {"snapshots": "snapshots.csv", "detail": "detail.jsonl"}
    (out_dir / "snapshots.csv").write_text(snapshots_csv(snaps), encoding="utf-8")
    (out_dir / "detail.jsonl").write_text(detail_jsonl(snaps), encoding="utf-8")
    if cfg.transcript:
        outputs["transcript"] = "transcript.tsv"
        body = "tick\tfrom\tto\tentries\tbytes\n" + "".join(line + "\n" for line in world.transcript)
        (out_dir / "transcript.tsv").write_text(body, encoding="utf-8")

    manifest = {
        "name": run_name(cfg),
        "version": f"grank-{__version__}",
        "config": cfg.to_dict(),
        "seed": cfg.seed,
        "catalog": str(catalog_file),
        "catalog_sha256": _sha256(catalog_file),
        "outputs": outputs,
        "snapshots": len(snaps),
        "started": started,
        "finished": _now(),
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return manifest


def cmd_run(args) -> int:
    cfg = build_config(args)
    out = Path(args.out or os.environ.get(OUTPUT_ENV, "grank-out")) / run_name(cfg)
    manifest = execute_run(cfg, out, args.catalog)
    print(f"{manifest['name']}: {manifest['snapshots']} snapshots -> {out / 'manifest.json'}")
    return EXIT_OK


# --- sweep -------------------------------------------------------------------

def _split(values, kind):
    out = []
    for v in values:
        out.extend(kind(p) for p in str(v).split(",") if p.strip())
    return out


def _sweep_job(job):
    cfg_dict, out_dir, catalog = job
    cfg = ExperimentConfig(**cfg_dict)
    try:
        execute_run(cfg, Path(out_dir), catalog)
        return None
    except Exception as exc:   # recorded, never aborts the sweep
        return f"{type(exc).__name__}: {exc}"


def cmd_sweep(args) -> int:
    scenarios = _split(args.scenarios, str)
    f_values = _split(args.F_values, float)
    seeds = _split(args.seeds, int)
    if not (scenarios and f_values and seeds):
        raise ConfigError("sweep needs at least one scenario, F value and seed")
    for s in scenarios:
        if s not in SCENARIOS:
            raise ConfigError(f"unknown scenario {s!r}")
    root = Path(args.out or os.environ.get(OUTPUT_ENV, "grank-out"))
    root.mkdir(parents=True, exist_ok=True)

    records, jobs = [], []
    for scenario, F, seed in itertools.product(scenarios, f_values, seeds):
        rec = {"scenario": scenario, "F": F, "seed": seed}
        try:
            cfg = build_config(args, scenario=scenario, F=F, seed=seed)
        except ConfigError as exc:
            rec.update(name=f"{scenario}_F{F:g}_seed{seed}", status="failed", error=str(exc))
            records.append(rec)
            continue
        rec["name"] = run_name(cfg)
        records.append(rec)
        jobs.append((rec, (cfg.to_dict(), str(root / rec["name"]), args.catalog)))

    if args.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            errors = list(pool.map(_sweep_job, [j for _, j in jobs]))
    else:
        errors = [_sweep_job(j) for _, j in jobs]
    for (rec, _), err in zip(jobs, errors):
        if err is None:
            rec.update(status="ok", manifest=f"{rec['name']}/manifest.json")
        else:
            rec.update(status="failed", error=err)

    index = {"version": f"grank-{__version__}", "runs": records}
    (root / "index.json").write_text(json.dumps(index, indent=2) + "\n", encoding="utf-8")
    failed = sum(r["status"] != "ok" for r in records)
    print(f"{len(records) - failed}/{len(records)} runs ok -> {root / 'index.json'}")
    return EXIT_RUNTIME if failed else EXIT_OK


# --- export-plots ------------------------------------------------------------

def _manifests(paths):
    """Expand manifest and sweep-index paths into (manifest, directory) pairs."""
    out = []
    for p in map(Path, paths):
        if not p.exists():
            raise DataError(f"no such file: {p}")
        data = json.loads(p.read_text(encoding="utf-8"))
        if "runs" in data:
            for rec in data["runs"]:
                if rec.get("status") == "ok":
                    out.extend(_manifests([p.parent / rec["manifest"]]))
        else:
            out.append((data, p.parent))
    return out


def _series_label(cfg: dict) -> str:
    return f"{cfg['scenario']} F={cfg['F']:g} seed={cfg['seed']}"


def plot_rows(manifests) -> list[tuple]:
    """Long-format (figure, series, x, y) rows for figures 3 to 9."""
    rows = []
    per_term = {}
    for manifest, base in manifests:
        cfg = manifest["config"]
        label = _series_label(cfg)
        snap_file = base / manifest["outputs"]["snapshots"]
        detail_file = base / manifest["outputs"]["detail"]
        for f in (snap_file, detail_file):
            if not f.exists():
                raise DataError(f"missing snapshot file {f}")
        snaps = read_snapshots_csv(snap_file.read_text(encoding="utf-8"))
        scatter = "fig3" if cfg["scenario"] == "baseline" else "fig4"
        with detail_file.open(encoding="utf-8") as fh:
            for line in fh:
                rec = json.loads(line)
                rows.append((scatter, label, rec["tick"], rec["mean"]))
        if cfg["scenario"] in ("push_vs_pull", "targeted_sybil"):
            fig = "fig5" if cfg["F"] == 0 else "fig6"
            rows.extend((fig, label, s["tick"], s["mean_distance"]) for s in snaps)
        rows.extend(("fig7", label, s["tick"], s["median_top_song_pct"]) for s in snaps)
        rows.extend(("fig9", label, s["tick"], s["mean_gossip_bytes"] / 1000) for s in snaps)
        if cfg["scenario"] == "baseline":
            for s in snaps:
                for key, val in s.items():
                    if key.startswith("top_song_pct["):
                        per_term.setdefault((key[13:-1], s["tick"]), []).append(val)
    # fig8 averages each term over all baseline runs given
    for (term, tick), vals in sorted(per_term.items()):
        rows.append(("fig8", term, tick, statistics.fmean(vals)))
    return rows


def cmd_export_plots(args) -> int:
    rows = plot_rows(_manifests(args.manifests))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("figure", "series", "x", "y"))
    for fig, series, x, y in rows:
        w.writerow((fig, series, x, repr(round(float(y), 9))))
    out = Path(args.out or Path(os.environ.get(OUTPUT_ENV, "grank-out")) / "plots.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(buf.getvalue(), encoding="utf-8")
    figs = sorted({r[0] for r in rows})
    print(f"{len(rows)} rows ({', '.join(figs)}) -> {out}")
    return EXIT_OK


# --- validate ----------------------------------------------------------------

def cmd_validate(args) -> int:
    try:
        cat = load_catalog(args.catalog)
    except FileNotFoundError as exc:
        raise DataError(f"cannot read {args.catalog}") from exc
    except CatalogError as exc:
        print(f"invalid catalog {args.catalog}: {exc}", file=sys.stderr)
        return EXIT_DATA
    print(f"{len(cat)} items, {len(cat.term_corpus)} tags")
    return EXIT_OK


# --- argument parsing --------------------------------------------------------

def _add_config_flags(p: argparse.ArgumentParser, skip=()):
    p.add_argument("--config", help="config file (JSON or key = value lines)")
    p.add_argument("--catalog", help="catalog file (.psv or .json); default is the bundled fixture")
    p.add_argument("--out", help=f"output directory (default ${OUTPUT_ENV} or ./grank-out)")
    group = p.add_argument_group("experiment parameters")
    for name in CONFIG_FIELDS:
        if name in skip:
            continue
        flags = [f"--{name}"]
        if "_" in name:
            flags.append(f"--{name.replace('_', '-')}")
        group.add_argument(*flags, dest=name, metavar="V")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="grank", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"grank {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a catalog file")
    p.add_argument("catalog")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", help="run one experiment")
    _add_config_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run the product of scenarios x F values x seeds")
    p.add_argument("--scenarios", nargs="+", required=True)
    p.add_argument("--F-values", "--F_values", dest="F_values", nargs="+", required=True)
    p.add_argument("--seeds", nargs="+", required=True)
    p.add_argument("--workers", type=int, default=1)
    _add_config_flags(p, skip=("scenario", "F", "seed"))
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("export-plots", help="long-format plot data from run manifests")
    p.add_argument("manifests", nargs="+", help="manifest.json or sweep index.json files")
    p.add_argument("--out", help="output CSV path")
    p.set_defaults(func=cmd_export_plots)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:
        log.debug("run failed", exc_info=True)
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
