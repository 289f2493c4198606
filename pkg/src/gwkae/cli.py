"""Command-line pipeline: simulate -> train -> calibrate -> detect -> localize -> evaluate.

Each stage reads and writes files under the output directory, so every
artifact can be inspected and each stage re-run in isolation. Exit codes:
0 ok, 1 usage, 2 data/config error, 3 numeric failure, 4 damage found
(only with --fail-on-damage).
"""

from __future__ import annotations

import argparse
import copy
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import dataio
from .autoencoder import KAEModel, default_widths, load_model, save_model
from .errors import DataError, ToolkitError, TrainingError, UsageError
from .health import calibrate_threshold, compute_di_set, detect, health_report_doc
from .imaging import MRAPIDParams, PeakParams, map_to_csv, map_to_pgm
from .kan import BSplineGrid
from .metrics import MetricConfig, evaluate, match_pairs
from .multidamage import (CandidateDamage, MergeConfig, final_damages_doc, localize_region,
                          merge_duplicates)
from .signals import GWSignal
from .simulate import DamageSpec, SimParams, generate_scenario
from .training import TrainConfig, split_groups, train

DEFAULT_CONFIG = {
    "layout": "layout.json",
    "out_dir": "out",
    "seed": 0,
    "reduction": "mean",
    "sim": {
        "repetitions": 43,
        "damaged_repetitions": 1,
        "damages": [],
        "params": {},
    },
    "train": {
        "hidden": [512, 256],
        "bottleneck": 8,
        "widths": None,
        "grid": {"order": 3, "intervals": 5, "lo": -1.0, "hi": 2.0},
        "learning_rate": 0.001,
        "batch_size": 16,
        "epochs": 100,
        "weight_decay": 1e-6,
        "gamma": 0.95,
        "split_fraction": 0.8,
    },
    "imaging": {
        "r": 0.05,
        "top_k": None,
        "resolution": 2.0,
        "peaks": {"max_peaks": 3, "min_separation": 30.0, "rel_threshold": 0.7},
    },
    "merge": {"distance_threshold": 30.0},
    "metrics": {"L": 200.0},
}


def _deep_merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def load_config(args: argparse.Namespace) -> dict:
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise DataError(f"config file not found: {path}")
        try:
            cfg = _deep_merge(cfg, json.loads(path.read_text()))
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: invalid JSON ({exc})") from None
    flag_map = {
        "seed": ("seed",),
        "out": ("out_dir",),
        "layout": ("layout",),
        "epochs": ("train", "epochs"),
        "lr": ("train", "learning_rate"),
        "batch": ("train", "batch_size"),
        "grid_res": ("imaging", "resolution"),
        "top_k": ("imaging", "top_k"),
        "r": ("imaging", "r"),
        "merge_threshold": ("merge", "distance_threshold"),
        "L": ("metrics", "L"),
    }
    for flag, keys in flag_map.items():
        value = getattr(args, flag, None)
        if value is not None:
            node = cfg
            for key in keys[:-1]:
                node = node[key]
            node[keys[-1]] = value
    return cfg


def _config_digest(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()[:12]


def _header(cmd: str, cfg: dict) -> None:
    print(f"# gwkae {cmd} seed={cfg['seed']} config_sha256={_config_digest(cfg)}")


def _sim_params(cfg: dict) -> SimParams:
    return SimParams(seed=cfg["seed"], **cfg["sim"]["params"])


def _train_config(cfg: dict) -> TrainConfig:
    t = cfg["train"]
    return TrainConfig(
        learning_rate=t["learning_rate"],
        batch_size=t["batch_size"],
        epochs=t["epochs"],
        weight_decay=t["weight_decay"],
        gamma=t["gamma"],
        seed=cfg["seed"],
        split_fraction=t["split_fraction"],
        reduction=cfg["reduction"],
    )


def _imaging_params(cfg: dict) -> tuple[MRAPIDParams, float, PeakParams]:
    im = cfg["imaging"]
    top_k = im["top_k"]
    params = MRAPIDParams(r=im["r"], top_k=None if top_k is None else int(top_k))
    peaks = PeakParams(**im["peaks"])
    return params, float(im["resolution"]), peaks


def _load_normalized(path, layout, cfg) -> list[GWSignal]:
    rate = cfg["sim"]["params"].get("sample_rate", SimParams().sample_rate)
    return [s.normalized() for s in dataio.load_dataset(path, layout, rate)]


def cmd_simulate(cfg: dict) -> int:
    _header("simulate", cfg)
    layout = dataio.load_layout(cfg["layout"])
    damages = [
        DamageSpec((d["x_mm"], d["y_mm"]), d["diameter_mm"]) for d in cfg["sim"]["damages"]
    ]
    out_dir = Path(cfg["out_dir"])
    generate_scenario(layout, damages, cfg["sim"]["repetitions"], _sim_params(cfg),
                      out_dir=out_dir, damaged_repetitions=cfg["sim"]["damaged_repetitions"])
    print(f"wrote {out_dir / 'baseline.csv'}, {out_dir / 'damaged.csv'}, {out_dir / 'truth.json'}")
    return 0


def cmd_train(cfg: dict) -> int:
    _header("train", cfg)
    t = cfg["train"]
    print(
        f"# train lr={t['learning_rate']} batch={t['batch_size']} epochs={t['epochs']} "
        f"weight_decay={t['weight_decay']} gamma={t['gamma']}"
    )
    layout = dataio.load_layout(cfg["layout"])
    out_dir = Path(cfg["out_dir"])
    baselines = _load_normalized(out_dir / "baseline.csv", layout, cfg)
    m = len(baselines[0])
    widths = t["widths"] or default_widths(m, t["hidden"], t["bottleneck"])
    model = KAEModel.create(widths, BSplineGrid(**t["grid"]), seed=cfg["seed"])
    model, history = train(model, baselines, _train_config(cfg))
    save_model(model, out_dir / "model.json")
    lines = ["epoch,train_loss,val_loss"]
    lines += [f"{i + 1},{tr!r},{va!r}" for i, (tr, va) in enumerate(zip(history.train, history.val))]
    (out_dir / "history.csv").write_text("\n".join(lines) + "\n")
    print(f"wrote {out_dir / 'model.json'}, {out_dir / 'history.csv'}")
    return 0


def cmd_calibrate(cfg: dict) -> int:
    _header("calibrate", cfg)
    layout = dataio.load_layout(cfg["layout"])
    out_dir = Path(cfg["out_dir"])
    model = load_model(out_dir / "model.json")
    baselines = _load_normalized(out_dir / "baseline.csv", layout, cfg)
    rng = np.random.default_rng(cfg["seed"])
    _, val_idx = split_groups(baselines, cfg["train"]["split_fraction"], rng)
    held_out = [baselines[i] for i in val_idx]
    by_rep: dict[int, list[GWSignal]] = {}
    for sig in held_out:
        by_rep.setdefault(sig.repetition, []).append(sig)
    pristine_sets = [
        compute_di_set(model, sigs, layout, region, cfg["reduction"])
        for rep, sigs in sorted(by_rep.items())
        for region in layout.regions
    ]
    thresholds = calibrate_threshold(pristine_sets)
    doc = [{"region_id": rid, "ThrV": thr} for rid, thr in sorted(thresholds.items())]
    (out_dir / "thresholds.json").write_text(json.dumps(doc, indent=2) + "\n")
    print(f"wrote {out_dir / 'thresholds.json'} ({len(doc)} regions)")
    return 0


def _load_thresholds(out_dir: Path) -> dict[int, float]:
    path = out_dir / "thresholds.json"
    if not path.exists():
        raise DataError(f"thresholds file not found: {path} (run calibrate first)")
    return {int(e["region_id"]): float(e["ThrV"]) for e in json.loads(path.read_text())}


def cmd_detect(cfg: dict, fail_on_damage: bool = False) -> int:
    _header("detect", cfg)
    layout = dataio.load_layout(cfg["layout"])
    out_dir = Path(cfg["out_dir"])
    model = load_model(out_dir / "model.json")
    current = _load_normalized(out_dir / "damaged.csv", layout, cfg)
    thresholds = _load_thresholds(out_dir)
    docs = []
    any_damaged = False
    for region in layout.regions:
        dis = compute_di_set(model, current, layout, region, cfg["reduction"])
        report = detect(dis, thresholds)
        any_damaged |= report.damaged
        docs.append(health_report_doc(report, dis))
        print(f"region {region.id}: HI={report.hi:.3e} ThrV={report.thrv:.3e} "
              f"damaged={report.damaged}")
    (out_dir / "health.json").write_text(json.dumps(docs, indent=2) + "\n")
    print(f"wrote {out_dir / 'health.json'}")
    return 4 if (fail_on_damage and any_damaged) else 0


def cmd_localize(cfg: dict) -> int:
    _header("localize", cfg)
    layout = dataio.load_layout(cfg["layout"])
    out_dir = Path(cfg["out_dir"])
    model = load_model(out_dir / "model.json")
    current = _load_normalized(out_dir / "damaged.csv", layout, cfg)
    thresholds = _load_thresholds(out_dir)
    params, resolution, peak_params = _imaging_params(cfg)
    candidates: list[CandidateDamage] = []
    for region in layout.regions:
        report, _, dmap = localize_region(model, current, layout, region, thresholds,
                                          params, resolution, peak_params, cfg["reduction"])
        if dmap is None:
            continue
        map_to_csv(dmap, out_dir / f"map_region{region.id}.csv")
        map_to_pgm(dmap, out_dir / f"map_region{region.id}.pgm")
        candidates.extend(
            CandidateDamage(p.x, p.y, region.id, p.value) for p in dmap.peaks
        )
        print(f"region {region.id}: damaged, {len(dmap.peaks)} peak(s)")
    final = merge_duplicates(candidates, MergeConfig(cfg["merge"]["distance_threshold"]))
    (out_dir / "damages.json").write_text(json.dumps(final_damages_doc(final), indent=2) + "\n")
    for dmg in final:
        print(f"damage at ({dmg.x:.1f}, {dmg.y:.1f}) mm, score {dmg.score:.3e}, "
              f"regions {list(dmg.contributing_regions)}")
    print(f"wrote {out_dir / 'damages.json'} ({len(final)} damage(s))")
    return 0


def cmd_evaluate(cfg: dict) -> int:
    _header("evaluate", cfg)
    out_dir = Path(cfg["out_dir"])
    truth = dataio.load_truth(out_dir / "truth.json")
    damages_path = out_dir / "damages.json"
    if not damages_path.exists():
        raise DataError(f"damages file not found: {damages_path} (run localize first)")
    predicted = json.loads(damages_path.read_text())
    pairs = match_pairs(
        [(d["x_mm"], d["y_mm"]) for d in truth],
        [(d["x_mm"], d["y_mm"]) for d in predicted],
    )
    report = evaluate(pairs, MetricConfig(cfg["metrics"]["L"]))
    (out_dir / "metrics.json").write_text(json.dumps(report, indent=2) + "\n")
    print(f"rmse={report['rmse_mm']:.2f} mm  mre={report['mre_percent']:.2f}%  "
          f"mape={report['mape_percent']:.2f}%  (n={report['n']})")
    print(f"wrote {out_dir / 'metrics.json'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gwkae",
        description="Baseline-free guided-wave damage detection and localization.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in [
        ("simulate", "generate synthetic baseline/damaged datasets plus truth manifest"),
        ("train", "train the autoencoder on the baseline dataset"),
        ("calibrate", "calibrate per-region detection thresholds on held-out baselines"),
        ("detect", "score the current dataset and write per-region health reports"),
        ("localize", "image damaged regions and merge duplicate detections"),
        ("evaluate", "compare localized damages against the truth manifest"),
    ]:
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", help="JSON pipeline configuration file")
        p.add_argument("--out", help="output directory (default from config)")
        p.add_argument("--layout", help="layout JSON path (default from config)")
        p.add_argument("--seed", type=int, help="master seed for all randomness")
        if name == "train":
            p.add_argument("--epochs", type=int)
            p.add_argument("--lr", type=float)
            p.add_argument("--batch", type=int)
        if name == "localize":
            p.add_argument("--grid-res", dest="grid_res", type=float)
            p.add_argument("--top-k", dest="top_k", type=int)
            p.add_argument("--r", type=float)
            p.add_argument("--merge-threshold", dest="merge_threshold", type=float)
        if name == "detect":
            p.add_argument("--fail-on-damage", action="store_true",
                           help="exit with code 4 when any region is damaged")
        if name == "evaluate":
            p.add_argument("--L", type=float, help="characteristic length for MRE")
    return parser


_DISPATCH = {
    "simulate": cmd_simulate,
    "train": cmd_train,
    "calibrate": cmd_calibrate,
    "localize": cmd_localize,
    "evaluate": cmd_evaluate,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        cfg = load_config(args)
        Path(cfg["out_dir"]).mkdir(parents=True, exist_ok=True)
        if args.command == "detect":
            return cmd_detect(cfg, fail_on_damage=args.fail_on_damage)
        return _DISPATCH[args.command](cfg)
    except TrainingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ToolkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
