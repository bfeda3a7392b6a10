"""Command-line entry: config loading, campaign orchestration, results export.

Subcommands: ``simulate`` runs one campaign, ``train-doe`` fits and saves the
scoring network, ``compare`` sweeps the node grid with the model and all
baselines at both ceilings on shared seeds, ``export`` re-derives the CSV
artifacts from a stored results.json.  All outputs are byte-stable for a
fixed master seed.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from .core import ConfigurationError
from .doe import (evaluate_mse, generate_expert_dataset, init_network,
                  save_network, train)
from .metrics import relative_difference
from .policies import BASELINE_NONE, GREEDY, LAST, MIN_LOAD, RANDOM, PolicyConfig
from .qos import QosConfig
from .simulator import NODE_COUNTS, SimConfig, build_scorer, run_campaign

CEILINGS = (0.10, 0.05)
BASELINES = (RANDOM, LAST, GREEDY)

RESULT_COLUMNS = [
    "campaign_id", "n_nodes", "itrs", "policy", "ceiling", "destination_rule",
    "accuracy", "precision", "recall", "f_measure", "avg_cost", "d_ac",
    "offload_pct", "seed",
]

GRID_COLUMNS = ["n_nodes", "model_ac"] + [
    f"{b}{int(c * 100)}_{kind}"
    for c in CEILINGS for b in BASELINES for kind in ("ac", "d")
]

# key -> (section, attribute, parser)
_BOOL = {"true": True, "false": False, "1": True, "0": False}


def _parse_bool(text: str) -> bool:
    try:
        return _BOOL[text.lower()]
    except KeyError:
        raise ValueError(f"expected true/false, got {text!r}")


def _parse_opt_float(text: str):
    if text.lower() in ("none", "silverman", "auto"):
        return None
    return float(text)


CONFIG_KEYS = {
    "n_nodes": ("sim", "n_nodes", int),
    "itrs": ("sim", "itrs", int),
    "n_experiments": ("sim", "n_experiments", int),
    "seed": ("sim", "seed", int),
    "topology": ("sim", "topology_kind", str),
    "b": ("sim", "b", float),
    "arrival_min": ("sim", "arrival_min", int),
    "arrival_max": ("sim", "arrival_max", int),
    "arrival_rate_min": ("sim", "arrival_rate_min", float),
    "arrival_rate_max": ("sim", "arrival_rate_max", float),
    "service_scale": ("sim", "service_scale", float),
    "transit_scale": ("sim", "transit_scale", float),
    "capacity_min": ("sim", "capacity_min", float),
    "capacity_max": ("sim", "capacity_max", float),
    "cloud_cc": ("sim", "cloud_cc", float),
    "knapsack_resolution": ("sim", "knapsack_resolution", float),
    "subtract_running": ("sim", "subtract_running", _parse_bool),
    "doe_source": ("sim", "doe_source", str),
    "doe_hidden": ("sim", "doe_hidden", int),
    "doe_rows": ("sim", "doe_rows", int),
    "doe_epochs": ("sim", "doe_epochs", int),
    "doe_lr": ("sim", "doe_lr", float),
    "th": ("qos", "th", float),
    "th_rt": ("qos", "th_rt", _parse_opt_float),
    "th_tp": ("qos", "th_tp", _parse_opt_float),
    "w_rt": ("qos", "w_rt", float),
    "w_tp": ("qos", "w_tp", float),
    "p_trig": ("qos", "p_trig", float),
    "min_samples": ("qos", "min_samples", int),
    "window": ("qos", "window", int),
    "bandwidth": ("qos", "bandwidth", _parse_opt_float),
    "kernel": ("qos", "kernel", str),
    "epoch_batch": ("qos", "epoch_batch", int),
    "max_tp": ("qos", "max_tp", float),
    "destination_rule": ("policy", "destination_rule", str),
    "baseline": ("policy", "baseline", str),
    "ceiling": ("policy", "ceiling", float),
}


def _read_config_file(path: Path) -> dict:
    values = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def parse_config(path: str | None = None, overrides: dict | None = None) -> SimConfig:
    """Build a validated SimConfig from a key=value file plus overrides.

    Unknown keys are rejected; out-of-range values raise a
    ConfigurationError naming the key.  Flag overrides win over the file.
    """
    raw: dict = {}
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise ConfigurationError(f"config file not found: {path}")
        raw.update(_read_config_file(p))
    raw.update(overrides or {})

    sections = {"sim": {}, "qos": {}, "policy": {}}
    for key, text in raw.items():
        if key not in CONFIG_KEYS:
            raise ConfigurationError(f"unknown config key {key!r}")
        section, attr, conv = CONFIG_KEYS[key]
        try:
            sections[section][attr] = conv(str(text))
        except ValueError as exc:
            raise ConfigurationError(f"bad value for {key!r}: {exc}") from exc

    try:
        qos = QosConfig(**sections["qos"])
        policy = PolicyConfig(**sections["policy"])
        cfg = SimConfig(qos=qos, policy=policy, **sections["sim"])
        cfg.validate()
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from exc

    if cfg.n_nodes not in NODE_COUNTS:
        print(f"warning: n_nodes={cfg.n_nodes} is outside the usual grid "
              f"{NODE_COUNTS}", file=sys.stderr)
    return cfg


# -- results formatting ------------------------------------------------------

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def write_csv(rows: list[dict], columns: list[str], path: Path) -> None:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(row.get(c)) for c in columns))
    path.write_text("\n".join(lines) + "\n")


def _campaign_row(campaign_id: str, result, ceiling, d_ac) -> dict:
    policy = result.policy
    name = "model" if policy.baseline == BASELINE_NONE else policy.baseline
    return {
        "campaign_id": campaign_id,
        "n_nodes": result.n_nodes,
        "itrs": result.itrs,
        "policy": name,
        "ceiling": ceiling,
        "destination_rule": policy.destination_rule,
        "accuracy": result.accuracy,
        "precision": result.precision,
        "recall": result.recall,
        "f_measure": result.f_measure,
        "avg_cost": result.avg_cost,
        "d_ac": d_ac,
        "offload_pct": result.offload_pct,
        "seed": result.seed,
    }


def run_compare(cfg: SimConfig, node_counts=NODE_COUNTS):
    """Model plus every baseline at both ceilings over the node grid.

    All cells share the master seed, so every policy faces the same task
    streams.  Returns (result rows, wide grid rows shaped like the paper's
    comparison table).
    """
    scorer = build_scorer(cfg)
    rows: list[dict] = []
    grid_rows: list[dict] = []
    for n in node_counts:
        model_cfg = replace(cfg, n_nodes=n,
                            policy=PolicyConfig(destination_rule=cfg.policy.destination_rule))
        model = run_campaign(model_cfg, scorer)
        rows.append(_campaign_row(f"cmp-n{n}-model", model, None, None))
        grid: dict = {"n_nodes": n, "model_ac": model.avg_cost}
        for ceiling in CEILINGS:
            for baseline in BASELINES:
                cell_cfg = replace(cfg, n_nodes=n, policy=PolicyConfig(
                    destination_rule=MIN_LOAD, baseline=baseline, ceiling=ceiling))
                res = run_campaign(cell_cfg, scorer)
                d_ac = None
                if model.avg_cost is not None and res.avg_cost:
                    d_ac = relative_difference(model.avg_cost, res.avg_cost)
                tag = f"cmp-n{n}-{baseline}{int(ceiling * 100)}"
                rows.append(_campaign_row(tag, res, ceiling, d_ac))
                grid[f"{baseline}{int(ceiling * 100)}_ac"] = res.avg_cost
                grid[f"{baseline}{int(ceiling * 100)}_d"] = d_ac
        grid_rows.append(grid)
    return rows, grid_rows


def _write_outputs(out_dir: Path, cfg: SimConfig, rows, grid_rows=None) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    write_csv(rows, RESULT_COLUMNS, out_dir / "results.csv")
    payload = {"config": asdict(cfg), "rows": rows}
    if grid_rows is not None:
        payload["grid"] = grid_rows
        write_csv(grid_rows, GRID_COLUMNS, out_dir / "grid.csv")
    (out_dir / "results.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n")


# -- subcommands -------------------------------------------------------------

def cmd_simulate(cfg: SimConfig, args) -> int:
    result = run_campaign(cfg)
    name = ("model" if cfg.policy.baseline == BASELINE_NONE else cfg.policy.baseline)
    ceiling = None if cfg.policy.baseline == BASELINE_NONE else cfg.policy.ceiling
    rows = [_campaign_row(f"sim-n{cfg.n_nodes}-{name}", result, ceiling, None)]
    _write_outputs(Path(args.out), cfg, rows)
    print(f"simulate: N={cfg.n_nodes} policy={name} "
          f"AC={_fmt(result.avg_cost) or 'n/a'} offload%={result.offload_pct:.2f}")
    return 0


def cmd_compare(cfg: SimConfig, args) -> int:
    rows, grid_rows = run_compare(cfg)
    _write_outputs(Path(args.out), cfg, rows, grid_rows)
    print(f"compare: wrote {len(rows)} campaign rows to {args.out}")
    return 0


def cmd_train_doe(cfg: SimConfig, args) -> int:
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 0xD0E]))
    data = generate_expert_dataset(cfg.doe_rows, rng)
    train_set, held = data.split(0.2)
    net = init_network(rng, hidden=cfg.doe_hidden)
    net = train(net, train_set, epochs=cfg.doe_epochs, lr=cfg.doe_lr, rng=rng)
    mse = evaluate_mse(net, held)
    model_path = Path(args.model or (Path(args.out) / "doe_model.txt"))
    model_path.parent.mkdir(parents=True, exist_ok=True)
    save_network(net, model_path)
    print(f"train-doe: held-out MSE={mse:.6f}, model saved to {model_path}")
    return 0


def cmd_export(cfg: SimConfig, args) -> int:
    out_dir = Path(args.out)
    source = out_dir / "results.json"
    if not source.exists():
        print(f"error: no results found at {source}; "
              "run simulate or compare first", file=sys.stderr)
        return 1
    payload = json.loads(source.read_text())
    write_csv(payload["rows"], RESULT_COLUMNS, out_dir / "results.csv")
    if "grid" in payload:
        write_csv(payload["grid"], GRID_COLUMNS, out_dir / "grid.csv")
    print(f"export: refreshed CSV artifacts in {out_dir}")
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "compare": cmd_compare,
    "train-doe": cmd_train_doe,
    "export": cmd_export,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="edgeqos",
        description="QoS-aware proactive task offloading simulator")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="key = value config file")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one config key (repeatable)")
    parser.add_argument("--out", default="./out", help="output directory")
    parser.add_argument("--model", help="DoE model path (train-doe output)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {}
    for item in args.set:
        if "=" not in item:
            print(f"error: --set expects KEY=VALUE, got {item!r}", file=sys.stderr)
            return 1
        key, _, value = item.partition("=")
        overrides[key.strip()] = value.strip()
    try:
        cfg = parse_config(args.config, overrides)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        return COMMANDS[args.command](cfg, args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failures exit 2 with a message
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
