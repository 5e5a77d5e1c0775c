"""Command-line front end.

Subcommands wire the identification pipeline::

    hammid excite    --config cfg.json --output-dir out/
    hammid simulate  --model model.json --inputs a.txt b.txt --output-dir out/
    hammid identify  --config cfg.json --dataset data.csv --output-dir out/
    hammid validate  --model model.json --dataset data.csv --output-dir out/
    hammid preset    --name paper-gtaw --output model.json

Data acquisition is external: ``excite`` produces the input schedule an
experimenter would apply, and ``identify`` consumes whatever dataset is
supplied (recorded or simulated).  Every run writes the fully resolved
configuration next to its outputs, and identical config plus dataset give
byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import copy
import json
import sys
from pathlib import Path

import numpy as np

from . import estimate, persistence, preprocess, structure, validate
from .excitation import AmplitudeGrid, generate_excitation
from .model import Dataset, MimoHammersteinModel, preset_model, simulate_mimo

DEFAULT_CONFIG: dict = {
    "sample_period": 1.0,
    "n_samples": 1070,
    "seed": 1,
    "hold": 1,
    "inputs": [
        {"name": "I_p", "unit": "A", "low": 130.0, "high": 170.0, "step": 2.0,
         "operating_point": 150.0},
        {"name": "V_f", "unit": "cm/s", "low": 4.0, "high": 10.0, "step": 1.0,
         "operating_point": 7.0},
    ],
    "outputs": [
        {"name": "W_b", "unit": "mm"},
        {"name": "H_f", "unit": "mm"},
    ],
    "preprocess": {"median_window": 5, "filter_inputs": False},
    "delay": {"max_lag": 10},
    "structure": {
        "n_max": 6, "m_max": 6, "p_max": 4,
        "plateau_threshold": structure.DEFAULT_PLATEAU_THRESHOLD,
        "convergence_floor": structure.DEFAULT_CONVERGENCE_FLOOR,
    },
    "estimator": {"method": "batch", "alpha_sq": estimate.DEFAULT_ALPHA_SQ},
    "fixed_orders": None,
    "n_train": 1000,
    "validation": {"one_step_ahead": False, "std_ddof": 0},
}


class StageError(RuntimeError):
    """Pipeline failure labeled with the stage it came from."""

    def __init__(self, stage: str, error: Exception):
        super().__init__(f"{stage}: {error}")
        self.stage = stage


def load_config(path: str | None, seed: int | None = None) -> dict:
    """Merge a config file over the defaults; ``seed`` overrides the base seed."""
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if path is not None:
        with open(path) as fh:
            user = json.load(fh)
        for key, value in user.items():
            if isinstance(value, dict) and isinstance(cfg.get(key), dict):
                cfg[key].update(value)
            else:
                cfg[key] = value
    if seed is not None:
        cfg["seed"] = seed
    for idx, spec in enumerate(cfg["inputs"]):
        spec.setdefault("seed", cfg["seed"] + idx)
    return cfg


def _write_resolved_config(cfg: dict, outdir: Path) -> None:
    (outdir / "resolved_config.json").write_text(
        json.dumps(cfg, indent=2, sort_keys=True) + "\n"
    )


def _parse_fixed_orders(raw) -> list[estimate.StructureOrders]:
    orders = []
    for entry in raw:
        orders.append(
            estimate.StructureOrders(
                n=int(entry["n"]),
                channels=tuple(
                    estimate.ChannelOrders(p=int(c["p"]), m=int(c["m"]), d=int(c["d"]))
                    for c in entry["channels"]
                ),
            )
        )
    return orders


# ---------------------------------------------------------------------------
# Commands

def cmd_excite(cfg: dict, outdir: Path) -> list[Path]:
    n = int(cfg["n_samples"])
    if n < 1:
        raise ValueError(f"n_samples must be >= 1, got {n}")
    written = []
    for spec in cfg["inputs"]:
        grid = AmplitudeGrid(low=spec["low"], high=spec["high"], step=spec["step"])
        series = generate_excitation(grid, n, seed=int(spec["seed"]), hold=int(cfg["hold"]))
        path = outdir / f"excitation_{spec['name']}.txt"
        persistence.save_series(path, series, name=spec["name"])
        written.append(path)
    _write_resolved_config(cfg, outdir)
    return written


def cmd_simulate(
    model_path: str,
    input_paths: list[str],
    outdir: Path,
    dataset_out: str | None = None,
    cfg: dict | None = None,
) -> Path:
    model = persistence.load_model(model_path)
    if len(input_paths) != model.n_inputs:
        raise ValueError(
            f"model expects {model.n_inputs} input files, got {len(input_paths)}"
        )
    series = []
    names = []
    for p in input_paths:
        values, name = persistence.load_series(p)
        series.append(values)
        names.append(name)
    lengths = {len(s) for s in series}
    if len(lengths) != 1:
        raise ValueError(f"input series lengths differ: {sorted(lengths)}")
    # inputs arrive at physical scale; the model works on deviations
    deviations = [
        s - model.operating_point.get(name, 0.0) for s, name in zip(series, names)
    ]
    outputs = simulate_mimo(model, np.column_stack(deviations))
    trace = outdir / "simulated_outputs.txt"
    lines = ["# hammid trace v1", "index," + ",".join(model.output_names)]
    for k in range(outputs.shape[0]):
        lines.append(f"{k}," + ",".join(repr(float(v)) for v in outputs[k]))
    trace.write_text("\n".join(lines) + "\n")
    if dataset_out is not None:
        cfg = cfg or load_config(None)
        units = {s["name"]: s.get("unit", "") for s in cfg["inputs"] + cfg.get("outputs", [])}
        data = Dataset(
            sample_period=float(cfg["sample_period"]),
            inputs=np.column_stack(series),
            outputs=outputs,
            input_names=tuple(model.input_names),
            output_names=tuple(model.output_names),
            units={k: v for k, v in units.items() if v},
            operating_point={
                name: model.operating_point[name]
                for name in model.input_names
                if name in model.operating_point
            } | {name: 0.0 for name in model.output_names},
        )
        persistence.save_dataset(dataset_out, data)
    return trace


def run_identification(data: Dataset, cfg: dict):
    """preprocess -> delays -> structure -> estimate -> separate -> validate.

    Returns (model, search results per output, validation report, offsets).
    """
    try:
        pp = preprocess.PreprocessConfig(
            median_window=int(cfg["preprocess"]["median_window"]),
            filter_inputs=bool(cfg["preprocess"]["filter_inputs"]),
        )
        deviations, offsets = preprocess.prepare_dataset(data, pp)
    except Exception as e:
        raise StageError("preprocess", e) from e

    n_train = int(cfg["n_train"])
    try:
        train, test = validate.split_dataset(deviations, n_train)
    except Exception as e:
        raise StageError("split", e) from e

    fixed = cfg.get("fixed_orders")
    searches: list[structure.StructureSearchResult | None] = []
    per_output = []
    if fixed is not None:
        orders_list = _parse_fixed_orders(fixed)
        if len(orders_list) != data.n_outputs:
            raise StageError(
                "structure",
                ValueError(f"fixed_orders describe {len(orders_list)} outputs, dataset has {data.n_outputs}"),
            )
        searches = [None] * data.n_outputs
    else:
        try:
            max_lag = int(cfg["delay"]["max_lag"])
            scfg = cfg["structure"]
            bounds = structure.SearchBounds(
                n_max=int(scfg["n_max"]), m_max=int(scfg["m_max"]), p_max=int(scfg["p_max"])
            )
            orders_list = []
            for s in range(train.n_outputs):
                delays = [
                    est.delay
                    for est in structure.estimate_delays(
                        train.inputs, train.outputs[:, s], max_lag
                    )
                ]
                result = structure.select_structure(
                    train,
                    s,
                    delays,
                    bounds,
                    plateau_threshold=float(scfg["plateau_threshold"]),
                    convergence_floor=float(scfg["convergence_floor"]),
                )
                searches.append(result)
                orders_list.append(result.selected)
        except StageError:
            raise
        except Exception as e:
            raise StageError("structure", e) from e

    try:
        method = cfg["estimator"]["method"]
        for s, orders in enumerate(orders_list):
            prob = estimate.build_regressor(train, orders, s)
            if method == "rls":
                theta = estimate.run_rls(prob, float(cfg["estimator"]["alpha_sq"])).theta
            elif method == "batch":
                theta = estimate.batch_ls(prob).theta
            else:
                raise ValueError(f"unknown estimator method {method!r}")
            per_output.append((orders, estimate.separate_parameters(theta, orders)))
    except StageError:
        raise
    except Exception as e:
        raise StageError("estimate", e) from e

    operating_point = {
        name: offsets[name] for name in data.input_names + data.output_names
    }
    model = estimate.assemble_model(
        per_output,
        data.input_names,
        data.output_names,
        operating_point=operating_point,
        metadata={"estimator": method, "n_train": n_train},
    )

    try:
        vcfg = cfg["validation"]
        report = validate.evaluate(
            model,
            test,
            one_step_ahead=bool(vcfg["one_step_ahead"]),
            std_ddof=int(vcfg["std_ddof"]),
        )
    except Exception as e:
        raise StageError("validate", e) from e
    return model, searches, report, offsets


def cmd_identify(cfg: dict, dataset_path: str, outdir: Path) -> Path:
    try:
        data = persistence.load_dataset(dataset_path)
    except Exception as e:
        raise StageError("load", e) from e
    model, searches, report, _ = run_identification(data, cfg)
    model_path = outdir / "model.json"
    persistence.save_model(model_path, model)
    report_lines = []
    for s, search in enumerate(searches):
        if search is None:
            report_lines.append(
                f"structure for {data.output_names[s]}: fixed by configuration\n"
            )
        else:
            report_lines.append(
                structure.format_search_report(search, data.output_names[s])
            )
    (outdir / "structure_report.txt").write_text("\n".join(report_lines))
    (outdir / "validation_report.txt").write_text(
        validate.format_validation_report(report)
    )
    for s, name in enumerate(data.output_names):
        (outdir / f"validation_trace_{name}.txt").write_text(
            validate.format_trace(report, s)
        )
    _write_resolved_config(cfg, outdir)
    return model_path


def cmd_validate(
    model_path: str,
    dataset_path: str,
    outdir: Path,
    one_step_ahead: bool = False,
    std_ddof: int = 0,
) -> Path:
    model = persistence.load_model(model_path)
    data = persistence.load_dataset(dataset_path)
    # deviation scale, without median filtering: operating points where
    # declared, means otherwise
    deviations, _ = preprocess.prepare_dataset(
        data, preprocess.PreprocessConfig(median_window=1)
    )
    report = validate.evaluate(
        model, deviations, one_step_ahead=one_step_ahead, std_ddof=std_ddof
    )
    out = outdir / "validation_report.txt"
    out.write_text(validate.format_validation_report(report))
    for s, name in enumerate(data.output_names):
        (outdir / f"validation_trace_{name}.txt").write_text(
            validate.format_trace(report, s)
        )
    return out


def cmd_preset(name: str, out_path: str) -> MimoHammersteinModel:
    model = preset_model(name)
    persistence.save_model(out_path, model)
    return model


# ---------------------------------------------------------------------------
# Argument parsing

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hammid",
        description="Multivariable Hammerstein model identification",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON config file (defaults are documented)")
        p.add_argument("--seed", type=int, help="override the base excitation seed")
        p.add_argument("--output-dir", default=".", help="directory for artifacts")

    p = sub.add_parser("excite", help="generate pseudo-random excitation schedules")
    add_common(p)

    p = sub.add_parser("identify", help="identify a model from a dataset file")
    add_common(p)
    p.add_argument("--dataset", required=True, help="dataset file to identify from")

    p = sub.add_parser("simulate", help="free-run a model file on input series files")
    add_common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--inputs", nargs="+", required=True, help="one series file per input")
    p.add_argument("--dataset-out", help="also write a ready-to-identify dataset file")

    p = sub.add_parser("validate", help="evaluate a model file against a dataset")
    add_common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--one-step-ahead", action="store_true",
                   help="predict from measured past outputs instead of free-run")

    p = sub.add_parser("preset", help="write a built-in model file")
    p.add_argument("--name", default="paper-gtaw")
    p.add_argument("--output", default="model.json")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "preset":
            cmd_preset(args.name, args.output)
            return 0
        outdir = Path(args.output_dir)
        outdir.mkdir(parents=True, exist_ok=True)
        cfg = load_config(args.config, args.seed)
        if args.command == "excite":
            cmd_excite(cfg, outdir)
        elif args.command == "identify":
            cmd_identify(cfg, args.dataset, outdir)
        elif args.command == "simulate":
            cmd_simulate(args.model, args.inputs, outdir, args.dataset_out, cfg)
        elif args.command == "validate":
            cmd_validate(
                args.model,
                args.dataset,
                outdir,
                one_step_ahead=args.one_step_ahead,
                std_ddof=int(cfg["validation"]["std_ddof"]),
            )
        return 0
    except Exception as e:  # noqa: BLE001 - single reporting point for the CLI
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
