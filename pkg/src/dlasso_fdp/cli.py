"""Command-line front end.

Subcommands: ``select`` (rank and select on user CSV data), ``simulate``
(write a seeded instance as CSV/JSON), ``experiment`` (replicated
benchmark with report files), ``rank`` (statistic ranking, with an
FDP-TPP curve when ground truth is supplied). Outputs are deterministic
given the configuration; failures print a machine-readable JSON object on
stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict

import numpy as np

from . import io
from .bench import MethodOptions, run_experiment, write_report
from .dlasso import BETA_MULT, KAPPA_DEFAULT, SIGMA_MULT, dlasso_pipeline
from .errors import DLassoError, SchemaError
from .inference import fdp_tpp_curve, rank_by_z, select_bh, select_fdp, select_fwer
from .simulate import SimConfig, gen_dataset, replication_rng

SIM_FIELDS = {
    "p", "n", "s0", "beta1", "seed", "sigma", "edge_prob", "magnitude_range",
    "sign_mode", "spd_eps", "reps", "alpha", "unit_diagonal",
}
REQUIRED_FIELDS = ("p", "n", "s0", "beta1", "seed")
METHOD_FIELDS = {
    "kappa", "sigma_mode", "beta_mult", "sigma_mult", "t_step", "t_grid",
    "path_grid_size", "histogram_t",
}


def _load_config(path: str, allow_method_fields: bool):
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(raw, dict):
        raise SchemaError(f"{path}: top-level value must be an object")
    allowed = SIM_FIELDS | (METHOD_FIELDS if allow_method_fields else set())
    for key in raw:
        if key not in allowed:
            raise SchemaError(f"{path}: unknown field {key!r}")
    for key in REQUIRED_FIELDS:
        if key not in raw:
            raise SchemaError(f"{path}: missing required field {key!r}")
    sim_kwargs = {k: v for k, v in raw.items() if k in SIM_FIELDS}
    if "magnitude_range" in sim_kwargs:
        sim_kwargs["magnitude_range"] = tuple(sim_kwargs["magnitude_range"])
    method_kwargs = {k: v for k, v in raw.items() if k in METHOD_FIELDS}
    if "t_grid" in method_kwargs:
        method_kwargs["t_grid"] = tuple(float(t) for t in method_kwargs["t_grid"])
    if "histogram_t" in method_kwargs:
        method_kwargs["histogram_t"] = tuple(
            float(t) for t in method_kwargs["histogram_t"]
        )
    return sim_kwargs, method_kwargs


def _parse_sigma_flag(text: str):
    """--sigma accepts 'estimate' or 'known:<value>'."""
    if text == "estimate":
        return "estimate", None
    if text.startswith("known:"):
        try:
            return "known", float(text.split(":", 1)[1])
        except ValueError as exc:
            raise SchemaError(f"bad --sigma value {text!r}") from exc
    raise SchemaError(f"--sigma must be 'estimate' or 'known:<v>', got {text!r}")


def _parse_t_grid(text: str) -> tuple[float, ...]:
    """--t-grid lo:hi:step, endpoints inclusive up to rounding."""
    try:
        lo, hi, step = (float(v) for v in text.split(":"))
    except ValueError as exc:
        raise SchemaError(f"--t-grid must be lo:hi:step, got {text!r}") from exc
    if step <= 0 or hi < lo:
        raise SchemaError(f"--t-grid must have lo <= hi and step > 0, got {text!r}")
    k = int(np.floor((hi - lo) / step + 1e-9))
    return tuple(round(lo + i * step, 12) for i in range(k + 1))


def _selection_payload(sel, sigma_used: float) -> dict:
    return {
        "method": sel.method,
        "t_alpha": sel.threshold,
        "selected": [int(j) + 1 for j in sel.selected],
        "fdp_hat": sel.fdp_hat_at_threshold,
        "alpha": sel.alpha,
        "sigma_used": sigma_used,
    }


def _write_json(payload: dict, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def cmd_select(args) -> list[str]:
    data = io.read_dataset(args.x_csv, args.y_csv)
    mode, sigma = _parse_sigma_flag(args.sigma)
    result, precision, fit = dlasso_pipeline(
        data, kappa=args.kappa, sigma_mode=mode, sigma=sigma,
    )
    sel = select_fdp(result.z, args.alpha)
    payload = _selection_payload(sel, result.sigma_used)
    payload["z"] = [float(v) for v in result.z]
    payload["provenance"] = {
        "kappa": args.kappa,
        "sigma_mode": mode,
        "beta_mult": BETA_MULT,
        "sigma_mult": SIGMA_MULT,
        "fwer_method": "holm",
        "fwer_caveat": True,
        "n": data.n,
        "p": data.p,
    }
    baselines = {}
    if args.bh:
        baselines["dlasso_bh"] = _selection_payload(
            select_bh(result.z, args.alpha), result.sigma_used
        )
    if args.fwer:
        baselines["dlasso_fwer"] = _selection_payload(
            select_fwer(result.z, args.alpha), result.sigma_used
        )
    if baselines:
        payload["baselines"] = baselines
    io.ensure_dir(args.out)
    path = f"{args.out}/selection.json"
    _write_json(payload, path)
    return [path]


def cmd_simulate(args) -> list[str]:
    sim_kwargs, _ = _load_config(args.config, allow_method_fields=False)
    if args.seed is not None:
        sim_kwargs["seed"] = args.seed
    cfg = SimConfig(**sim_kwargs)
    data, truth = gen_dataset(cfg, replication_rng(cfg.seed, 0))
    io.ensure_dir(args.out)
    paths = [f"{args.out}/X.csv", f"{args.out}/y.csv", f"{args.out}/truth.json"]
    io.write_x_csv(data.X, paths[0])
    io.write_y_csv(data.y, paths[1])
    io.write_truth_json(truth, cfg.seed, paths[2])
    return paths


def cmd_experiment(args) -> list[str]:
    sim_kwargs, method_kwargs = _load_config(args.config, allow_method_fields=True)
    for name in ("seed", "reps", "alpha"):
        val = getattr(args, name)
        if val is not None:
            sim_kwargs[name] = val
    if args.kappa is not None:
        method_kwargs["kappa"] = args.kappa
    if args.sigma is not None:
        mode, sigma = _parse_sigma_flag(args.sigma)
        method_kwargs["sigma_mode"] = mode
        if mode == "known" and sigma is not None and sigma != sim_kwargs.get("sigma", 1.0):
            raise SchemaError(
                "--sigma known:<v> must match the config's sigma for experiments"
            )
    if args.t_grid is not None:
        method_kwargs["t_grid"] = _parse_t_grid(args.t_grid)
    cfg = SimConfig(**sim_kwargs)
    options = MethodOptions(**method_kwargs)
    report = run_experiment(cfg, options)
    return write_report(report, args.out)


def cmd_rank(args) -> list[str]:
    data = io.read_dataset(args.x_csv, args.y_csv)
    mode, sigma = _parse_sigma_flag(args.sigma)
    result, _, _ = dlasso_pipeline(data, kappa=args.kappa, sigma_mode=mode, sigma=sigma)
    ranking = rank_by_z(result.z)
    payload = {
        "ranking": [int(j) + 1 for j in ranking],
        "z": [float(v) for v in result.z],
        "sigma_used": result.sigma_used,
    }
    if args.truth is not None:
        support = io.read_truth_support(args.truth)

        class _Truth:
            pass

        truth = _Truth()
        truth.support = support
        curve = fdp_tpp_curve(ranking, truth)
        payload["curve"] = [
            {"tpp_level": pt.tpp_level, "fdp": pt.fdp} for pt in curve
        ]
    io.ensure_dir(args.out)
    path = f"{args.out}/ranking.json"
    _write_json(payload, path)
    return [path]


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="dlasso-fdp",
        description="De-sparsified Lasso ranking and selection with FDP control",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, with_alpha=True):
        if with_alpha:
            sp.add_argument("--alpha", type=float, default=0.1)
        sp.add_argument("--kappa", type=float, default=KAPPA_DEFAULT)
        sp.add_argument("--sigma", default="estimate",
                        help="estimate | known:<value>")
        sp.add_argument("--out", default=".", help="output directory")

    sp = sub.add_parser("select", help="FDP-controlled selection on CSV data")
    sp.add_argument("x_csv")
    sp.add_argument("y_csv")
    common(sp)
    sp.add_argument("--bh", action="store_true", help="add BH baseline section")
    sp.add_argument("--fwer", action="store_true", help="add Holm baseline section")
    sp.set_defaults(fn=cmd_select)

    sp = sub.add_parser("simulate", help="generate a seeded instance")
    sp.add_argument("config", help="JSON config file")
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--out", default=".")
    sp.set_defaults(fn=cmd_simulate)

    sp = sub.add_parser("experiment", help="replicated benchmark with report files")
    sp.add_argument("config", help="JSON config file")
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--reps", type=int, default=None)
    sp.add_argument("--alpha", type=float, default=None)
    sp.add_argument("--kappa", type=float, default=None)
    sp.add_argument("--sigma", default=None, help="estimate | known:<value>")
    sp.add_argument("--t-grid", dest="t_grid", default=None, help="lo:hi:step")
    sp.add_argument("--out", default=".")
    sp.set_defaults(fn=cmd_experiment)

    sp = sub.add_parser("rank", help="statistic ranking (and curve given truth)")
    sp.add_argument("x_csv")
    sp.add_argument("y_csv")
    sp.add_argument("--truth", default=None, help="truth JSON for the FDP-TPP curve")
    common(sp, with_alpha=False)
    sp.set_defaults(fn=cmd_rank)
    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        written = args.fn(args)
    except DLassoError as exc:
        json.dump(
            {"error": type(exc).__name__, "message": str(exc)},
            sys.stderr,
        )
        sys.stderr.write("\n")
        return 1
    except OSError as exc:
        json.dump({"error": "OSError", "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
