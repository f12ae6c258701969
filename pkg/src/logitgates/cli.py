"""Command-line interface: grid export, verification suites, training, reports."""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import verify
from .experiments import resolve_config, run_experiment
from .train import NaNLossError


def write_pgm(path, values: np.ndarray):
    """8-bit binary PGM, min-max scaled over the grid."""
    values = np.asarray(values, dtype=np.float64)
    lo, hi = float(values.min()), float(values.max())
    span = hi - lo if hi > lo else 1.0
    pixels = np.round(255.0 * (values - lo) / span).astype(np.uint8)
    with open(path, "wb") as f:
        f.write(f"P5\n{values.shape[1]} {values.shape[0]}\n255\n".encode())
        f.write(pixels.tobytes())


def _cmd_grid(args) -> int:
    try:
        report = verify.grid_compare(args.kind, args.range, args.step,
                                     csv_path=args.out)
    except OSError as exc:
        print(f"grid: cannot write output: {exc}", file=sys.stderr)
        return 1
    if args.pgm:
        from . import activations as A

        axes = -args.range + args.step * np.arange(int(round(2 * args.range / args.step)) + 1)
        x, y = np.meshgrid(axes, axes, indexing="ij")
        exact_fn = {"and": A.and_il, "or": A.or_il, "xnor": A.xnor_il}[args.kind]
        approx_fn = {"and": A.and_ail, "or": A.or_ail, "xnor": A.xnor_ail}[args.kind]
        if args.family == "il":
            surface = exact_fn(x, y)
        elif args.family == "ail":
            surface = approx_fn(x, y)
        else:
            surface = approx_fn(x, y) - exact_fn(x, y)
        try:
            write_pgm(args.pgm, surface)
        except OSError as exc:
            print(f"grid: cannot write PGM: {exc}", file=sys.stderr)
            return 1
    print(f"grid {args.kind}: strict max |approx - exact| = {report.max_abs_diff:.6f} "
          f"at {report.argmax}; off-boundary max = {report.masked_max_abs_diff:.6f}")
    return 0


def _cmd_verify(args) -> int:
    selected = [name for name in ("constants", "gradients", "diff_bound", "bayes")
                if getattr(args, name)]
    if not selected:
        selected = ["constants", "gradients", "diff_bound", "bayes"]
    results = []
    estimates = {}
    if "constants" in selected:
        const_results, estimates = verify.constants_report(n=args.n, seed=args.seed)
        results += const_results
    if "gradients" in selected:
        results += verify.gradients_suite(seed=args.seed)
    if "diff_bound" in selected:
        results += verify.diff_bound_suite()
    if "bayes" in selected:
        results += verify.bayes_suite(seed=args.seed)
    width = max(len(r.name) for r in results)
    ok = True
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        bound = "reported" if r.bound == float("inf") else f"<= {r.bound:.3e}"
        print(f"{status}  {r.name:<{width}}  value={r.value:.6e}  {bound}")
        ok &= r.passed
    print("all checks passed" if ok else "FAILURES present")
    if args.json_out:
        from dataclasses import asdict

        payload = {
            "passed": ok,
            "checks": [asdict(r) for r in results],
            "estimates": {name: asdict(e) for name, e in estimates.items()},
        }
        Path(args.json_out).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    return 0 if ok else 1


def _cmd_train(args) -> int:
    try:
        cfg = resolve_config(args.config)
    except (OSError, ValueError, TypeError, KeyError) as exc:
        print(f"train: bad config {args.config!r}: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        cfg.train.seed = args.seed
    out_dir = args.out_dir or cfg.output_dir or "runs/" + Path(args.config).stem
    try:
        report, _ = run_experiment(cfg, output_dir=out_dir)
    except NaNLossError as exc:
        print(f"train: aborted: {exc}", file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        print(f"train: {exc}", file=sys.stderr)
        return 2
    print(json.dumps(report.final | report.extras, sort_keys=True))
    print(f"artifacts written to {out_dir}")
    return 0


def _metric_sort_key(summary: dict):
    for key in ("val_accuracy", "lattice_accuracy", "val_rmse", "train_accuracy"):
        if key in summary:
            # Accuracy sorts descending; RMSE ascending.
            return -summary[key] if "accuracy" in key else summary[key]
    return 0.0


def _cmd_report(args) -> int:
    rows = []
    candidates = sorted(set(Path(args.in_dir).glob("**/report.json"))
                        | set(Path(args.in_dir).glob("*.json")))
    for path in candidates:
        try:
            payload = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError):
            continue
        if "final" not in payload:
            continue
        summary = dict(payload["final"])
        summary.update(payload.get("extras", {}))
        rows.append((path, summary))
    if not rows:
        print(f"report: no train reports under {args.in_dir}", file=sys.stderr)
        return 2
    rows.sort(key=lambda item: _metric_sort_key(item[1]))
    keys = sorted({k for _, s in rows for k in s if isinstance(s[k], (int, float, str))})
    lines = ["| report | " + " | ".join(keys) + " |",
             "| --- | " + " | ".join("---" for _ in keys) + " |"]
    for path, summary in rows:
        cells = [f"{summary.get(k, '')}" for k in keys]
        lines.append(f"| {path} | " + " | ".join(cells) + " |")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        print(text, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="logitgates",
                                     description="Logit-space Boolean gates: experiments and verification")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("grid", help="export exact/approximate gate surfaces over a grid")
    g.add_argument("--kind", required=True, choices=["and", "or", "xnor"])
    g.add_argument("--family", default="both", choices=["both", "il", "ail"],
                   help="surface for the PGM heatmap (CSV always carries both)")
    g.add_argument("--range", type=float, default=10.0)
    g.add_argument("--step", type=float, default=0.05)
    g.add_argument("--out", required=True, help="CSV output path")
    g.add_argument("--pgm", help="also write a grayscale PGM heatmap")
    g.set_defaults(func=_cmd_grid)

    v = sub.add_parser("verify", help="run verification suites")
    v.add_argument("--constants", action="store_true")
    v.add_argument("--gradients", action="store_true")
    v.add_argument("--diff-bound", dest="diff_bound", action="store_true")
    v.add_argument("--bayes", action="store_true")
    v.add_argument("--n", type=int, default=10_000_000, help="Monte Carlo sample count")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--json-out", dest="json_out", default=None,
                   help="also write checks and Monte Carlo estimates as JSON")
    v.set_defaults(func=_cmd_verify)

    t = sub.add_parser("train", help="run a training experiment from a config")
    t.add_argument("config", help="config JSON path or bundled config name")
    t.add_argument("--seed", type=int, default=None, help="override the config seed")
    t.add_argument("--out-dir", default=None)
    t.set_defaults(func=_cmd_train)

    r = sub.add_parser("report", help="summarize train reports as a markdown table")
    r.add_argument("--in", dest="in_dir", required=True)
    r.add_argument("--out", default=None)
    r.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
