"""Command-line front end: dataset generation, partitioning, benchmark
runs, parameter sweeps, separation-guarantee checks, and evaluation.

All artifacts are CSV.  A run config is a flat ``key=value`` text file
whose entries mirror the CLI flags; flags given on the command line
override file entries.  Results append to a single CSV whose row order is
deterministic for a fixed config (sorted by seed, then axis value), so two
identical invocations produce identical files up to the timestamp column.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import baselines
from .data import (
    Dataset,
    SbmSpec,
    generate_sbm,
    load_centroids,
    load_csv,
    load_partition,
    partition_dirichlet,
    partition_iid,
    rng_from,
    save_centroids,
    save_csv,
    save_partition,
)
from .metrics import EvalReport, append_reports, evaluate
from .pipeline import FecaConfig, parallel_map, run_centralized, run_feca, run_feca_on_subsets
from .presets import (
    PRESET_NAMES,
    SBM_THM_ETA,
    SBM_THM_LAMBDA,
    equilateral_centers,
    make_dataset,
    sbm_thm_preset,
)
from .radius import save_payload


class UsageError(ValueError):
    """Bad flags, config entries, or input files."""


# ---------------------------------------------------------------------------
# config file + common plumbing


def read_config_file(path) -> dict[str, str]:
    """Flat key=value lines; blank lines and #-comments ignored."""
    entries: dict[str, str] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"{path}: line {lineno}: expected key=value, got {line!r}")
            key, value = line.split("=", 1)
            entries[key.strip()] = value.strip()
    return entries


def apply_config_defaults(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    """Fill unset flags from the config file, if one was given."""
    if not getattr(args, "config", None):
        return
    entries = read_config_file(args.config)
    for key, value in entries.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            raise UsageError(f"{args.config}: unknown config key {key!r}")
        if parser.get_default(attr) == getattr(args, attr):
            setattr(args, attr, value)


def parse_seeds(value) -> list[int]:
    if isinstance(value, list):
        return value
    try:
        seeds = [int(v) for v in str(value).split(",") if v.strip() != ""]
    except ValueError:
        raise UsageError(f"bad seeds list {value!r}; expected comma-separated integers") from None
    if not seeds:
        raise UsageError("seeds list is empty")
    return seeds


def parse_values(value) -> list[float]:
    try:
        values = [float(v) for v in str(value).split(",") if v.strip() != ""]
    except ValueError:
        raise UsageError(f"bad values list {value!r}") from None
    if not values:
        raise UsageError("values list is empty")
    return values


def parse_partition_spec(spec: str):
    """Return (kind, alpha) from 'iid' or 'dirichlet:<alpha>'."""
    if spec == "iid":
        return "iid", None
    if spec.startswith("dirichlet"):
        try:
            _, alpha_text = spec.split(":", 1)
            alpha = float(alpha_text)
        except ValueError:
            raise UsageError(f"bad partition spec {spec!r}; use dirichlet:<alpha>") from None
        if alpha <= 0:
            raise UsageError("dirichlet alpha must be > 0")
        return "dirichlet", alpha
    raise UsageError(f"unknown partition scheme {spec!r}; use iid or dirichlet:<alpha>")


def load_dataset(args) -> Dataset:
    if getattr(args, "preset", None):
        return make_dataset(args.preset, seed=args.data_seed)
    if getattr(args, "data", None):
        dataset = load_csv(args.data)
        if getattr(args, "centers", None):
            centers = load_centroids(args.centers)
            dataset = Dataset(dataset.points, labels=dataset.labels, true_centers=centers)
        return dataset
    raise UsageError("no dataset: pass --preset or --data")


def make_plan(dataset: Dataset, spec: str, clients: int, seed: int):
    kind, alpha = parse_partition_spec(spec)
    if kind == "iid":
        return partition_iid(dataset, clients, seed)
    return partition_dirichlet(dataset, clients, alpha, seed)


METHODS = ("feca", "centralized", "m_avg", "k_fed", "ffcm_v1", "ffcm_v2")


def run_method(dataset: Dataset, plan, method: str, seed: int, args):
    """Dispatch one method run; returns (centroids, feca_run_or_None)."""
    k = args.k
    if method == "feca":
        config = FecaConfig(
            k=k,
            client_k=args.client_k,
            radius_variant=args.radius_variant,
            remove_one_fit_many=not args.no_remove_one_fit_many,
            seed=seed,
            init=args.init,
        )
        run = run_feca(dataset, plan, config)
        return run.final_centroids, run
    if method == "centralized":
        return run_centralized(dataset, k, seed, init=args.init).centroids, None
    if method == "m_avg":
        return baselines.run_match_average(dataset, plan, k, seed), None
    if method == "k_fed":
        k_prime = args.k_prime if args.k_prime is not None else max(1, int(np.sqrt(k)))
        return baselines.k_fed(dataset, plan, k, k_prime, seed), None
    if method in ("ffcm_v1", "ffcm_v2"):
        variant = method[-2:]
        return (
            baselines.ffcm(
                dataset, plan, k, rounds=args.rounds, variant=variant,
                fuzzifier=args.fuzzifier, seed=seed,
            ),
            None,
        )
    raise UsageError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")


def method_metadata(args, method: str) -> dict:
    meta = {
        "method": method,
        "dataset": args.preset or args.data,
        "partition": args.partition,
        "clients": args.clients,
        "k": args.k,
        "init": args.init,
    }
    if method == "feca":
        meta["client_k"] = args.client_k if args.client_k is not None else args.k
        meta["radius_variant"] = args.radius_variant
        meta["remove_one_fit_many"] = not args.no_remove_one_fit_many
    if method == "k_fed":
        meta["k_prime"] = args.k_prime if args.k_prime is not None else max(1, int(np.sqrt(args.k)))
    if method.startswith("ffcm"):
        meta["rounds"] = args.rounds
        meta["fuzzifier"] = args.fuzzifier
    return meta


# ---------------------------------------------------------------------------
# plot-data sinks (long-format CSVs for external plotting)


class PlotDataWriter:
    def __init__(self, out_dir: str, scenario: str):
        self.out_dir = out_dir
        self.scenario = scenario
        self.l2_rows: list[list] = []
        self.centroid_rows: list[list] = []
        self.sigma_rows: list[list] = []

    def add_run(self, method, seed, report, centroids, true_centers, pairs):
        self.l2_rows.append([self.scenario, method, seed, report.matched_l2])
        for c in np.atleast_2d(centroids):
            self.centroid_rows.append([method, seed, "recovered"] + [repr(v) for v in c])
        if true_centers is not None and seed == 0:
            for c in np.atleast_2d(true_centers):
                self.centroid_rows.append([method, seed, "true"] + [repr(v) for v in c])
        if pairs is not None and true_centers is not None:
            from .metrics import sigma_diagnostic

            for i, s in enumerate(sigma_diagnostic(pairs, true_centers)):
                self.sigma_rows.append([self.scenario, method, seed, i, repr(float(s))])

    def flush(self):
        import csv as _csv

        os.makedirs(self.out_dir, exist_ok=True)
        with open(os.path.join(self.out_dir, "plot_l2.csv"), "w", newline="") as fh:
            w = _csv.writer(fh)
            w.writerow(["scenario", "method", "seed", "matched_l2"])
            w.writerows(self.l2_rows)
        if self.centroid_rows:
            dim = len(self.centroid_rows[0]) - 3
            with open(os.path.join(self.out_dir, "plot_centroids.csv"), "w", newline="") as fh:
                w = _csv.writer(fh)
                w.writerow(["method", "seed", "kind"] + [f"x{j}" for j in range(dim)])
                w.writerows(self.centroid_rows)
        with open(os.path.join(self.out_dir, "plot_sigma.csv"), "w", newline="") as fh:
            w = _csv.writer(fh)
            w.writerow(["scenario", "method", "seed", "pair_index", "sigma"])
            w.writerows(self.sigma_rows)


# ---------------------------------------------------------------------------
# subcommands


def cmd_generate(args) -> int:
    if args.sbm_centers:
        centers = load_centroids(args.sbm_centers)
        spec = SbmSpec(centers, args.radius, args.points_per_component or 100)
        dataset = generate_sbm(spec, args.seed)
    elif args.preset:
        dataset = make_dataset(args.preset, seed=args.seed,
                               points_per_component=args.points_per_component)
    else:
        raise UsageError("pass --preset or --sbm-centers")
    save_csv(dataset, args.out)
    if args.centers_out:
        save_centroids(dataset.true_centers, args.centers_out)
    print(f"wrote {dataset.n} points ({dataset.dim}-D) to {args.out}")
    return 0


def cmd_partition(args) -> int:
    dataset = load_dataset(args)
    plan = make_plan(dataset, args.partition, args.clients, args.seed)
    save_partition(plan, args.out)
    sizes = plan.client_sizes()
    print(f"wrote plan for {plan.n_clients} clients (sizes {sizes.min()}..{sizes.max()}) to {args.out}")
    return 0


def _write_feca_artifacts(run, seed_dir: str) -> None:
    os.makedirs(seed_dir, exist_ok=True)
    save_centroids(run.final_centroids, os.path.join(seed_dir, "final_centroids.csv"))
    for m, payload in enumerate(run.payloads):
        if payload:
            save_payload(payload, os.path.join(seed_dir, f"client{m}_payload.csv"))
    import csv as _csv

    with open(os.path.join(seed_dir, "messages.csv"), "w", newline="") as fh:
        w = _csv.writer(fh)
        w.writerow(["sender", "receiver", "n_items"])
        for msg in run.messages:
            w.writerow([msg.sender, msg.receiver, msg.n_items])


def cmd_run(args) -> int:
    dataset = load_dataset(args)
    seeds = sorted(parse_seeds(args.seeds))
    if args.method not in METHODS:
        raise UsageError(f"unknown method {args.method!r}; choose from {', '.join(METHODS)}")
    os.makedirs(args.out_dir, exist_ok=True)
    results_path = args.results or os.path.join(args.out_dir, "results.csv")
    plot = PlotDataWriter(args.out_dir, args.partition) if args.emit_plot_data else None

    def one_seed(seed: int):
        plan = make_plan(dataset, args.partition, args.clients, seed)
        centroids, run = run_method(dataset, plan, args.method, seed, args)
        report = evaluate(
            dataset, centroids, args.method, seed,
            pairs=run.pooled_pairs if run is not None else None,
            metadata=method_metadata(args, args.method),
        )
        return centroids, run, report

    for seed, (centroids, run, report) in zip(seeds, parallel_map(one_seed, seeds)):
        seed_dir = os.path.join(args.out_dir, f"seed{seed}")
        if run is not None:
            _write_feca_artifacts(run, seed_dir)
        else:
            os.makedirs(seed_dir, exist_ok=True)
            save_centroids(centroids, os.path.join(seed_dir, "final_centroids.csv"))
        append_reports([report], results_path)
        if plot is not None:
            plot.add_run(args.method, seed, report, centroids, dataset.true_centers,
                         run.pooled_pairs if run is not None else None)
        summary = ", ".join(
            f"{name}={getattr(report, name):.4g}"
            for name in ("matched_l2", "purity", "nmi")
            if getattr(report, name) is not None
        )
        print(f"seed {seed}: {summary}")
    if plot is not None:
        plot.flush()
    print(f"results appended to {results_path}")
    return 0


def _fraction_subsets(dataset: Dataset, clients: int, fraction: float, seed: int):
    """Independent per-client samples of a fixed dataset fraction."""
    n_each = max(1, int(round(fraction * dataset.n)))
    subsets = []
    for m in range(clients):
        rng = rng_from(seed, 4, m)
        idx = rng.choice(dataset.n, size=min(n_each, dataset.n), replace=False)
        subsets.append(dataset.points[idx])
    return subsets


def cmd_sweep(args) -> int:
    dataset = load_dataset(args)
    seeds = sorted(parse_seeds(args.seeds))
    values = parse_values(args.values)
    if args.axis not in ("clients", "alpha", "k_prime", "k"):
        raise UsageError(f"unknown sweep axis {args.axis!r}")
    if args.method not in METHODS:
        raise UsageError(f"unknown method {args.method!r}; choose from {', '.join(METHODS)}")
    if args.axis == "clients" and args.method != "feca":
        raise UsageError("the clients axis sweeps the one-shot pipeline; use --method feca")
    os.makedirs(args.out_dir, exist_ok=True)
    results_path = args.results or os.path.join(args.out_dir, "results.csv")

    def one_cell(cell):
        seed, value = cell
        meta = method_metadata(args, args.method)
        meta["axis"] = args.axis
        meta["axis_value"] = value
        if args.axis == "clients":
            clients = int(value)
            subsets = _fraction_subsets(dataset, clients, args.client_fraction, seed)
            if clients == 1:
                # a single client is just one solver on its own sample
                from .kmeans import lloyd

                centroids = lloyd(subsets[0], args.k, rng=rng_from(seed), init=args.init).centroids
            else:
                config = FecaConfig(
                    k=args.k, client_k=args.client_k, radius_variant=args.radius_variant,
                    remove_one_fit_many=not args.no_remove_one_fit_many, seed=seed,
                    init=args.init,
                )
                centroids = run_feca_on_subsets(subsets, config).final_centroids
            meta["client_fraction"] = args.client_fraction
            return evaluate(dataset, centroids, args.method, seed, metadata=meta)
        if args.axis == "alpha":
            plan = partition_dirichlet(dataset, args.clients, float(value), seed)
            centroids, run = run_method(dataset, plan, args.method, seed, args)
        elif args.axis == "k_prime":
            plan = make_plan(dataset, args.partition, args.clients, seed)
            patched = _override(args, k_prime=int(value), client_k=int(value))
            centroids, run = run_method(dataset, plan, args.method, seed, patched)
        else:  # k axis
            plan = make_plan(dataset, args.partition, args.clients, seed)
            patched = _override(args, k=int(value))
            centroids, run = run_method(dataset, plan, args.method, seed, patched)
        return evaluate(
            dataset, centroids, args.method, seed,
            pairs=run.pooled_pairs if run is not None else None, metadata=meta,
        )

    cells = [(seed, value) for seed in seeds for value in sorted(values)]
    for report in parallel_map(one_cell, cells):
        append_reports([report], results_path)
    print(f"wrote {len(cells)} rows to {results_path}")
    return 0


def _override(args, **kwargs) -> argparse.Namespace:
    patched = argparse.Namespace(**vars(args))
    for key, value in kwargs.items():
        setattr(patched, key, value)
    return patched


def separation_violation(spec: SbmSpec, lam: float, eta: float, k: int) -> str | None:
    """Name the first violated separation inequality, or None if both hold."""
    d_max = spec.max_center_distance
    d_min = spec.min_center_distance
    r = spec.radius
    need_max = 4.0 * lam**2 * k**4 * r
    if d_max < need_max:
        return (
            f"max center distance {d_max:g} < 4*lambda^2*k^4*r = {need_max:g}"
        )
    need_min = 10.0 * eta * lam * k**2 * np.sqrt(r * d_max)
    if d_min < need_min:
        return (
            f"min center distance {d_min:g} < 10*eta*lambda*k^2*sqrt(r*max_distance) = {need_min:g}"
        )
    return None


def theorem_error_bound(eta: float, min_center_distance: float) -> float:
    """Guaranteed distance bound for recovered centroids: (4/(5*eta))*gap."""
    return 4.0 / (5.0 * eta) * min_center_distance


def cmd_theorem_check(args) -> int:
    if args.sbm_centers:
        centers = load_centroids(args.sbm_centers)
        spec = SbmSpec(centers, args.radius, args.points_per_component)
    elif args.k == 3 and args.separation:
        spec = SbmSpec(equilateral_centers(args.separation), args.radius,
                       args.points_per_component)
    else:
        spec = sbm_thm_preset(args.points_per_component)
    violation = separation_violation(spec, args.lam, args.eta, spec.n_components)
    if violation:
        print(f"separation precondition violated: {violation}", file=sys.stderr)
        return 2
    bound = theorem_error_bound(args.eta, spec.min_center_distance)
    tight = 10.0 * spec.radius
    seeds = parse_seeds(args.seeds)
    dataset = generate_sbm(spec, args.data_seed)
    all_ok, tight_ok = True, True
    for seed in seeds:
        plan = partition_iid(dataset, args.clients, seed)
        config = FecaConfig(k=spec.n_components, radius_variant="theoretical", seed=seed)
        run = run_feca(dataset, plan, config)
        diff = run.final_centroids[:, None, :] - dataset.true_centers[None, :, :]
        err = float(np.sqrt((diff**2).sum(axis=2)).min(axis=1).max())
        ok = err <= bound
        all_ok &= ok
        tight_ok &= err <= tight
        print(f"seed {seed}: max centroid error {err:.4g} "
              f"{'<=' if ok else '>'} bound {bound:.4g} -> {'pass' if ok else 'FAIL'}"
              f" (tight guard {tight:.4g}: {'pass' if err <= tight else 'FAIL'})")
    print(f"theorem check: {'PASS' if all_ok else 'FAIL'}; "
          f"tight guard: {'PASS' if tight_ok else 'FAIL'}")
    return 0 if all_ok else 1


def cmd_eval(args) -> int:
    dataset = load_dataset(args)
    recovered = load_centroids(args.recovered)
    report = evaluate(dataset, recovered, args.method, args.seed,
                      metadata={"recovered": args.recovered})
    append_reports([report], args.results)
    print(f"appended evaluation of {args.recovered} to {args.results}")
    return 0


# ---------------------------------------------------------------------------
# argument wiring


def _add_dataset_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--preset", choices=PRESET_NAMES, default=None)
    p.add_argument("--data", default=None, help="dataset CSV path")
    p.add_argument("--centers", default=None, help="true-centers CSV for --data")
    p.add_argument("--data-seed", type=int, default=0, help="generation seed for presets")


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None, help="flat key=value config file")
    _add_dataset_flags(p)
    p.add_argument("--partition", default="iid", help="iid or dirichlet:<alpha>")
    p.add_argument("--clients", type=int, default=10)
    p.add_argument("--method", default="feca")
    p.add_argument("--k", type=int, default=15)
    p.add_argument("--client-k", type=int, default=None)
    p.add_argument("--k-prime", type=int, default=None, help="per-client k for k_fed")
    p.add_argument("--rounds", type=int, default=1, help="communication rounds for ffcm")
    p.add_argument("--fuzzifier", type=float, default=2.0)
    p.add_argument("--radius-variant", choices=("empirical", "theoretical"),
                   default="empirical")
    p.add_argument("--no-remove-one-fit-many", action="store_true",
                   help="ablation: ship unrefined solutions")
    p.add_argument("--init", choices=("kmeans++", "uniform"), default="kmeans++")
    p.add_argument("--seeds", default="0", help="comma-separated seed list")
    p.add_argument("--out-dir", default="runs")
    p.add_argument("--results", default=None, help="results CSV (default <out-dir>/results.csv)")
    p.add_argument("--emit-plot-data", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fedkmeans",
                                     description="one-shot federated k-means toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic dataset CSV")
    p.add_argument("--preset", choices=PRESET_NAMES, default=None)
    p.add_argument("--sbm-centers", default=None, help="centers CSV for a custom ball dataset")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--points-per-component", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--centers-out", default=None)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("partition", help="write a point-to-client plan CSV")
    _add_dataset_flags(p)
    p.add_argument("--partition", default="iid")
    p.add_argument("--clients", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("run", help="run one method over a list of seeds")
    _add_run_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="cross a parameter axis with the seed list")
    _add_run_flags(p)
    p.add_argument("--axis", required=True, choices=("clients", "alpha", "k_prime", "k"))
    p.add_argument("--values", required=True, help="comma-separated axis values")
    p.add_argument("--client-fraction", type=float, default=0.05,
                   help="per-client sample fraction for the clients axis")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("theorem-check", help="verify the separation-based recovery guarantee")
    p.add_argument("--sbm-centers", default=None)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--separation", type=float, default=None,
                   help="mutual center distance for the default 3-center layout")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--points-per-component", type=int, default=None)
    p.add_argument("--lam", type=float, default=SBM_THM_LAMBDA)
    p.add_argument("--eta", type=float, default=SBM_THM_ETA)
    p.add_argument("--clients", type=int, default=10)
    p.add_argument("--seeds", default="0,1,2,3,4,5,6,7,8,9")
    p.add_argument("--data-seed", type=int, default=0)
    p.set_defaults(func=cmd_theorem_check)

    p = sub.add_parser("eval", help="evaluate an existing centroid CSV")
    _add_dataset_flags(p)
    p.add_argument("--recovered", required=True)
    p.add_argument("--method", default="external")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--results", required=True)
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if hasattr(args, "config"):
            apply_config_defaults(args, parser)
            if hasattr(args, "seeds"):
                args.seeds = parse_seeds(args.seeds)
            for attr in ("clients", "k", "rounds"):
                if hasattr(args, attr) and isinstance(getattr(args, attr), str):
                    setattr(args, attr, int(getattr(args, attr)))
            for attr in ("fuzzifier", "client_fraction"):
                if hasattr(args, attr) and isinstance(getattr(args, attr), str):
                    setattr(args, attr, float(getattr(args, attr)))
            for attr in ("client_k", "k_prime"):
                if hasattr(args, attr) and isinstance(getattr(args, attr), str):
                    setattr(args, attr, int(getattr(args, attr)))
            if hasattr(args, "no_remove_one_fit_many") and isinstance(
                args.no_remove_one_fit_many, str
            ):
                args.no_remove_one_fit_many = args.no_remove_one_fit_many.lower() in (
                    "1", "true", "yes", "on",
                )
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
