"""Command-line front end: sampling, experiments, diagnostics, self-tests.

Subcommands
-----------
sample    emit one measure realization (JSON or CSV)
ks-table  run the bundled or a user-supplied (alpha, theta, r) grid and
          report mean Kolmogorov distances
weights   Monte Carlo profile of the largest weights across orders r
clusters  distinct-count growth diagnostic
selftest  fast invariant suite, one PASS/FAIL line per property

Exit codes: 0 success, 1 domain or config error, 2 numeric failure,
3 selftest failure.  Identical invocations (including --seed) produce
byte-identical output for any --jobs value; timing is therefore never
part of the payload.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from importlib import resources

import numpy as np

from .errors import DomainError, NbpError, NumericError
from .experiments import (
    ExperimentSpec,
    build_measure,
    clustering_growth,
    kolmogorov_distance,
    load_ks_grid,
    run_ks_table,
    weight_profile,
)
from .levy_tails import LevyTail
from .point_processes import TruncationPolicy
from .random_measures import SCHEMA_VERSION, DiscreteMeasure, uniform_base

OUTPUT_DIR_ENV = "NBPRIORS_OUTPUT_DIR"


def _parse_int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip() != ""]
    except ValueError as exc:
        raise DomainError(f"expected a comma-separated integer list, got {text!r}") from exc


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DomainError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise DomainError(f"config {path} must hold a JSON object")
    return data


def _resolve_seed(args, config: dict) -> int:
    if args.seed is not None:
        return int(args.seed)
    return int(config.get("seed", 0))


def _resolve_out(path: str | None):
    if path is None:
        return None
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not os.path.isabs(path):
        return os.path.join(base, path)
    return path


def _emit(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w") as fh:
            fh.write(text)


def _json_text(payload) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def parse_csv_table(text: str) -> list[dict]:
    """Read back a CSV table emitted by this CLI: header row, numeric cells."""
    lines = [ln for ln in text.strip().splitlines() if ln]
    if not lines:
        raise DomainError("empty CSV table")
    header = lines[0].split(",")
    rows = []
    for ln in lines[1:]:
        cells = ln.split(",")
        if len(cells) != len(header):
            raise DomainError(f"CSV row has {len(cells)} cells, header has {len(header)}")
        row = {}
        for key, cell in zip(header, cells):
            try:
                value = int(cell)
            except ValueError:
                value = float(cell)
            row[key] = value
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# subcommands


def _cmd_sample(args) -> int:
    config = _load_config(args.config)

    def pick(flag_value, key, default=None):
        return flag_value if flag_value is not None else config.get(key, default)

    process = pick(args.process, "process")
    if process is None:
        raise DomainError("sample needs --process (or a config with 'process')")
    params = dict(config.get("params", {}))
    for key, value in (("alpha", args.alpha), ("theta", args.theta), ("r", args.r), ("sticks", args.sticks)):
        if value is not None:
            params[key] = value
    if args.ranked:
        params["ranked"] = True

    trunc_cfg = config.get("truncation")
    truncation = TruncationPolicy.from_dict(trunc_cfg) if trunc_cfg else None
    if args.epsilon is not None:
        truncation = TruncationPolicy.epsilon_rule(args.epsilon)
    elif args.n is not None:
        truncation = TruncationPolicy.fixed(args.n)
    seed = _resolve_seed(args, config)

    measure = build_measure(process, params, truncation, seed, uniform_base())
    if args.output == "json":
        _emit(measure.to_json(indent=2) + "\n", _resolve_out(args.out))
    else:
        _emit(measure.to_csv(), _resolve_out(args.out))
    return 0


def default_grid_config() -> dict:
    """The bundled nine-row benchmark grid (n = 400, 500 replications)."""
    with resources.files("nbpriors.data").joinpath("table2.json").open() as fh:
        return json.load(fh)


def _cmd_ks_table(args) -> int:
    config = _load_config(args.config) if args.config else default_grid_config()
    rows, n, replications = load_ks_grid(config)
    if args.n is not None:
        n = args.n
    if args.reps is not None:
        replications = args.reps
    seed = _resolve_seed(args, config)
    results = run_ks_table(rows, n, replications, seed, parallelism=args.jobs)

    table = []
    for row, res in zip(rows, results):
        # the echo omits the worker-count hint: execution details must not
        # break byte-identical output across --jobs values
        echo = res.spec_echo.to_dict()
        echo.pop("parallelism", None)
        table.append(
            {
                "alpha": float(row["alpha"]),
                "theta": float(row["theta"]),
                "r": int(row["r"]),
                "mean_distance": res.mean_distance,
                "std_error": res.std_error,
                "replications": res.replications,
                "failures": list(res.failures),
                "spec": echo,
            }
        )
    if args.output == "json":
        payload = {
            "schema_version": SCHEMA_VERSION,
            "n": int(n),
            "replications": int(replications),
            "seed": int(seed),
            "rows": table,
        }
        _emit(_json_text(payload), _resolve_out(args.out))
    else:
        lines = ["alpha,theta,r,mean_distance,std_error,replications"]
        for row in table:
            lines.append(
                f"{row['alpha']!r},{row['theta']!r},{row['r']},"
                f"{row['mean_distance']!r},{row['std_error']!r},{row['replications']}"
            )
        _emit("\n".join(lines) + "\n", _resolve_out(args.out))
    return 0


def _cmd_weights(args) -> int:
    tail = LevyTail.gamma(args.theta)
    profile = weight_profile(
        tail,
        _parse_int_list(args.r_grid),
        args.top_k,
        args.reps,
        _resolve_seed(args, _load_config(args.config)),
        points_per_r=args.points_per_r,
    )
    if args.output == "json":
        _emit(_json_text(profile.to_dict()), _resolve_out(args.out))
    else:
        lines = ["r," + ",".join(f"w{k + 1}" for k in range(profile.top_k))]
        for r, row in zip(profile.r_grid, profile.mean_weights):
            lines.append(f"{r}," + ",".join(repr(float(v)) for v in row))
        _emit("\n".join(lines) + "\n", _resolve_out(args.out))
    return 0


def _cmd_clusters(args) -> int:
    params: dict = {}
    if args.alpha is not None:
        params["alpha"] = args.alpha
    if args.theta is not None:
        params["theta"] = args.theta
    diag = clustering_growth(
        args.process, params, _parse_int_list(args.n_grid), args.reps,
        _resolve_seed(args, _load_config(args.config)),
    )
    if args.output == "json":
        _emit(_json_text(diag.to_dict()), _resolve_out(args.out))
    else:
        lines = ["n,kn_mean,ratio"]
        for n, k, ratio in zip(diag.n_grid, diag.kn_means, diag.ratios):
            lines.append(f"{n},{k!r},{ratio!r}")
        _emit("\n".join(lines) + "\n", _resolve_out(args.out))
    return 0


# ---------------------------------------------------------------------------
# selftest


def _selftest_checks():
    import math

    from . import special_functions as sf
    from .levy_tails import tail_inverse, tail_support_bound, tail_value
    from .point_processes import NbpConfig, gamma_arrivals, sample_nbp_points, sample_prm_points
    from .random_measures import BaseMeasure, sample_dp, sample_extended_dp_finite

    def special_function_values():
        assert abs(sf.log_gamma(1.0)) < 1e-14
        assert abs(sf.log_gamma(0.5) - 0.5723649429247001) < 1e-13
        assert abs(sf.exp_integral_e1(1.0) - 0.21938393439552028) < 1e-12
        assert abs(sf.upper_incomplete_gamma(-0.5, 1.0) - 0.17814771178156069) < 1e-12
        assert abs(sf.gamma_survival(1.0, math.log(2.0)) - 0.5) < 1e-13
        return True

    def survival_roundtrip():
        for shape in (1e-3, 0.1, 1.0):
            for y in (0.05, 0.3, 0.5, 0.7, 0.95):
                t = sf.gamma_quantile_upper(shape, y)
                x = math.exp(t)
                if x > 0:
                    assert abs(sf.gamma_survival(shape, x) - y) < 1e-10
        return True

    def tail_roundtrips():
        tails = [LevyTail.stable(0.5), LevyTail.gamma(3.0), LevyTail.generalized_gamma(0.5)]
        grid = np.geomspace(1e-4, 1e2, 9)
        for tail in tails:
            for y in grid:
                x = tail_inverse(tail, y)
                assert abs(tail_value(tail, x) - y) <= 1e-9 * y
        return True

    def stable_closed_form():
        tail = LevyTail.stable(0.4)
        for y in (0.5, 2.0, 7.0):
            assert abs(tail_inverse(tail, y) - y ** (-1 / 0.4)) <= 1e-10 * y ** (-1 / 0.4)
        return True

    def arrivals_deterministic():
        a = gamma_arrivals(123, 500).arrivals
        b = gamma_arrivals(123, 500).arrivals
        assert np.array_equal(a, b)
        assert a[0] > 0 and np.all(np.diff(a) > 0)
        return True

    def prm_nbp_consistency():
        tail = LevyTail.gamma(3.0)
        cfg = NbpConfig(r=0.0, tail=tail, truncation=TruncationPolicy.fixed(200))
        series = sample_nbp_points(cfg, 99)
        prm = sample_prm_points(tail, gamma_arrivals(99, 200))
        assert np.array_equal(series.points, prm)
        return True

    def measure_invariants():
        m = sample_dp(3.0, uniform_base(), TruncationPolicy.fixed(100), 5)
        assert len(m) == 100
        assert abs(math.fsum(m.weights.tolist()) - 1.0) <= 1e-12
        assert np.all(np.diff(m.weights) < 0)
        return True

    def atom_independence():
        trunc = TruncationPolicy.fixed(100)
        m1 = sample_dp(3.0, uniform_base(), trunc, 5)
        other = BaseMeasure("shifted", lambda rng, size: 10.0 + rng.random(size))
        m2 = sample_dp(3.0, other, trunc, 5)
        assert np.array_equal(m1.weights, m2.weights)
        return True

    def finite_approximation_coupling():
        from .random_measures import ExtendedDpParams

        n = 2000
        seed = 11
        m_series = sample_dp(3.0, uniform_base(), TruncationPolicy.fixed(n), seed)
        m_finite = sample_extended_dp_finite(ExtendedDpParams(3.0, 0, n), uniform_base(), seed)
        k = min(len(m_series), len(m_finite))
        gap = np.max(np.abs(m_series.weights[:k] - m_finite.weights[:k]))
        assert gap < 5e-2, f"coupling gap {gap}"
        return True

    def kolmogorov_reference_values():
        base = uniform_base()
        one = DiscreteMeasure(np.array([0.5]), np.array([1.0]))
        assert abs(kolmogorov_distance(one, base) - 0.5) < 1e-15
        two = DiscreteMeasure(np.array([0.25, 0.75]), np.array([0.5, 0.5]))
        assert abs(kolmogorov_distance(two, base) - 0.25) < 1e-15
        return True

    def serialization_roundtrip():
        m = sample_dp(2.0, uniform_base(), TruncationPolicy.fixed(50), 3)
        again = DiscreteMeasure.from_json(m.to_json())
        assert np.array_equal(m.atoms, again.atoms)
        assert np.array_equal(m.weights, again.weights)
        assert m.provenance == again.provenance
        csv_again = DiscreteMeasure.from_csv(m.to_csv())
        assert np.array_equal(m.weights, csv_again.weights)
        tail = LevyTail.generalized_gamma(0.3)
        assert LevyTail.from_json(tail.to_json()) == tail
        return True

    def parallel_invariance():
        from .experiments import run_ks_experiment

        kwargs = dict(
            process="dirichlet",
            params={"theta": 3.0},
            replications=12,
            truncation=TruncationPolicy.fixed(100),
            master_seed=7,
        )
        serial = run_ks_experiment(ExperimentSpec(parallelism=1, **kwargs))
        threaded = run_ks_experiment(ExperimentSpec(parallelism=4, **kwargs))
        assert serial.mean_distance == threaded.mean_distance
        assert serial.std_error == threaded.std_error
        return True

    def dp_mean_property():
        vals = []
        for rep in range(300):
            m = sample_dp(3.0, uniform_base(), TruncationPolicy.fixed(400), (21, rep))
            vals.append(float(m.weights[m.atoms <= 0.3].sum()))
        mean = float(np.mean(vals))
        se = float(np.std(vals, ddof=1) / math.sqrt(len(vals)))
        assert abs(mean - 0.3) <= 4 * se, f"mean {mean}, se {se}"
        return True

    def support_bound_consistency():
        for tail in (LevyTail.stable(0.5), LevyTail.gamma(3.0), LevyTail.generalized_gamma(0.9)):
            bound = tail_support_bound(tail)
            assert abs(tail_value(tail, bound) - 1.0) <= 1e-9
        cfg = NbpConfig(r=5.0, tail=LevyTail.gamma(3.0), truncation=TruncationPolicy.fixed(60))
        series = sample_nbp_points(cfg, 17)
        assert series.points[0] < tail_support_bound(LevyTail.gamma(3.0))
        return True

    def stick_breaking_mean():
        total = 0.0
        reps = 400
        for rep in range(reps):
            from .random_measures import sample_pdp_stick_breaking

            m = sample_pdp_stick_breaking(0.0, 1.0, uniform_base(), 60, False, (31, rep))
            total += float(m.weights[0])
        assert abs(total / reps - 0.5) < 0.04
        return True

    return [
        ("special function reference values", special_function_values),
        ("survival quantile roundtrip", survival_roundtrip),
        ("tail value/inverse roundtrip", tail_roundtrips),
        ("stable tail closed form", stable_closed_form),
        ("arrival stream determinism", arrivals_deterministic),
        ("r=0 negative binomial equals the Poisson measure", prm_nbp_consistency),
        ("measure normalization and ordering", measure_invariants),
        ("weights independent of the atom stream", atom_independence),
        ("finite approximation couples to the series", finite_approximation_coupling),
        ("Kolmogorov distance reference values", kolmogorov_reference_values),
        ("serialization roundtrips", serialization_roundtrip),
        ("worker-count invariance", parallel_invariance),
        ("Dirichlet mean property", dp_mean_property),
        ("support bound consistency", support_bound_consistency),
        ("stick-breaking first-weight mean", stick_breaking_mean),
    ]


def _cmd_selftest(_args) -> int:
    failures = 0
    for name, check in _selftest_checks():
        try:
            ok = bool(check())
        except Exception as exc:  # noqa: BLE001 - report, do not crash the suite
            ok = False
            reason = f" ({exc})"
        else:
            reason = ""
        if ok:
            print(f"PASS {name}")
        else:
            failures += 1
            print(f"FAIL {name}{reason}")
    if failures:
        print(f"{failures} check(s) failed")
        return 3
    print("all checks passed")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nbpriors", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--seed", type=int, default=None, help="master seed (default 0; a config may supply one)")
        p.add_argument("--output", choices=("json", "csv"), default="json")
        p.add_argument("--out", default=None, help=f"output file (relative paths honor ${OUTPUT_DIR_ENV})")
        p.add_argument("--config", default=None, help="JSON config file; explicit flags win")

    p = sub.add_parser("sample", help="emit one measure realization")
    add_common(p)
    p.add_argument("--process", choices=("dirichlet", "extended_dp", "pkp", "pdp_series", "pdp_stick", "stable"))
    p.add_argument("--alpha", type=float)
    p.add_argument("--theta", type=float)
    p.add_argument("--r", type=float)
    p.add_argument("--n", type=int, help="fixed truncation index (or level / stick count)")
    p.add_argument("--epsilon", type=float, help="relative-weight stopping threshold")
    p.add_argument("--sticks", type=int)
    p.add_argument("--ranked", action="store_true")
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("ks-table", help="mean Kolmogorov distance per grid row")
    add_common(p)
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_ks_table)

    p = sub.add_parser("weights", help="profile of the largest weights per order r")
    add_common(p)
    p.add_argument("--theta", type=float, default=3.0)
    p.add_argument("--r-grid", default="0,3,5,10")
    p.add_argument("--top-k", type=int, default=10)
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("--points-per-r", type=int, default=400)
    p.set_defaults(func=_cmd_weights)

    p = sub.add_parser("clusters", help="distinct-count growth diagnostic")
    add_common(p)
    p.add_argument("--process", choices=("dirichlet", "pdp_series", "stable"), default="dirichlet")
    p.add_argument("--alpha", type=float)
    p.add_argument("--theta", type=float)
    p.add_argument("--n-grid", default="100,1000")
    p.add_argument("--reps", type=int, default=200)
    p.set_defaults(func=_cmd_clusters)

    p = sub.add_parser("selftest", help="fast invariant suite")
    p.set_defaults(func=_cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 2
    except (NbpError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
