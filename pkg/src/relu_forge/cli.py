"""Command-line front end: every experiment as a seeded, reproducible
subcommand that persists a manifest and a report.

Exit codes: 0 all checks passed, 1 usage or I/O problem, 2 an invariant
check failed, 64 unknown subcommand.  Reports are written under --out with
content-addressed names (a hash of the manifest minus timestamps), so a
rerun with identical flags lands on the same files with byte-identical
payloads; timestamps live only in the manifest.
"""

import argparse
import hashlib
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .analysis import distance, lp_norm_mc, net_fn, sup_norm_grid
from .basis import (
    BasisSpec,
    build_basis,
    fit_interpolating,
    fit_least_squares,
    rate_experiment,
)
from .data import (
    additive_target,
    make_dataset,
    random_teacher,
    read_dataset_csv,
    smooth_product_target,
    sparse_bump_target,
    teacher_labels,
)
from .deepen import (
    Dataset,
    bad_interpolant,
    closeness_constant,
    deepen,
    interpolation_residual,
    make_plan,
    partition_sum_at_points,
    student_depth,
    tau_bound,
)
from .gates import FIXED_DEPTH, GateSpec, multi_gate, per_stage_budget
from .nets import ParseError, deserialize, evaluate_batch, serialize
from .primitives import BumpSpec, bump_net, psi_net
from .trainer import (
    TrainConfig,
    load_csv,
    synthetic_split,
    train,
    width_sweep,
)

SCHEMA_VERSION = 1


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _target_by_name(name, d):
    table = {
        "smooth": smooth_product_target(d),
        "sin": lambda xs: np.sin(np.pi * np.atleast_2d(xs)[:, 0]),
        "abs15": lambda xs: np.abs(np.atleast_2d(xs)[:, 0]) ** 1.5,
        "additive": additive_target(d),
        "sparse": sparse_bump_target(d, 4, min(3, 4 ** d), seed=7),
    }
    if name not in table:
        raise UsageError(
            "unknown target %r (choose from %s)" % (name, sorted(table))
        )
    return table[name]


def _manifest_hash(manifest):
    core = {k: manifest[k] for k in ("subcommand", "flags", "seed", "version")}
    blob = json.dumps(core, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def _finish(args, name, flags, payload, checks, artifacts=None):
    """Write manifest + report, print, and map check results to an exit code."""
    payload = dict(payload)
    payload["schema_version"] = SCHEMA_VERSION
    payload["checks"] = checks
    manifest = {
        "subcommand": name,
        "flags": flags,
        "seed": args.seed,
        "version": __version__,
        "timestamps": {"finished": time.strftime("%Y-%m-%dT%H:%M:%S")},
        "artifacts": [],
    }
    run_id = _manifest_hash(manifest)
    outdir = args.out
    os.makedirs(outdir, exist_ok=True)
    base = os.path.join(outdir, "%s-%s" % (name, run_id))
    for suffix, blob in (artifacts or {}).items():
        path = base + "." + suffix
        mode = "wb" if isinstance(blob, bytes) else "w"
        with open(path, mode) as fh:
            fh.write(blob)
        manifest["artifacts"].append(path)
    report_path = base + ".report.json"
    with open(report_path, "w") as fh:
        fh.write(json.dumps(payload, sort_keys=True, indent=2))
    manifest["artifacts"].append(report_path)
    with open(base + ".manifest.json", "w") as fh:
        fh.write(json.dumps(manifest, sort_keys=True, indent=2))
    failed = [k for k, v in checks.items() if not v]
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        _print_human(name, payload, checks, report_path)
    if failed:
        print("FAILED checks: %s" % ", ".join(sorted(failed)), file=sys.stderr)
        return 2
    return 0


def _print_human(name, payload, checks, report_path):
    print("== %s ==" % name)
    for key, val in sorted(payload.items()):
        if key in ("schema_version", "checks", "rows", "curves"):
            continue
        if key.startswith("history_"):
            continue  # per-epoch curves live in the report file
        print("  %-28s %s" % (key, _fmt(val)))
    for row in payload.get("rows", [])[:40]:
        print("  " + "  ".join("%s=%s" % (k, _fmt(v)) for k, v in row.items()))
    for key, ok in sorted(checks.items()):
        print("  [%s] %s" % ("pass" if ok else "FAIL", key))
    print("  report: %s" % report_path)


def _fmt(v):
    if isinstance(v, float):
        return "%.6g" % v
    return str(v)


def _common_flags(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="runs")
    p.add_argument("--json", action="store_true")


def _load_or_make_dataset(args, target):
    if args.data_path:
        return read_dataset_csv(args.data_path)
    return make_dataset(target, args.m, args.d, seed=args.seed)


def _teacher_for(args, d):
    if args.teacher_path:
        with open(args.teacher_path, "rb") as fh:
            return deserialize(fh.read())
    return random_teacher(
        d, args.teacher_depth, args.teacher_width, seed=args.seed + 17
    )


def cmd_deepen(args):
    if not 0.0 < args.epsilon < 1.0:
        raise UsageError("--epsilon must be in (0,1)")
    teacher = _teacher_for(args, args.d)
    ds = _load_or_make_dataset(
        args, lambda xs: teacher_labels(teacher, xs)
    )
    flavor = args.flavor
    plan = make_plan(
        ds, teacher, args.epsilon, args.p, args.theta, args.tilde_L, flavor
    )
    student = deepen(teacher, ds, plan)
    residual = interpolation_residual(student, ds)
    psum = partition_sum_at_points(ds, plan.tau)
    est = distance(
        net_fn(student),
        net_fn(teacher),
        ds.dim,
        p=2.0,
        budget=args.mc_budget,
        seed=args.seed + 1,
    )
    bound = closeness_constant(ds.dim, plan.p, plan.c_star) * plan.epsilon
    checks = {
        "interpolation_residual<=1e-8": residual <= 1e-8,
        "partition_sum_at_points": float(np.abs(psum - 1.0).max()) <= 1e-10,
        "l2_closeness<=C'eps": est.value <= bound + 3 * est.stderr,
    }
    if flavor == "fixed-depth":
        checks["depth==4L~+16+max(L,2)"] = student.depth == student_depth(
            plan, teacher.depth
        )
    payload = {
        "d": ds.dim,
        "m": ds.m,
        "epsilon": plan.epsilon,
        "tau": plan.tau,
        "c_star": plan.c_star,
        "flavor": flavor,
        "student_depth": student.depth,
        "student_params": student.param_count(),
        "teacher_depth": teacher.depth,
        "interpolation_residual": residual,
        "l2_distance": est.value,
        "l2_stderr": est.stderr,
        "closeness_bound": bound,
    }
    return _finish(
        args,
        "deepen",
        _flags_dict(args),
        payload,
        checks,
        artifacts={"student.json": serialize(student)},
    )


def cmd_bad_interp(args):
    ds = _load_or_make_dataset(args, _target_by_name(args.target, args.d))
    tau = args.tau if args.tau else args.tau_frac * tau_bound(ds)
    net = bad_interpolant(ds, tau)
    residual = interpolation_residual(net, ds)
    l1 = lp_norm_mc(net_fn(net), ds.dim, 1.0, args.mc_budget, seed=args.seed + 1)
    bound = 2.0 * (1.5 * tau) ** ds.dim * float(np.abs(ds.labels).sum())
    checks = {
        "interpolation_residual<=1e-8": residual <= 1e-8,
        "l1_norm<=2(3tau/2)^d sum|y|": l1.value <= bound,
    }
    payload = {
        "d": ds.dim,
        "m": ds.m,
        "tau": tau,
        "interpolation_residual": residual,
        "l1_norm": l1.value,
        "l1_stderr": l1.stderr,
        "l1_bound": bound,
        "depth": net.depth,
        "params": net.param_count(),
    }
    return _finish(args, "bad-interp", _flags_dict(args), payload, checks)


def cmd_approx_rate(args):
    target = _target_by_name(args.target, args.d)
    n_list = [int(v) for v in args.N_list.split(",")]
    rep = rate_experiment(
        target,
        args.r,
        args.d,
        n_list,
        args.s,
        sample_count=args.samples,
        seed=args.seed,
        grid_resolution=args.grid_res,
    )
    slopes = rep["slopes"]
    unc = slopes.get("sup_err_unconstrained", {})
    checks = {
        "slope<=-0.7r/d": unc.get("slope", 0.0) <= -0.7 * args.r / args.d,
        "r_squared>=0.9": unc.get("r_squared", 0.0) >= 0.9,
    }
    if args.samples:
        eligible = [
            row
            for row in rep["rows"]
            if math.isfinite(row["sup_err_constrained"])
            and row["basis_size"] >= 2 * args.samples
        ]
        checks["constrained<=5x_unconstrained+1e-6"] = all(
            row["sup_err_constrained"]
            <= 5.0 * row["sup_err_unconstrained"] + 1e-6
            for row in eligible
        )
    csv_lines = [
        "N,basis_size,params,sup_err_unconstrained,sup_err_constrained,"
        "l2_err,slope_so_far"
    ]
    for row in rep["rows"]:
        csv_lines.append(
            "%d,%d,%d,%r,%r,%r,%r"
            % (
                row["N"],
                row["basis_size"],
                row["params"],
                row["sup_err_unconstrained"],
                row["sup_err_constrained"],
                row["l2_err"],
                row["slope_so_far"],
            )
        )
    if unc:
        csv_lines.append(
            "# unconstrained_slope=%r r_squared=%r"
            % (unc["slope"], unc["r_squared"])
        )
    payload = {"rows": rep["rows"], "slopes": slopes, "r": args.r, "d": args.d}
    return _finish(
        args,
        "approx-rate",
        _flags_dict(args),
        payload,
        checks,
        artifacts={"rates.csv": "\n".join(csv_lines) + "\n"},
    )


def cmd_interp_fit(args):
    target = _target_by_name(args.target, args.d)
    rng = np.random.Generator(np.random.Philox(args.seed))
    pts = rng.uniform(0.05, 0.95, size=(args.m, args.d))
    ds = Dataset(pts, np.asarray(target(pts)))
    spec = BasisSpec(N=args.N, s=args.s, nu=args.nu)
    basis = build_basis(spec, args.d)
    res = args.grid_res or max(8 * args.N + 1, 17)
    unc = fit_least_squares(basis, target, res)
    con = fit_interpolating(basis, ds, target, res)
    checks = {
        "interpolation_residual<=1e-8": con.fit_report["interpolation_residual"]
        <= 1e-8,
        "constrained_mse>=unconstrained_mse": con.fit_report["grid_mse"]
        >= unc.fit_report["grid_mse"] - 1e-12,
    }
    payload = {
        "d": args.d,
        "m": args.m,
        "N": args.N,
        "s": args.s,
        "basis_size": basis.size,
        "sup_err_unconstrained": unc.fit_report["sup_error"],
        "sup_err_constrained": con.fit_report["sup_error"],
        "interpolation_residual": con.fit_report["interpolation_residual"],
        "grid_mse_unconstrained": unc.fit_report["grid_mse"],
        "grid_mse_constrained": con.fit_report["grid_mse"],
    }
    return _finish(args, "interp-fit", _flags_dict(args), payload, checks)


def cmd_train(args):
    if args.data_path:
        data = load_csv(
            args.data_path, normalize=args.normalize, seed=args.seed
        )
    else:
        data = synthetic_split(
            _target_by_name(args.target, args.d),
            args.m,
            args.d,
            seed=args.seed,
            noise=args.noise,
        )
    cfg = TrainConfig(
        depth=args.depth,
        width=args.width,
        lr=args.lr,
        epochs=args.epochs,
        seed=args.seed,
        record_every=args.record_every,
        early_stop_rmse=args.early_stop,
    )
    hist = train(cfg, data)
    checks = {
        "not_diverged": not hist.diverged,
        "final<=initial_train_loss": hist.train_rmse[-1] <= hist.train_rmse[0],
    }
    payload = {
        "depth": args.depth,
        "width": args.width,
        "params": hist.final_params,
        "epochs_run": hist.epochs[-1],
        "train_rmse": hist.train_rmse[-1],
        "test_rmse": hist.test_rmse[-1],
        "history_epochs": hist.epochs,
        "history_train_rmse": hist.train_rmse,
        "history_test_rmse": hist.test_rmse,
    }
    return _finish(args, "train", _flags_dict(args), payload, checks)


def cmd_sweep(args):
    data = synthetic_split(
        _target_by_name(args.target, args.d),
        args.m,
        args.d,
        seed=args.seed,
        noise=args.noise,
    )
    depths = [int(v) for v in args.depths.split(",")]
    widths = [int(v) for v in args.widths.split(",")]
    rep = width_sweep(
        depths,
        widths,
        data,
        seed=args.seed,
        epochs=args.epochs,
        early_stop_rmse=args.early_stop,
    )
    m_train = len(data.y_train)
    ok_mono = True
    for depth in depths:
        cells = [r for r in rep["rows"] if r["depth"] == depth and "error" not in r]
        over = [r for r in cells if r["params"] >= 5 * m_train]
        for a, b in zip(over, over[1:]):
            if b["train_rmse"] > a["train_rmse"] * 1.1 + 1e-12:
                ok_mono = False
    finite = all(
        math.isfinite(r["test_rmse"])
        for r in rep["rows"]
        if "error" not in r and r["params"] >= 5 * m_train
    )
    checks = {
        "overparam_train_rmse_nonincreasing(10%)": ok_mono,
        "overparam_test_rmse_finite": finite,
        "row_count": len(rep["rows"]) == len(depths) * len(widths),
    }
    payload = {"rows": rep["rows"], "m_train": m_train}
    return _finish(args, "sweep", _flags_dict(args), payload, checks)


def cmd_norms(args):
    d = args.d
    fns = {
        "psi": (net_fn(psi_net()), 1),
        "bump": (net_fn(bump_net(BumpSpec(-0.2, 0.2, 0.1, dim=d))), d),
        "coord": (lambda xs: np.atleast_2d(xs)[:, 0], d),
        "const": (lambda xs: np.ones(len(np.atleast_2d(xs))), d),
        "sinpi": (lambda xs: np.sin(np.pi * np.atleast_2d(xs)[:, 0]), d),
    }
    if args.fn not in fns:
        raise UsageError("unknown --fn %r (choose from %s)" % (args.fn, sorted(fns)))
    fn, dim = fns[args.fn]
    if args.method == "grid":
        est = sup_norm_grid(fn, dim, args.budget)
    else:
        est = lp_norm_mc(fn, dim, args.p, args.budget, seed=args.seed)
    checks = {"finite": math.isfinite(est.value)}
    payload = {
        "fn": args.fn,
        "p": args.p if args.method != "grid" else math.inf,
        "method": est.method,
        "value": est.value,
        "stderr": est.stderr,
        "samples": est.samples,
    }
    return _finish(args, "norms", _flags_dict(args), payload, checks)


def cmd_verify_gates(args):
    ells = [int(v) for v in args.ell_list.split(",")]
    nus = [float(v) for v in args.nu_list.split(",")]
    rows = []
    all_ok = True
    for ell in ells:
        for nu in nus:
            spec = GateSpec(
                ell=ell, nu=nu, theta=args.theta, tilde_L=args.tilde_L,
                flavor=FIXED_DEPTH,
            )
            gate = multi_gate(spec)
            if ell == 2:
                grid = np.linspace(-1, 1, 201)
                U, V = np.meshgrid(grid, grid)
                pts = np.stack([U.ravel(), V.ravel()], axis=1)
            else:
                rng = np.random.Generator(np.random.Philox(args.seed + ell))
                pts = rng.uniform(-1, 1, size=(10 ** 4, ell))
            err = float(
                np.abs(evaluate_batch(gate, pts) - np.prod(pts, axis=1)).max()
            )
            rng = np.random.Generator(np.random.Philox(args.seed + 100 + ell))
            zpts = rng.uniform(-1, 1, size=(10 ** 3, ell))
            zpts[np.arange(10 ** 3), rng.integers(0, ell, 10 ** 3)] = 0.0
            zero_ok = bool(np.all(evaluate_batch(gate, zpts) == 0.0))
            depth_bound = 2 * ell * args.tilde_L + 8 * ell
            ok = err <= nu and zero_ok and gate.depth <= depth_bound
            all_ok = all_ok and ok
            rows.append(
                {
                    "ell": ell,
                    "nu": nu,
                    "sup_error": err,
                    "depth": gate.depth,
                    "depth_bound": depth_bound,
                    "params": gate.param_count(),
                    "per_stage_nu": per_stage_budget(spec),
                    "zero_exact": zero_ok,
                }
            )
    checks = {"all_gates_within_nu_zero_exact_depth_bound": all_ok}
    payload = {"rows": rows}
    return _finish(args, "verify-gates", _flags_dict(args), payload, checks)


def _flags_dict(args):
    skip = {"func", "json"}
    return {
        k: v for k, v in sorted(vars(args).items()) if k not in skip
    }


def build_parsers():
    top = _Parser(prog="relu-forge", description=__doc__)
    sub = {}

    def add(name, fn, configure):
        p = _Parser(prog="relu-forge " + name)
        _common_flags(p)
        configure(p)
        sub[name] = (p, fn)

    def conf_deepen(p):
        p.add_argument("--teacher-path")
        p.add_argument("--teacher-depth", type=int, default=2)
        p.add_argument("--teacher-width", type=int, default=8)
        p.add_argument("--data-path")
        p.add_argument("--d", type=int, default=2)
        p.add_argument("--m", type=int, default=20)
        p.add_argument("--epsilon", type=float, default=0.1)
        p.add_argument("--p", type=float, default=2.0)
        p.add_argument("--theta", type=float, default=0.5)
        p.add_argument("--tilde-L", dest="tilde_L", type=int, default=2)
        p.add_argument(
            "--flavor",
            choices=["fixed-depth", "fully-connected"],
            default="fixed-depth",
        )
        p.add_argument("--mc-budget", type=int, default=50000)

    def conf_bad(p):
        p.add_argument("--data-path")
        p.add_argument("--target", default="sin")
        p.add_argument("--d", type=int, default=1)
        p.add_argument("--m", type=int, default=5)
        p.add_argument("--tau", type=float, default=None)
        p.add_argument("--tau-frac", type=float, default=0.3)
        p.add_argument("--mc-budget", type=int, default=100000)

    def conf_rate(p):
        p.add_argument("--target", default="sin")
        p.add_argument("--r", type=float, default=1.0)
        p.add_argument("--d", type=int, default=1)
        p.add_argument("--s", type=int, default=0)
        p.add_argument("--N-list", dest="N_list", default="4,8,16,32")
        p.add_argument("--samples", type=int, default=0)
        p.add_argument("--grid-res", type=int, default=None)

    def conf_interp_fit(p):
        p.add_argument("--target", default="sin")
        p.add_argument("--d", type=int, default=1)
        p.add_argument("--m", type=int, default=10)
        p.add_argument("--N", type=int, default=16)
        p.add_argument("--s", type=int, default=0)
        p.add_argument("--nu", type=float, default=1e-4)
        p.add_argument("--grid-res", type=int, default=None)

    def conf_train(p):
        p.add_argument("--config", help="JSON file of flag defaults")
        p.add_argument("--data-path")
        p.add_argument("--normalize", action="store_true")
        p.add_argument("--target", default="smooth")
        p.add_argument("--d", type=int, default=2)
        p.add_argument("--m", type=int, default=200)
        p.add_argument("--noise", type=float, default=0.0)
        p.add_argument("--depth", type=int, default=2)
        p.add_argument("--width", type=int, default=64)
        p.add_argument("--lr", type=float, default=1e-3)
        p.add_argument("--epochs", type=int, default=2000)
        p.add_argument("--record-every", type=int, default=100)
        p.add_argument("--early-stop", type=float, default=None)

    def conf_sweep(p):
        p.add_argument("--config", help="JSON file of flag defaults")
        p.add_argument("--target", default="smooth")
        p.add_argument("--d", type=int, default=2)
        p.add_argument("--m", type=int, default=120)
        p.add_argument("--noise", type=float, default=0.0)
        p.add_argument("--depths", default="1,2,4")
        p.add_argument("--widths", default="2,40,200")
        p.add_argument("--epochs", type=int, default=1500)
        p.add_argument("--early-stop", type=float, default=None)

    def conf_norms(p):
        p.add_argument("--fn", default="psi")
        p.add_argument("--d", type=int, default=1)
        p.add_argument("--p", type=float, default=2.0)
        p.add_argument("--method", choices=["monte-carlo", "grid"],
                       default="monte-carlo")
        p.add_argument("--budget", type=int, default=100000)

    def conf_gates(p):
        p.add_argument("--ell-list", dest="ell_list", default="2,3,4")
        p.add_argument("--nu-list", dest="nu_list", default="1e-2,1e-3,1e-4")
        p.add_argument("--theta", type=float, default=0.5)
        p.add_argument("--tilde-L", dest="tilde_L", type=int, default=2)

    add("deepen", cmd_deepen, conf_deepen)
    add("bad-interp", cmd_bad_interp, conf_bad)
    add("approx-rate", cmd_approx_rate, conf_rate)
    add("interp-fit", cmd_interp_fit, conf_interp_fit)
    add("train", cmd_train, conf_train)
    add("sweep", cmd_sweep, conf_sweep)
    add("norms", cmd_norms, conf_norms)
    add("verify-gates", cmd_verify_gates, conf_gates)
    return top, sub


USAGE = """relu-forge <subcommand> [flags]

subcommands:
  deepen        build + verify an exactly interpolating student net
  bad-interp    the narrow-bump interpolant with near-zero L^p mass
  approx-rate   error decay of the gated hat/monomial basis
  interp-fit    equality-constrained least squares over the basis
  train         full-batch Adam on a ReLU regressor
  sweep         width/depth sweep of trained nets
  norms         Monte-Carlo / grid norm estimates
  verify-gates  sup error, zero preservation and depth of product gates

Run 'relu-forge <subcommand> --help' for flags.
"""


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv or argv[0] in ("-h", "--help"):
        print(USAGE)
        return 0
    _, sub = build_parsers()
    name = argv[0]
    if name not in sub:
        print(USAGE, file=sys.stderr)
        print("unknown subcommand: %s" % name, file=sys.stderr)
        return 64
    parser, fn = sub[name]
    try:
        rest = argv[1:]
        if "--config" in rest:
            at = rest.index("--config")
            if at + 1 >= len(rest):
                raise UsageError("--config needs a file path")
            with open(rest[at + 1]) as fh:
                overrides = json.load(fh)
            known = {action.dest for action in parser._actions}
            stray = set(overrides) - known
            if stray:
                raise UsageError(
                    "unknown config keys: %s" % ", ".join(sorted(stray))
                )
            parser.set_defaults(**overrides)
        args = parser.parse_args(rest)
        return fn(args)
    except UsageError as err:
        print("usage error: %s" % err, file=sys.stderr)
        return 1
    except (OSError, ParseError) as err:
        print("error: %s" % err, file=sys.stderr)
        return 1
    except (ValueError, RuntimeError) as err:
        print("error: %s" % err, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
