"""Command-line driver.

Exit codes: 0 success, 1 invalid input, 2 runtime failure (including
divergence), 3 an experiment verdict failed.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import concentration, experiments, theory
from .data import gen_gaussian_sphere, gen_orthogonal, load_csv, save_csv
from .errors import DivergenceError, InputError, OverparamError
from .gram import estimate_constants, hcts_matrix
from .network import TrainConfig, init, train

EXIT_OK, EXIT_INPUT, EXIT_RUNTIME, EXIT_VERDICT = 0, 1, 2, 3
PRESET_DEFAULT = " (default: the preset's value)"


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; usage errors are input errors here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


class _Fmt(argparse.HelpFormatter):
    def _get_help_string(self, action):
        h = action.help or ""
        d = action.default
        if action.required or d is None or d is argparse.SUPPRESS or isinstance(d, bool):
            return h
        return h + " (default: %(default)s)"


def _dump_json(obj, path=None):
    text = json.dumps(experiments._jsonable(obj), indent=2, sort_keys=True) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_gen_data(args):
    if args.kind == "orthogonal":
        if args.d is not None and args.d != args.n:
            raise InputError("orthogonal data needs d == n")
        ds = gen_orthogonal(args.n, args.seed, labels=args.labels)
    else:
        if args.d is None:
            raise InputError("--d is required for gaussian data")
        ds = gen_gaussian_sphere(args.n, args.d, args.seed, labels=args.labels)
    save_csv(ds, args.out)
    print(f"wrote {ds.n} rows (d={ds.d}) to {args.out}")


def cmd_constants(args):
    ds = load_csv(args.data, normalize=args.normalize)
    c = estimate_constants(ds.X, args.samples, args.seed, experiments.STREAM_CONSTANTS)
    _dump_json(c.to_dict(), args.out)


def cmd_train(args):
    ds = load_csv(args.data, normalize=args.normalize)
    consts = experiments.constants_for(ds.X, args.eta, args.samples, args.seed)
    eta, desc = experiments.resolve_eta(args.eta, ds.X, consts)
    print(desc)
    net = init(args.m, ds.d, args.kappa, args.seed, experiments.STREAM_INIT)
    cfg = TrainConfig(eta=eta, steps=args.steps, reg_beta=args.reg_beta,
                      record_every=args.record_every, record_residual=args.residual)
    trace = train(net, ds.X, ds.y, cfg)
    trace.write_csv(args.trace)
    print(f"final loss_sq={trace.loss_sq[-1]!r}")


def cmd_predict(args):
    ds = load_csv(args.data, normalize=args.normalize)
    H = hcts_matrix(ds.X)
    consts = experiments.constants_for(ds.X, args.eta, args.samples, args.seed)
    eta, _ = experiments.resolve_eta(args.eta, ds.X, consts)
    if args.k_max < 0:
        raise InputError("--k-max must be non-negative")
    theory.eigen_prediction(H, ds.y, eta, np.arange(args.k_max + 1)).write_csv(args.out)
    gb = theory.generalization_bound(H, ds.y, delta=args.delta)
    line = json.dumps({"eta": eta, "delta": args.delta, "leading": gb.leading,
                       "log_term": gb.log_term, "total": gb.total}, sort_keys=True)
    if args.bound_out:
        with open(args.bound_out, "w") as fh:
            fh.write(line + "\n")
    print(line)


def cmd_concentration(args):
    if args.mode == "anti":
        rep = concentration.anti_concentration_report(
            args.sigma, args.t, args.samples, args.trials, args.seed, args.method)
    else:
        if not args.data:
            raise InputError(f"--data is required for mode {args.mode}")
        ds = load_csv(args.data, normalize=args.normalize)
        if args.mode == "gram":
            consts = None
            if args.constants:
                with open(args.constants) as fh:
                    consts = json.load(fh)
            rep = concentration.gram_concentration_trial(ds.X, args.m, args.trials, args.seed, consts)
        else:
            rep = concentration.perturbation_trial(ds.X, args.m, args.R, args.trials, args.seed)
    rep.write_csv(args.out)
    summary = rep.summary()
    summary["mode"] = args.mode
    _dump_json(summary, args.summary)
    if args.summary:
        print(json.dumps(experiments._jsonable(summary), sort_keys=True))


def cmd_experiment(args):
    if args.config:
        with open(args.config) as fh:
            cfg = experiments.ExperimentConfig.from_dict(json.load(fh))
    elif args.preset:
        cfg = experiments.preset(args.preset)
    else:
        raise InputError("give --preset or --config")
    over = {"seed": args.seed, "m": args.m, "steps": args.steps, "kappa": args.kappa,
            "reg_beta": args.reg_beta, "samples": args.samples}
    if args.eta is not None:
        over["eta"] = args.eta
    cfg = experiments.with_overrides(cfg, over)
    rep = experiments.run(cfg)
    experiments.write_report(rep, args.out)
    if "eta_source" in rep.summary:
        print(rep.summary["eta_source"])
    for v in rep.verdicts:
        print(f"{'PASS' if v.passed else 'FAIL'} {v.check}: measured={v.measured!r} threshold={v.threshold!r}")
    return EXIT_OK if rep.passed else EXIT_VERDICT


def cmd_report(args):
    from . import report

    paths = report.render_run_dir(args.run_dir, args.svg)
    for p in paths:
        print(p)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="overparam", description=__doc__.splitlines()[0], formatter_class=_Fmt)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_, description=help_, formatter_class=_Fmt)
        sp.set_defaults(fn=fn)
        return sp

    def data_flags(sp, required=True):
        sp.add_argument("--data", required=required, help="dataset CSV (columns x0..x{d-1},y; unit-norm rows)")
        sp.add_argument("--normalize", action="store_true",
                        help="rescale rows whose norm is off by more than 1e-6 instead of rejecting")

    eta_help = "step size (dimensionless) or auto:quartic|auto:cubic|auto:quadratic|auto:reg|auto:eigen"

    sp = add("gen-data", cmd_gen_data, "generate a synthetic dataset")
    sp.add_argument("--kind", choices=["orthogonal", "gaussian"], default="orthogonal", help="generator")
    sp.add_argument("--n", type=int, required=True, help="number of samples")
    sp.add_argument("--d", type=int, default=None, help="input dimension (orthogonal: defaults to n)")
    sp.add_argument("--seed", type=int, default=0, help="RNG seed")
    sp.add_argument("--labels", default="random", help="random | ones | eigvec:<j> (j-th largest)")
    sp.add_argument("--out", required=True, help="output CSV path")

    sp = add("constants", cmd_constants, "estimate lambda, alpha, beta_var, gamma, theta")
    data_flags(sp)
    sp.add_argument("--samples", type=int, default=1000, help="Monte-Carlo weight draws M (count)")
    sp.add_argument("--seed", type=int, default=0, help="RNG seed")
    sp.add_argument("--out", default=None, help="output JSON path (stdout if omitted)")

    sp = add("train", cmd_train, "train the first layer by gradient descent and write a trace")
    data_flags(sp)
    sp.add_argument("--m", type=int, default=1024, help="hidden width (neurons)")
    sp.add_argument("--kappa", type=float, default=1.0, help="initialization scale of W (std dev)")
    sp.add_argument("--eta", default="auto:quartic", help=eta_help)
    sp.add_argument("--steps", type=int, default=200, help="gradient steps")
    sp.add_argument("--reg-beta", type=float, default=0.0, help="weight of beta/(2m)|W - W0|_F^2")
    sp.add_argument("--seed", type=int, default=0, help="RNG seed for initialization")
    sp.add_argument("--samples", type=int, default=200,
                    help="weight draws for alpha when eta is auto:cubic or auto:quadratic (count)")
    sp.add_argument("--record-every", type=int, default=1, help="trace stride in steps")
    sp.add_argument("--residual", action="store_true", help="record the one-step residual (costs O(n^2 m)/step)")
    sp.add_argument("--trace", required=True, help="output trace CSV path")

    sp = add("predict", cmd_predict, "predicted |u(k) - y| curve and generalization bound")
    data_flags(sp)
    sp.add_argument("--eta", default="auto:quartic", help=eta_help)
    sp.add_argument("--k-max", type=int, default=200, help="last step predicted")
    sp.add_argument("--delta", type=float, default=0.1, help="failure probability for the bound")
    sp.add_argument("--samples", type=int, default=200, help="weight draws when eta needs alpha (count)")
    sp.add_argument("--seed", type=int, default=0, help="RNG seed for constant estimation")
    sp.add_argument("--out", required=True, help="output CSV path (k,predicted)")
    sp.add_argument("--bound-out", default=None, help="also write the bound JSON line here")

    sp = add("concentration", cmd_concentration, "Monte-Carlo concentration trials")
    sp.add_argument("--mode", choices=["gram", "perturb", "anti"], required=True,
                    help="gram: |H^dis - H^cts|_F; perturb: |H(w) - H(w~)|_F; anti: Pr[|N(0,s^2)| <= t]")
    data_flags(sp, required=False)
    sp.add_argument("--m", type=int, default=1024, help="gram/perturb: neurons per trial")
    sp.add_argument("--R", type=float, default=0.05, help="perturb: distance of each w_r from w~_r")
    sp.add_argument("--constants", default=None, help="gram: constants JSON for the Bernstein prediction")
    sp.add_argument("--sigma", type=float, default=1.0, help="anti: standard deviation")
    sp.add_argument("--t", type=float, default=0.1, help="anti: half-width of the interval")
    sp.add_argument("--samples", type=int, default=1_000_000, help="anti: draws per trial")
    sp.add_argument("--method", choices=["iid", "stratified"], default="stratified", help="anti: sampler")
    sp.add_argument("--trials", type=int, default=10, help="independent trials")
    sp.add_argument("--seed", type=int, default=0, help="RNG seed")
    sp.add_argument("--out", required=True, help="output CSV path (trial,statistic,violated)")
    sp.add_argument("--summary", default=None, help="summary JSON path (stdout if omitted)")

    sp = add("experiment", cmd_experiment, "run a preset and write a run directory")
    sp.add_argument("--preset", choices=sorted(experiments.PRESETS), default=None, help="preset name")
    sp.add_argument("--config", default=None, help="config JSON (same keys as config.json)")
    sp.add_argument("--out", required=True, help="run directory")
    sp.add_argument("--seed", type=int, default=None, help="override seed" + PRESET_DEFAULT)
    sp.add_argument("--m", type=int, default=None, help="override width (neurons)" + PRESET_DEFAULT)
    sp.add_argument("--steps", type=int, default=None, help="override step count" + PRESET_DEFAULT)
    sp.add_argument("--eta", default=None, help="override: " + eta_help + PRESET_DEFAULT)
    sp.add_argument("--kappa", type=float, default=None, help="override init scale" + PRESET_DEFAULT)
    sp.add_argument("--reg-beta", type=float, default=None, help="override regularization weight" + PRESET_DEFAULT)
    sp.add_argument("--samples", type=int, default=None, help="override constant-estimation draws" + PRESET_DEFAULT)

    sp = add("report", cmd_report, "render SVG plots from a run directory")
    sp.add_argument("--run-dir", required=True, help="directory written by 'experiment'")
    sp.add_argument("--svg", default=None, help="output directory for SVGs; the run dir when omitted")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        code = args.fn(args)
    except DivergenceError as e:
        print(f"error: diverged at step {e.step} (loss_sq={e.loss!r})", file=sys.stderr)
        return EXIT_RUNTIME
    except (InputError, FileNotFoundError, IsADirectoryError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (OverparamError, RuntimeError, OSError, np.linalg.LinAlgError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK if code is None else code


if __name__ == "__main__":
    sys.exit(main())
