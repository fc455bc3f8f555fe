"""Command-line entry point: ``fecr {simulate,fit,fecrt,elicit,demo}``.

Warnings never change the exit code unless ``--strict`` is given. Exit codes:
0 success, 1 data or runtime failure, 2 usage error, 3 warnings under
``--strict``.
"""

import argparse
import csv
import json
import os
import sys
from dataclasses import asdict

from . import __version__
from .classical import bootstrap_ci, fecrt_asymptotic_ci
from .data import PAIRED, UNPAIRED, epg_view, load_csv
from .distributions import RngStream
from .elicit import FAMILIES, beta_from_mode_concentration, prior_snippet, solve_from_quantiles
from .errors import IncompatibleModelError, InitializationError
from .hmc import SamplerConfig, run_chains
from .models import PriorSpec, build_model, select_kind
from .posterior import draws_table, fecr_probs, render_text, summarize, summary_to_json
from .simulate import COLUMNS, SimConfig, simulate

SEED_ENV = "FECR_SEED"


class CliError(Exception):
    """Failure with a message meant for the user; ``code`` is the exit status."""

    def __init__(self, message, code=1):
        super().__init__(message)
        self.code = code


def _default_seed():
    text = os.environ.get(SEED_ENV)
    if text is None:
        return 1
    try:
        seed = int(text)
    except ValueError:
        raise CliError(f"environment variable {SEED_ENV}={text!r} is not an integer", 2) from None
    if seed < 0:
        raise CliError(f"environment variable {SEED_ENV} must be non-negative", 2)
    return seed


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _nonneg_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {v}")
    return v


def _positive_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def _quantile_pair(text):
    p, sep, q = text.partition("=")
    try:
        if not sep:
            raise ValueError
        return float(p), float(q)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected probability=value, e.g. 0.5=300, got {text!r}") from None


def _prior(text):
    try:
        return PriorSpec.parse(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _write_json(path, doc):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, allow_nan=False)
        fh.write("\n")


def _sampler_config(args, parser):
    if args.nburnin >= args.nsamples:
        parser.error(f"--nburnin ({args.nburnin}) must be smaller than --nsamples ({args.nsamples})")
    if not 0.6 < args.adapt_delta < 1:
        parser.error(f"--adapt-delta must lie in (0.6, 1), got {args.adapt_delta}")
    return SamplerConfig(
        nsamples=args.nsamples, nburnin=args.nburnin, thinning=args.thinning,
        nchain=args.nchain, nworkers=args.ncore, adapt_delta=args.adapt_delta, seed=args.seed,
    )


def _sim_header_f(path):
    """Sensitivity recorded in a simulated table's ``#`` header, if any."""
    try:
        with open(path, encoding="utf-8") as fh:
            first = fh.readline()
    except OSError:
        return None
    if first.startswith("#"):
        try:
            return float(json.loads(first[1:])["f"])
        except (ValueError, KeyError, TypeError):
            return None
    return None


def _load(args, design):
    f_default = _sim_header_f(args.data) or 1.0
    try:
        return load_csv(args.data, design=design, raw_counts=args.raw_counts,
                        f_pre=args.fpre, f_post=args.fpost, f_default=f_default)
    except OSError as e:
        raise CliError(f"cannot read {args.data}: {e.strerror}") from None
    except ValueError as e:
        raise CliError(f"{args.data}: {e}") from None


def _model_flags(args):
    return [flag for flag, on in (
        ("--paired", args.paired), ("--zero-inflation", args.zero_inflation),
        ("--individual-efficacy", args.individual_efficacy), ("--simple", args.simple),
        ("--outlier", args.outlier),
    ) if on]


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(args, parser, out):
    try:
        cfg = SimConfig(n=args.n, pre_mean=args.pre_mean, delta=args.delta, kappa=args.kappa,
                        f=args.f, paired=not args.unpaired, phi=args.phi, seed=args.seed)
    except ValueError as e:
        parser.error(str(e).replace("pre_mean", "--pre-mean").replace("kappa", "--kappa"))
    table = simulate(cfg)
    if args.output:
        table.to_csv(args.output)
        print(f"wrote {cfg.n} rows to {args.output}", file=out)
    else:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(COLUMNS)
        for row in zip(*(table.column(c) for c in COLUMNS)):
            w.writerow([f"{v:g}" for v in row])
    if args.json:
        _write_json(args.json, simulate_doc(table))
    return 0


def simulate_doc(table):
    return {
        "config": asdict(table.config),
        "columns": {c: [float(v) for v in table.column(c)] for c in COLUMNS},
    }


def fit_report(model, config, threshold=0.95):
    draws = run_chains(model, config)
    summary = summarize(model, draws)
    probs = fecr_probs(summary.fecr, threshold)
    text = render_text(summary)
    text += f"The probability that the reduction is less than {threshold:g} is {probs:.2f}%.\n"
    doc = summary_to_json(summary, probs, threshold)
    doc["priors"] = [str(p) for p in model.priors.values()]
    doc["data"] = {"design": model.data.design, "n_pre": model.data.n_pre, "n_post": model.data.n_post}
    return draws, summary, text, doc


def cmd_fit(args, parser, out):
    flags = _model_flags(args)
    try:
        kind = select_kind(args.paired, args.zero_inflation, args.individual_efficacy, args.simple, args.outlier)
    except IncompatibleModelError as e:
        parser.error(f"{' '.join(flags)}: {e}")
    config = _sampler_config(args, parser)
    if not 0 < args.threshold <= 1:
        parser.error(f"--threshold must lie in (0, 1], got {args.threshold}")
    data = _load(args, PAIRED if args.paired else UNPAIRED)
    try:
        model = build_model(kind, data, priors=args.prior, delta_upper=args.delta_upper)
    except IncompatibleModelError as e:
        parser.error(f"{' '.join(flags) or 'model flags'}: {e}")
    except ValueError as e:
        raise CliError(f"--prior: {e}", 2) from None
    try:
        draws, summary, text, doc = fit_report(model, config, args.threshold)
    except InitializationError as e:
        raise CliError(f"sampler initialisation failed: {e}") from None
    out.write(text)
    if args.json:
        _write_json(args.json, doc)
    if args.draws:
        header, rows = draws_table(model, draws)
        with open(args.draws, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rows)
    if args.strict and summary.warnings:
        print(f"--strict: {len(summary.warnings)} warning(s) treated as failure", file=sys.stderr)
        return 3
    return 0


def fecrt_doc(control, treatment, paired, B, level, seed):
    results, errors = [], []
    try:
        r = fecrt_asymptotic_ci(control, treatment, level)
        results.append(r)
    except ValueError as e:
        errors.append(f"asymptotic interval: {e}")
    results.append(bootstrap_ci(control, treatment, paired=paired, B=B, level=level, stream=RngStream(seed)))
    return {
        "n_control": int(len(control)),
        "n_treatment": int(len(treatment)),
        "paired": bool(paired),
        "results": [
            {"reduction_pct": r.reduction_pct, "ci": [r.ci_lower_pct, r.ci_upper_pct], "method": r.method,
             "B": r.bootstrap_B, "seed": r.seed, "level": r.level}
            for r in results
        ],
        "errors": errors,
    }


def fecrt_text(doc):
    lines = [f"Classical reduction test (control n={doc['n_control']}, treatment n={doc['n_treatment']})"]
    for r in doc["results"]:
        lo, hi = r["ci"]
        label = "asymptotic t" if r["method"] == "asymptotic_t" else f"bootstrap (B={r['B']}, seed={r['seed']})"
        lines.append(f"  {label:<28} reduction {r['reduction_pct']:7.2f}%  "
                     f"{100 * r['level']:g}% CI ({lo:.2f}%, {hi:.2f}%)")
    for e in doc["errors"]:
        lines.append(f"  NOTE: {e}")
    return "\n".join(lines) + "\n"


def cmd_fecrt(args, parser, out):
    if args.bootstrap < 100:
        parser.error(f"--bootstrap must be at least 100, got {args.bootstrap}")
    if not 0 < args.level < 1:
        parser.error(f"--level must lie in (0, 1), got {args.level}")
    data = _load(args, PAIRED if args.paired else UNPAIRED)
    control, treatment = epg_view(data)
    try:
        doc = fecrt_doc(control, treatment, data.paired, args.bootstrap, args.level, args.seed)
    except ValueError as e:
        raise CliError(f"{args.data}: {e}") from None
    out.write(fecrt_text(doc))
    if args.json:
        _write_json(args.json, doc)
    return 0


def cmd_elicit(args, parser, out):
    statements = {}
    if args.mode is not None or args.concentration is not None:
        if args.family != "beta":
            parser.error("--mode/--concentration are only available for the beta family")
        if args.mode is None or args.concentration is None:
            parser.error("--mode and --concentration must be given together")
        if args.q:
            parser.error("use either --q statements or --mode/--concentration, not both")
        try:
            params = beta_from_mode_concentration(args.mode, args.concentration)
        except ValueError as e:
            parser.error(f"--mode/--concentration: {e}")
        statements = {"mode": args.mode, "concentration": args.concentration}
    else:
        if not args.q or len(args.q) != 2:
            parser.error("--q must be given exactly twice, e.g. --q 0.5=300 --q 0.9=800")
        q1, q2 = sorted(args.q)
        try:
            params = solve_from_quantiles(args.family, q1, q2)
        except ValueError as e:
            raise CliError(f"--q: {e}") from None
        statements = {"quantiles": [list(q1), list(q2)]}
    snippet = prior_snippet(args.family, params)
    names = ("shape", "rate") if args.family == "gamma" else ("a", "b")
    out.write(f"{args.family} prior for {FAMILIES[args.family]}: "
              f"{names[0]} = {params[0]:.6g}, {names[1]} = {params[1]:.6g}\n")
    out.write(f"use with fit: --prior '{snippet}'\n")
    if args.json:
        _write_json(args.json, {"family": args.family, "target": FAMILIES[args.family],
                                "params": list(params), "prior": snippet, "statements": statements})
    return 0


def cmd_demo(args, parser, out):
    cfg = SimConfig(n=15, pre_mean=500, delta=0.1, kappa=1, f=15, paired=True, seed=args.seed)
    table = simulate(cfg)
    out.write("[1/4] simulate: n=15, pre-treatment mean 500 epg, 90% true reduction, kappa=1, f=15, paired\n")
    out.write(f"      mean epg before {table.obsPre.mean():.1f}, after {table.obsPost.mean():.1f}\n")

    out.write("[2/4] fit: paired model with individual efficacy\n")
    model = build_model("PairedIndividual", table.to_dataset())
    config = SamplerConfig(seed=args.seed)
    _, summary, text, fit_doc = fit_report(model, config)
    out.write(text.split("The probability")[0])

    probs = fecr_probs(summary.fecr, 0.95)
    out.write("[3/4] reduction probability\n")
    out.write(f"The probability that the reduction is less than 0.95 is {probs:.2f}%.\n")

    out.write("[4/4] classical test on the same counts\n")
    control, treatment = epg_view(table.to_dataset())
    doc = fecrt_doc(control, treatment, True, 2000, 0.95, args.seed)
    out.write(fecrt_text(doc))
    if args.json:
        _write_json(args.json, {"simulate": simulate_doc(table), "fit": fit_doc,
                                "fecr_probs": probs, "fecrt": doc})
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_data_args(p):
    p.add_argument("data", help="CSV file (pre,post columns; group,count for unpaired long format)")
    p.add_argument("--paired", action="store_true", help="rows are before/after counts of the same animal")
    counts = p.add_mutually_exclusive_group()
    counts.add_argument("--raw-counts", dest="raw_counts", action="store_true", default=True,
                        help="values are eggs counted under the microscope (default)")
    counts.add_argument("--epg", dest="raw_counts", action="store_false",
                        help="values are eggs per gram, i.e. counts times the sensitivity")
    p.add_argument("--fpre", type=_positive_float, help="analytic sensitivity before treatment")
    p.add_argument("--fpost", type=_positive_float, help="analytic sensitivity after treatment (default: --fpre)")
    p.add_argument("--json", metavar="PATH", help="also write a JSON report")


def build_parser(seed=1):
    parser = argparse.ArgumentParser(prog="fecr", description="Faecal egg count reduction estimation.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="draw a synthetic dataset")
    p.add_argument("--n", type=_positive_int, default=15)
    p.add_argument("--pre-mean", type=_positive_float, default=500.0)
    p.add_argument("--delta", type=float, default=0.1, help="true proportion of epg remaining")
    p.add_argument("--kappa", type=_positive_float, default=1.0)
    p.add_argument("--f", type=_positive_float, default=15.0)
    p.add_argument("--phi", type=float, default=0.0, help="proportion of unexposed animals")
    p.add_argument("--unpaired", action="store_true")
    p.add_argument("--seed", type=_nonneg_int, default=seed)
    p.add_argument("-o", "--output", metavar="PATH", help="CSV path (default: stdout)")
    p.add_argument("--json", metavar="PATH")
    p.set_defaults(func=cmd_simulate, subparser=p)

    p = sub.add_parser("fit", help="fit a Bayesian model and report the reduction")
    _add_data_args(p)
    p.add_argument("--zero-inflation", action="store_true")
    p.add_argument("--individual-efficacy", action="store_true")
    p.add_argument("--simple", action="store_true", help="single-layer model for very small samples")
    p.add_argument("--outlier", action="store_true", help="down-weight suspiciously large after-treatment counts")
    p.add_argument("--nsamples", type=_positive_int, default=2000, help="iterations per chain including warm-up")
    p.add_argument("--nburnin", type=_nonneg_int, default=1000)
    p.add_argument("--thinning", type=_positive_int, default=1)
    p.add_argument("--nchain", type=_positive_int, default=2)
    p.add_argument("--ncore", type=_positive_int, default=1)
    p.add_argument("--adapt-delta", type=float, default=0.8)
    p.add_argument("--seed", type=_nonneg_int, default=seed)
    p.add_argument("--prior", type=_prior, action="append", metavar="NAME=FAMILY(A,B)",
                   help="override a prior, e.g. mu=gamma(1,0.001); repeatable")
    p.add_argument("--delta-upper", type=_positive_float, default=1.0,
                   help="upper bound of the remaining proportion (above 1 allows increases)")
    p.add_argument("--threshold", type=float, default=0.95)
    p.add_argument("--draws", metavar="PATH", help="write every retained draw to CSV")
    p.add_argument("--strict", action="store_true", help="exit with status 3 when any warning is raised")
    p.set_defaults(func=cmd_fit, subparser=p)

    p = sub.add_parser("fecrt", help="classical reduction test with asymptotic and bootstrap intervals")
    _add_data_args(p)
    p.add_argument("--bootstrap", type=_positive_int, default=2000, metavar="B")
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--seed", type=_nonneg_int, default=seed)
    p.set_defaults(func=cmd_fecrt, subparser=p)

    p = sub.add_parser("elicit", help="prior hyperparameters from quantile or mode statements")
    p.add_argument("family", choices=sorted(FAMILIES))
    p.add_argument("--q", type=_quantile_pair, action="append", metavar="P=VALUE")
    p.add_argument("--mode", type=float)
    p.add_argument("--concentration", type=float)
    p.add_argument("--json", metavar="PATH")
    p.set_defaults(func=cmd_elicit, subparser=p)

    p = sub.add_parser("demo", help="simulate, fit, summarise and compare with the classical test")
    p.add_argument("--seed", type=_nonneg_int, default=seed)
    p.add_argument("--json", metavar="PATH")
    p.set_defaults(func=cmd_demo, subparser=p)
    return parser


def main(argv=None, out=None):
    out = out or sys.stdout
    try:
        parser = build_parser(_default_seed())
        args = parser.parse_args(argv)
        return args.func(args, args.subparser, out)
    except CliError as e:
        print(f"fecr: error: {e}", file=sys.stderr)
        return e.code
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2


if __name__ == "__main__":
    sys.exit(main())
