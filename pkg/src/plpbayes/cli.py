"""Command-line front end.

Subcommands
-----------
mle       fit a power law process by maximum likelihood
bayes     Higgins-Tsokos Bayes shape estimate under a chosen prior
simulate  run a Monte Carlo campaign from a JSON config file
curve     tabulate fitted intensity curves from a saved report

Exit codes: 0 success, 1 usage error, 2 input-data error, 3 numerical
failure.  Output files are written atomically (temp file plus rename), so
a failing run leaves no partial output.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .bayes import (
    PRIOR_CHOICES,
    HtLoss,
    IntensityForm,
    PosteriorSpec,
    adjusted_theta,
    default_prior,
    ht_bayes_estimate,
)
from .exceptions import DataError, EstimationError
from .io import format_report_csv, format_report_json, parse_failure_file
from .priors import BurrParams, BurrPrior, InvGammaParams, InvGammaPrior, JeffreysPrior, kde_build
from .process import PlpParams, mle_beta, mle_beta_trajectory, mle_theta
from .quadrature import QuadratureConfig
from .simulation import (
    BurrSampledBeta,
    FixedBeta,
    SimConfig,
    run_campaign,
    simresult_to_csv,
    simresult_to_dict,
)

__all__ = ["main"]


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the CLI contract reserves 2 for
    bad input data, so usage problems exit 1 instead."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser():
    parser = _Parser(prog="plpbayes", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"plpbayes {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("data", help="failure-time file (one time per line, '#' comments)")
    common.add_argument("--sorted-ok", action="store_true",
                        help="sort out-of-order input instead of rejecting it")
    common.add_argument("--out", default=None, help="output path (default: stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json",
                        help="report format (default: json)")
    common.add_argument("--trajectory-min", type=int, default=5, metavar="M",
                        help="smallest prefix length in the shape-MLE trajectory (default: 5)")

    p_mle = sub.add_parser("mle", parents=[common],
                           help="maximum likelihood fit with the shape trajectory")
    p_mle.set_defaults(func=_cmd_mle)

    p_bayes = sub.add_parser("bayes", parents=[common],
                             help="Bayes shape estimate under the Higgins-Tsokos loss")
    p_bayes.add_argument("--prior", choices=PRIOR_CHOICES, default="jeffreys")
    p_bayes.add_argument("--f1", type=float, default=1.0,
                         help="loss weight on overestimation (default: 1)")
    p_bayes.add_argument("--f2", type=float, default=1.0,
                         help="loss weight on underestimation (default: 1)")
    p_bayes.add_argument("--theta", type=float, default=None,
                         help="known scale (default: the record's scale MLE)")
    p_bayes.add_argument("--bandwidth", type=float, default=None,
                         help="kde bandwidth override (default: AMISE-optimal)")
    p_bayes.set_defaults(func=_cmd_bayes)

    p_sim = sub.add_parser("simulate", help="run a Monte Carlo campaign from a JSON config")
    p_sim.add_argument("config", help="campaign config file (JSON)")
    p_sim.add_argument("--out", default=None,
                       help="output basename; writes <out>.csv and <out>.json")
    p_sim.add_argument("--seed", type=int, default=None,
                       help="override the config's master_seed")
    p_sim.add_argument("--jobs", type=int, default=1,
                       help="parallel workers (results are identical for any value)")
    p_sim.set_defaults(func=_cmd_simulate)

    p_curve = sub.add_parser("curve", help="tabulate fitted intensity curves from a report")
    p_curve.add_argument("report", help="JSON report produced by the mle or bayes subcommand")
    p_curve.add_argument("--t-lo", type=float, required=True, help="start of the time range")
    p_curve.add_argument("--t-hi", type=float, required=True, help="end of the time range")
    p_curve.add_argument("--points", type=int, default=50,
                         help="number of log-spaced points (default: 50)")
    p_curve.add_argument("--out", default=None, help="output path (default: stdout)")
    p_curve.set_defaults(func=_cmd_curve)
    return parser


def _write_text(path, text):
    if path is None:
        sys.stdout.write(text)
        return
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _emit_report(report, args):
    text = format_report_json(report) if args.format == "json" else format_report_csv(report)
    _write_text(args.out, text)


def _quad_block(quad):
    return {
        "lower": quad.lower,
        "rel_tol": quad.rel_tol,
        "abs_tol": quad.abs_tol,
        "max_refinements": quad.max_refinements,
        "tail_drop_nats": quad.tail_drop_nats,
    }


def _estimate_block(data, beta, theta):
    form = IntensityForm.from_params(PlpParams(beta=beta, theta=theta))
    return {
        "beta": beta,
        "theta": theta,
        "intensity": {"coefficient": form.coef, "exponent": form.exponent},
        "reliability": {"beta": beta, "theta": theta, "t_prev": data.t_last},
    }


def _base_report(path, data, theta_mode):
    return {
        "tool": {"name": "plpbayes", "version": __version__},
        "input": {"path": str(path), "n": data.n, "t_last": data.t_last},
        "theta_mode": theta_mode,
    }


def _cmd_mle(args):
    data = parse_failure_file(args.data, sorted_ok=args.sorted_ok)
    beta = mle_beta(data)
    theta = mle_theta(data, beta)
    report = _base_report(args.data, data, "mle-derived")
    report["estimates"] = {"mle": _estimate_block(data, beta, theta)}
    betas = mle_beta_trajectory(data, n_min=args.trajectory_min)
    report["mle_trajectory"] = {
        "n_min": args.trajectory_min,
        "sizes": list(range(args.trajectory_min, data.n + 1)),
        "beta": betas.tolist(),
    }
    _emit_report(report, args)
    return 0


def _cmd_bayes(args):
    data = parse_failure_file(args.data, sorted_ok=args.sorted_ok)
    beta_hat = mle_beta(data)
    theta_hat = mle_theta(data, beta_hat)
    if args.theta is None:
        theta, theta_mode = theta_hat, "mle-derived"
    else:
        theta, theta_mode = args.theta, "supplied"
    prior = default_prior(data, args.prior, n_min=args.trajectory_min,
                          bandwidth=args.bandwidth)
    loss = HtLoss(f1=args.f1, f2=args.f2)
    quad = QuadratureConfig()
    spec = PosteriorSpec(data=data, theta=theta, prior=prior)
    beta_b = ht_bayes_estimate(spec, loss=loss, quad=quad)
    theta_b = adjusted_theta(data, beta_b)

    report = _base_report(args.data, data, theta_mode)
    report["loss"] = {"f1": loss.f1, "f2": loss.f2}
    report["quadrature"] = _quad_block(quad)
    report["posterior_theta"] = theta
    block = _estimate_block(data, beta_b, theta_b)
    block["prior"] = prior.describe()
    report["estimates"] = {
        "mle": _estimate_block(data, beta_hat, theta_hat),
        args.prior: block,
    }
    _emit_report(report, args)
    return 0


# config schema: top-level keys and the per-prior keys, all strictly checked
_CONFIG_KEYS = {
    "theta_values", "sample_sizes", "replicates", "beta_source", "priors",
    "f1", "f2", "master_seed", "quadrature", "re_range", "output",
}
_QUAD_KEYS = {"lower", "rel_tol", "abs_tol", "max_refinements", "tail_drop_nats"}
_PRIOR_KEYS = {
    "burr": {"kind", "name", "alpha", "gamma", "delta", "kappa"},
    "jeffreys": {"kind", "name"},
    "invgamma": {"kind", "name", "shape", "scale"},
    "kde-gauss": {"kind", "name", "sample", "bandwidth"},
    "kde-epan": {"kind", "name", "sample", "bandwidth"},
}


def _reject_unknown(mapping, allowed, where):
    unknown = sorted(set(mapping) - allowed)
    if unknown:
        raise DataError(f"{where}: unknown keys {unknown}")


def _require(mapping, key, where):
    if key not in mapping:
        raise DataError(f"{where}: missing required key {key!r}")
    return mapping[key]


def _parse_prior_spec(spec, index):
    where = f"priors[{index}]"
    if not isinstance(spec, dict):
        raise DataError(f"{where}: must be an object")
    kind = _require(spec, "kind", where)
    if kind not in _PRIOR_KEYS:
        raise DataError(f"{where}: unknown kind {kind!r}; choose from {sorted(_PRIOR_KEYS)}")
    _reject_unknown(spec, _PRIOR_KEYS[kind], where)
    name = spec.get("name", kind)
    if kind == "burr":
        params = BurrParams(
            alpha=_require(spec, "alpha", where), gamma=_require(spec, "gamma", where),
            delta=_require(spec, "delta", where), kappa=_require(spec, "kappa", where),
        )
        return name, BurrPrior(params)
    if kind == "jeffreys":
        return name, JeffreysPrior()
    if kind == "invgamma":
        params = InvGammaParams(
            shape=_require(spec, "shape", where), scale=_require(spec, "scale", where)
        )
        return name, InvGammaPrior(params)
    sample = np.asarray(_require(spec, "sample", where), dtype=float)
    kernel = "gaussian" if kind == "kde-gauss" else "epanechnikov"
    return name, kde_build(sample, kernel=kernel, bandwidth=spec.get("bandwidth"))


def _parse_sim_config(raw, source):
    if not isinstance(raw, dict):
        raise DataError(f"{source}: config must be a JSON object")
    _reject_unknown(raw, _CONFIG_KEYS, source)

    beta_raw = _require(raw, "beta_source", source)
    if not isinstance(beta_raw, dict):
        raise DataError(f"{source}: beta_source must be an object")
    _reject_unknown(beta_raw, {"fixed", "burr"}, f"{source}: beta_source")
    if ("fixed" in beta_raw) == ("burr" in beta_raw):
        raise DataError(f"{source}: beta_source needs exactly one of 'fixed' or 'burr'")
    if "fixed" in beta_raw:
        beta_source = FixedBeta(beta_raw["fixed"])
    else:
        burr = beta_raw["burr"]
        if not isinstance(burr, dict):
            raise DataError(f"{source}: beta_source.burr must be an object")
        _reject_unknown(burr, {"alpha", "gamma", "delta", "kappa"}, f"{source}: beta_source.burr")
        beta_source = BurrSampledBeta(BurrParams(**burr))

    priors_raw = _require(raw, "priors", source)
    if not isinstance(priors_raw, list) or not priors_raw:
        raise DataError(f"{source}: priors must be a non-empty list")
    priors = tuple(_parse_prior_spec(s, i) for i, s in enumerate(priors_raw))

    quad_raw = raw.get("quadrature", {})
    if not isinstance(quad_raw, dict):
        raise DataError(f"{source}: quadrature must be an object")
    _reject_unknown(quad_raw, _QUAD_KEYS, f"{source}: quadrature")
    quad = QuadratureConfig(**quad_raw)

    re_range = raw.get("re_range")
    if re_range is not None:
        if not isinstance(re_range, list) or len(re_range) != 2:
            raise DataError(f"{source}: re_range must be a two-element list")
        re_range = tuple(re_range)

    output = raw.get("output")
    if output is not None:
        if not isinstance(output, dict):
            raise DataError(f"{source}: output must be an object")
        _reject_unknown(output, {"path"}, f"{source}: output")
        output = _require(output, "path", f"{source}: output")

    config = SimConfig(
        theta_values=tuple(_require(raw, "theta_values", source)),
        sample_sizes=tuple(_require(raw, "sample_sizes", source)),
        replicates=_require(raw, "replicates", source),
        beta_source=beta_source,
        priors=priors,
        loss=HtLoss(f1=raw.get("f1", 1.0), f2=raw.get("f2", 1.0)),
        master_seed=raw.get("master_seed", 0),
        quad=quad,
        re_range=re_range,
    )
    return config, output


def _cmd_simulate(args):
    try:
        with open(args.config, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read {args.config}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{args.config}: invalid JSON: {exc}") from None
    config, config_out = _parse_sim_config(raw, args.config)
    if args.seed is not None:
        if args.seed < 0:
            raise DataError("--seed must be >= 0")
        config = SimConfig(**{**_config_kwargs(config), "master_seed": args.seed})
    out = args.out or config_out
    if out is None:
        raise DataError("no output basename: pass --out or set output.path in the config")

    result = run_campaign(config, n_jobs=args.jobs)
    _write_text(f"{out}.csv", simresult_to_csv(result))
    _write_text(f"{out}.json", format_report_json(simresult_to_dict(result)))
    return 0


def _config_kwargs(config):
    return {
        "theta_values": config.theta_values,
        "sample_sizes": config.sample_sizes,
        "replicates": config.replicates,
        "beta_source": config.beta_source,
        "priors": config.priors,
        "loss": config.loss,
        "master_seed": config.master_seed,
        "quad": config.quad,
        "re_range": config.re_range,
        "keep_replicates": config.keep_replicates,
    }


def _cmd_curve(args):
    if args.t_lo <= 0.0:
        raise DataError("--t-lo must be strictly positive")
    if args.t_hi <= args.t_lo:
        raise DataError("--t-hi must exceed --t-lo")
    if args.points < 2:
        raise DataError("--points must be at least 2")
    try:
        with open(args.report, encoding="utf-8") as fh:
            report = json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read {args.report}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{args.report}: invalid JSON: {exc}") from None
    estimates = report.get("estimates")
    if not isinstance(estimates, dict) or not estimates:
        raise DataError(f"{args.report}: no fitted intensities found")

    grid = np.geomspace(args.t_lo, args.t_hi, args.points)
    lines = ["estimator,t,intensity"]
    for label, block in estimates.items():
        try:
            coef = float(block["intensity"]["coefficient"])
            exponent = float(block["intensity"]["exponent"])
        except (KeyError, TypeError, ValueError):
            raise DataError(
                f"{args.report}: estimate {label!r} has no intensity form"
            ) from None
        for t, v in zip(grid, coef * grid**exponent):
            lines.append(f"{label},{t:.6g},{v:.6g}")
    _write_text(args.out, "\n".join(lines) + "\n")
    return 0


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DataError as exc:
        print(f"plpbayes: error: {exc}", file=sys.stderr)
        return 2
    except EstimationError as exc:
        print(f"plpbayes: error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
