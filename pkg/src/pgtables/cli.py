"""Command-line front end: fit models, draw diagnostics, summarize chains.

Exit codes: 0 on success, 2 on validation problems (bad flags, malformed
CSV/JSON, incompatible prior/method), 3 on numerical failure inside an
engine.  Every result file references the JSON run manifest written
alongside it.
"""

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .em import EMConfig, ecm_fit, em_fit
from .exceptions import NumericalError, PGTablesError
from .gibbs import GibbsConfig, PosteriorChain, run_gibbs, summarize
from .multinomial import multinomial_gibbs, summarize_multinomial
from .polya_gamma import DEFAULT_TRUNCATION, PGParams, TruncationConfig, pg_mean, pg_sample
from .priors import (
    MatrixNormalPrior,
    NIWHyper,
    NormalPrior,
    ZPseudoCounts,
    load_prior_json,
    skene_wakefield_prior,
)
from .tables import ARMS, load_multinomial_csv, load_two_arm_csv, skene_wakefield_table

__all__ = ["main"]

_EXAMPLES = ("skene-wakefield",)

# stand-in normal prior when a Z prior supplies the only regularization:
# wide enough that the pseudo-count-tilted kernel dominates
_DIFFUSE_SIGMA = ((1e6, 0.0), (0.0, 1e6))


@dataclass
class RunManifest:
    """Record of one CLI invocation, written next to its result files."""

    command: list
    inputs: dict
    config: dict
    outputs: list = field(default_factory=list)
    version: str = __version__
    duration_seconds: float = 0.0

    def write(self, path):
        payload = {
            "command": self.command,
            "inputs": self.inputs,
            "config": self.config,
            "outputs": [str(p) for p in self.outputs],
            "version": self.version,
            "duration_seconds": self.duration_seconds,
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")


def _default_manifest_path(out_path):
    out_path = Path(out_path)
    return out_path.with_name(out_path.stem + "_manifest.json")


def _write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _load_inputs(args):
    """Resolve (table, prior, inputs-description) from flags or the embedded example."""
    if args.example is not None:
        if args.data is not None:
            raise ValueError("pass either --data or --example, not both")
        if args.example not in _EXAMPLES:
            raise ValueError(f"unknown example {args.example!r}; available: {', '.join(_EXAMPLES)}")
        table = skene_wakefield_table()
        if args.prior is not None:
            prior = load_prior_json(args.prior)
            prior_desc = str(args.prior)
        else:
            prior = skene_wakefield_prior()
            prior_desc = f"embedded:{args.example}"
        return table, prior, {"data": f"embedded:{args.example}", "prior": prior_desc}
    if args.data is None or args.prior is None:
        raise ValueError("--data and --prior are required unless --example is used")
    if args.method == "multinomial-gibbs":
        table = load_multinomial_csv(args.data, baseline=args.baseline)
    else:
        table = load_two_arm_csv(args.data)
    return table, load_prior_json(args.prior), {"data": str(args.data), "prior": str(args.prior)}


def _split_prior(prior, method):
    """Map a parsed prior onto (normal-or-niw prior, pseudo-counts) for the method."""
    if isinstance(prior, ZPseudoCounts):
        return NormalPrior((0.0, 0.0), _DIFFUSE_SIGMA), prior
    if isinstance(prior, MatrixNormalPrior):
        raise ValueError("a matrix-normal prior requires --method multinomial-gibbs")
    if isinstance(prior, NIWHyper) and method == "em":
        raise ValueError("--method em holds (mu, sigma) fixed; use a normal or z prior, or --method ecm/gibbs")
    return prior, None


def _psi_report(state, table):
    return {
        "center_labels": list(table.labels),
        "arms": list(ARMS),
        "psi": state.psi.tolist(),
        "mu": state.mu.tolist(),
        "sigma": state.sigma.tolist(),
        "n_iter": state.n_iter,
        "converged": state.converged,
        "log_posterior": state.log_posterior,
    }


def _chain_worker(job):
    table, prior, config, z = job
    return run_gibbs(table, prior, config=config, z=z)


def _run_chains(table, prior, base_config, z, n_chains):
    if n_chains == 1:
        return run_gibbs(table, prior, config=base_config, z=z)
    configs = [
        GibbsConfig(
            iters=base_config.iters,
            burnin=base_config.burnin,
            thin=base_config.thin,
            seed=base_config.seed + i,
            trunc=base_config.trunc,
            hyper_mode=base_config.hyper_mode,
        )
        for i in range(n_chains)
    ]
    jobs = [(table, prior, cfg, z) for cfg in configs]
    with ProcessPoolExecutor(max_workers=min(n_chains, 8)) as pool:
        chains = list(pool.map(_chain_worker, jobs))
    return PosteriorChain.concat(chains)


def cmd_fit(args):
    start = time.perf_counter()
    table, prior, input_desc = _load_inputs(args)
    out_path = Path(args.out)
    manifest_path = Path(args.manifest) if args.manifest else _default_manifest_path(out_path)
    outputs = [out_path]

    if args.method in ("em", "ecm"):
        if args.method == "em":
            update = args.update_hyper or "none"
            if update != "none":
                raise ValueError("--method em cannot update hyperparameters; use --method ecm")
        else:
            update = args.update_hyper or "mu_and_sigma"
            if update == "none":
                raise ValueError("--method ecm updates hyperparameters; use --method em to keep them fixed")
        config = EMConfig(tol=args.tol, max_iter=args.max_iter, update_hyper=update)
        prior, z = _split_prior(prior, args.method)
        penalty = None
        if isinstance(prior, NIWHyper):
            # seed ECM at the hyperprior's mean and keep it as a penalty
            penalty = prior
            prior = NormalPrior((0.0, 0.0), prior.B / (prior.d - 3.0))
        if args.method == "em":
            state = em_fit(table, prior, z=z, config=config)
        else:
            state = ecm_fit(table, prior, z=z, config=config, niw_penalty=penalty)
        report = {"manifest": str(manifest_path), "method": args.method, **_psi_report(state, table)}
        _write_json(out_path, report)
    elif args.method == "gibbs":
        config = _gibbs_config(args)
        prior, z = _split_prior(prior, args.method)
        chain = _run_chains(table, prior, config, z, args.chains)
        summary = summarize(chain)
        report = {
            "manifest": str(manifest_path),
            "method": "gibbs",
            "n_chains": args.chains,
            "center_labels": list(table.labels),
            **summary.to_dict(),
        }
        _write_json(out_path, report)
        if args.save_draws:
            chain.to_csv(args.save_draws, manifest=manifest_path)
            outputs.append(Path(args.save_draws))
    else:  # multinomial-gibbs
        if not isinstance(prior, MatrixNormalPrior):
            raise ValueError("--method multinomial-gibbs requires a matrix-normal prior")
        if args.chains != 1:
            raise ValueError("--chains applies to --method gibbs only")
        chain = multinomial_gibbs(table, prior, config=_gibbs_config(args))
        report = {
            "manifest": str(manifest_path),
            "method": "multinomial-gibbs",
            "n_draws": len(chain),
            "center_labels": list(table.center_labels),
            "treatment_labels": list(table.treatment_labels),
            "outcome_labels": list(table.outcome_labels),
            "scalars": summarize_multinomial(chain),
            "mean_probs": chain.mean_probs().tolist(),
        }
        _write_json(out_path, report)
        if args.save_draws:
            chain.to_csv(args.save_draws, manifest=manifest_path)
            outputs.append(Path(args.save_draws))

    manifest = RunManifest(
        command=["pgtables"] + (args.raw_argv or []),
        inputs=input_desc,
        config=_config_echo(args),
        outputs=outputs,
        duration_seconds=time.perf_counter() - start,
    )
    manifest.write(manifest_path)
    return 0


def _gibbs_config(args):
    trunc = TruncationConfig(args.trunc_k) if args.trunc_k else DEFAULT_TRUNCATION
    return GibbsConfig(
        iters=args.iters, burnin=args.burnin, thin=args.thin, seed=args.seed, trunc=trunc
    )


def _config_echo(args):
    keys = (
        "method", "tol", "max_iter", "update_hyper", "iters", "burnin",
        "thin", "seed", "trunc_k", "chains", "baseline",
    )
    return {k: getattr(args, k, None) for k in keys}


def cmd_pg_sample(args):
    if args.n < 1:
        raise ValueError(f"--n must be at least 1, got {args.n}")
    params = PGParams(args.a, args.c)
    trunc = TruncationConfig(args.trunc_k) if args.trunc_k else DEFAULT_TRUNCATION
    rng = np.random.default_rng(args.seed)
    draws = pg_sample(params, trunc=trunc, rng=rng, size=args.n)
    for value in np.atleast_1d(draws):
        print(repr(float(value)))
    print(f"# sample_mean={float(np.mean(draws))!r} pg_mean={pg_mean(params)!r}")
    return 0


def _format_mle(value):
    if np.isneginf(value):
        return "-inf"
    if np.isposinf(value):
        return "+inf"
    if np.isnan(value):
        return "nan"
    return repr(float(value))


def cmd_summarize(args):
    start = time.perf_counter()
    chain = PosteriorChain.from_csv(args.draws)
    table = load_two_arm_csv(args.data)
    if chain.labels != table.labels:
        raise ValueError(
            f"chain centers {list(chain.labels)} do not match data centers {list(table.labels)}"
        )
    out_summary = Path(args.out_summary)
    out_plot = Path(args.out_plot)
    out_scatter = (
        Path(args.out_scatter)
        if args.out_scatter
        else out_plot.with_name(out_plot.stem + "_mu_scatter.csv")
    )
    manifest_path = Path(args.manifest) if args.manifest else _default_manifest_path(out_summary)

    summary = summarize(chain)
    _write_json(out_summary, {"manifest": str(manifest_path), **summary.to_dict()})

    mles = table.mle_log_odds()
    with open(out_plot, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# manifest: {manifest_path}\n")
        fh.write("param,center,arm,mle,mean,q2.5,q97.5\n")
        for i, label in enumerate(table.labels):
            for j, arm in enumerate(ARMS):
                name = f"psi_{label}_{arm}"
                stats = summary.scalars[name]
                fh.write(
                    f"{name},{label},{arm},{_format_mle(mles[i, j])},"
                    f"{stats['mean']!r},{stats['q2.5']!r},{stats['q97.5']!r}\n"
                )

    # deterministic evenly-spaced subsample of the population-mean draws
    m = len(chain)
    idx = np.unique(np.linspace(0, m - 1, num=min(m, 1000)).astype(int))
    with open(out_scatter, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# manifest: {manifest_path}\n")
        fh.write("mu_1,mu_2\n")
        for row in chain.mu[idx]:
            fh.write(f"{float(row[0])!r},{float(row[1])!r}\n")

    manifest = RunManifest(
        command=["pgtables"] + (args.raw_argv or []),
        inputs={"draws": str(args.draws), "data": str(args.data)},
        config={},
        outputs=[out_summary, out_plot, out_scatter],
        duration_seconds=time.perf_counter() - start,
    )
    manifest.write(manifest_path)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pgtables",
        description="Bayesian log-odds inference for 2x2xN and JxKxN contingency tables.",
    )
    parser.add_argument("--version", action="version", version=f"pgtables {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    fit = sub.add_parser("fit", help="fit a table with EM, ECM, or Gibbs sampling")
    fit.add_argument("--data", help="table CSV path")
    fit.add_argument("--prior", help="prior-specification JSON path")
    fit.add_argument(
        "--example", choices=_EXAMPLES, help="run an embedded example table and prior"
    )
    fit.add_argument(
        "--method", required=True, choices=["em", "ecm", "gibbs", "multinomial-gibbs"]
    )
    fit.add_argument("--tol", type=float, default=1e-8, help="EM convergence tolerance")
    fit.add_argument("--max-iter", type=int, default=10_000, help="EM iteration cap")
    fit.add_argument(
        "--update-hyper",
        choices=["none", "mu_only", "mu_and_sigma"],
        default=None,
        help="which hyperparameters ECM re-estimates (default mu_and_sigma for ecm)",
    )
    fit.add_argument("--iters", type=int, default=20_000, help="Gibbs sweeps")
    fit.add_argument("--burnin", type=int, default=5_000, help="discarded initial sweeps")
    fit.add_argument("--thin", type=int, default=1, help="keep every thin-th sweep")
    fit.add_argument("--seed", type=int, default=0, help="RNG seed")
    fit.add_argument("--trunc-k", type=int, default=None, help="series truncation length")
    fit.add_argument("--chains", type=int, default=1, help="independent Gibbs chains (seeds seed..seed+n-1)")
    fit.add_argument("--baseline", default=None, help="baseline outcome label (multinomial)")
    fit.add_argument("--out", default="fit_result.json", help="result JSON path")
    fit.add_argument("--save-draws", default=None, help="also write the chain CSV here")
    fit.add_argument("--manifest", default=None, help="manifest JSON path")
    fit.set_defaults(func=cmd_fit)

    pg = sub.add_parser("pg-sample", help="draw from the latent-precision distribution")
    pg.add_argument("--a", type=float, required=True, help="shape parameter (>= 0)")
    pg.add_argument("--c", type=float, required=True, help="tilt parameter")
    pg.add_argument("--n", type=int, required=True, help="number of draws")
    pg.add_argument("--seed", type=int, default=0)
    pg.add_argument("--trunc-k", type=int, default=None, help="series truncation length")
    pg.set_defaults(func=cmd_pg_sample)

    summ = sub.add_parser("summarize", help="summarize a saved chain against its table")
    summ.add_argument("--draws", required=True, help="chain CSV from fit --save-draws")
    summ.add_argument("--data", required=True, help="table CSV the chain was fit to")
    summ.add_argument("--out-summary", default="summary.json")
    summ.add_argument("--out-plot", default="plot_data.csv")
    summ.add_argument("--out-scatter", default=None, help="population-mean scatter CSV path")
    summ.add_argument("--manifest", default=None, help="manifest JSON path")
    summ.set_defaults(func=cmd_summarize)

    return parser


def main(argv=None):
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    args = parser.parse_args(argv)
    args.raw_argv = list(argv)
    try:
        return args.func(args)
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (PGTablesError, ValueError, TypeError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
