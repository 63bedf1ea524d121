"""Command-line front end: ingest, fit, test and summarize wealth data."""

from __future__ import annotations

import argparse
import itertools
import json
import logging
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import diagnostics as diag
from .errors import (
    ConvergenceError,
    DomainError,
    IngestError,
    InsufficientDataError,
    MeanSignError,
    MomentDivergenceError,
    NoDataError,
    NoPowerTailError,
    UnreliablePValueError,
)
from .estimation import FitConfig, fit_mixture
from .gof import bootstrap_pvalue, information_criteria, rmse_cdf, vuong_test
from .ingest import ColumnMap, load_deflators, load_records, preprocess, write_rejects
from .mixture import MixtureParams

log = logging.getLogger("netwealth")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INGEST = 3
EXIT_NO_DATA = 4
EXIT_CONVERGENCE = 5
EXIT_VALIDATION = 6

FAMILY_CHOICES = ("sm", "dagum", "kgen")

EXIT_HELP = f"""exit status:
  {EXIT_OK}  success
  {EXIT_USAGE}  bad command-line usage
  {EXIT_INGEST}  input could not be read (missing file or column, bad deflators)
  {EXIT_NO_DATA}  no usable rows after rejects
  {EXIT_CONVERGENCE}  one or more fits or bootstrap runs failed
  {EXIT_VALIDATION}  invalid parameters, data outside a model's domain, or mismatched reports
"""


class ValidationFailure(Exception):
    pass


# -- helpers ----------------------------------------------------------------


def _finite_or_none(x):
    return float(x) if x is not None and math.isfinite(x) else None


def _implied(m):
    """Implied mean, Gini and tail index; ``None`` where the quantity does not exist."""
    out = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for key, fn in (("mean", lambda: m.mean), ("gini", m.gini_closed), ("gamma", m.tail_index)):
            try:
                out[key] = _finite_or_none(fn())
            except (MomentDivergenceError, MeanSignError, NoPowerTailError):
                out[key] = None
    return out


def _load_samples(args):
    columns = ColumnMap.parse(args.columns)
    records, rejects = load_records(args.input, columns)
    if rejects:
        log.warning("%d row(s) rejected", len(rejects))
        if args.out:
            Path(args.out).mkdir(parents=True, exist_ok=True)
            write_rejects(rejects, Path(args.out) / "rejects.csv")
    deflators = load_deflators(args.deflators) if args.deflators else None
    return preprocess(records, deflators)


def _families(flag):
    return FAMILY_CHOICES if flag == "all" else (flag,)


def _fmt(x, fmt=".6g"):
    return "-" if x is None else format(x, fmt)


def _table(header, rows):
    cells = [header] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells)


def _emit(args, name, text, payload):
    print(text)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{name}.txt").write_text(text + "\n")
        (out / f"{name}.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _vuong_entries(sample, fits):
    entries = []
    ok = {f: r["_params"] for f, r in fits.items() if "_params" in r}
    for a, b in itertools.combinations(sorted(ok), 2):
        try:
            v = vuong_test(sample, ok[a], ok[b])
            entries.append({"model_a": a, "model_b": b, "statistic": v.statistic, "pvalue": v.pvalue, "favored": v.favored})
        except (DomainError, ValueError) as exc:
            entries.append({"model_a": a, "model_b": b, "error": str(exc)})
    return entries


# -- commands ---------------------------------------------------------------


def cmd_summarize(args):
    samples = _load_samples(args)
    rows, payload = [], {}
    mode = "normalized" if args.gini_normalized else "covariance"
    for period, s in samples.items():
        st = diag.summary_stats(s, args.gini_normalized)
        share20 = diag.top_share(s, 0.2)
        d = st.as_dict() | {"top20_share": share20}
        payload[period] = d
        rows.append([period, st.n_obs, _fmt(st.mean), _fmt(st.median), _fmt(st.skewness, ".4f"), _fmt(st.kurtosis, ".4f"),
                     _fmt(st.gini, ".4f"), _fmt(st.share_negative, ".4f"), _fmt(st.share_zero, ".4f"),
                     _fmt(st.share_positive, ".4f"), _fmt(share20, ".4f")])
    header = ["period", "n", "mean", "median", "skewness", "kurtosis", f"gini[{mode}]",
              "share<0", "share=0", "share>0", "top20_share"]
    text = _table(header, rows)
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        lines = ["\t".join(header)] + ["\t".join(str(c) for c in r) for r in rows]
        (Path(args.out) / "summary.tsv").write_text("\n".join(lines) + "\n")
    _emit(args, "summary", text, {"command": "summarize", "gini_mode": mode, "periods": payload})
    return EXIT_OK


def _fit_entry(sample, family, cfg):
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            fr = fit_mixture(sample, family, cfg)
    except (ConvergenceError, InsufficientDataError, DomainError) as exc:
        return {"model": family, "converged": False, "error": f"{type(exc).__name__}: {exc}"}
    aic, bic = information_criteria(fr.loglik, fr.n_params, fr.n_obs)
    entry = {
        "model": family,
        "converged": fr.converged,
        "params": fr.params.as_dict(),
        "std_errors": {k: float(v) for k, v in fr.std_errors.items()},
        "loglik": fr.loglik,
        "n_params": fr.n_params,
        "n_obs": fr.n_obs,
        "effective_size": fr.effective_size,
        "iterations": fr.iterations,
        "saddle_point": fr.saddle_point,
        "aic": aic,
        "bic": bic,
        "_params": fr.params,
        "_fit": fr,
    }
    entry.update(_implied(fr.params))
    return entry


def _public(entry):
    return {k: v for k, v in entry.items() if not k.startswith("_")}


def _fit_rows(period, fits):
    rows = []
    ranked = sorted(fits.values(), key=lambda e: (e.get("aic") is None, e.get("aic") or 0.0))
    for e in ranked:
        if "params" not in e:
            rows.append([period, e["model"], "failed", "-", "-", "-", "-", "-", "-", e["error"]])
            continue
        p = ", ".join(f"{k}={_fmt(v, '.5g')}±{_fmt(e['std_errors'].get(k), '.2g')}" for k, v in e["params"].items() if k != "model")
        rows.append([period, e["model"], _fmt(e["loglik"], ".2f"), _fmt(e["aic"], ".1f"), _fmt(e["bic"], ".1f"),
                     _fmt(e["mean"]), _fmt(e["gini"], ".4f"), _fmt(e["gamma"], ".4f"), e["n_params"], p])
    return rows


FIT_HEADER = ["period", "model", "loglik", "aic[-2l+2k]", "bic[-2l+k*lnN]", "mean[closed-form]",
              "gini[closed-form]", "gamma[tail-index]", "k", "estimates±se"]


def cmd_fit(args):
    if args.params:
        m = MixtureParams.from_text(Path(args.params).read_text())
        imp = _implied(m)
        rows = [[m.family, _fmt(imp["mean"]), _fmt(imp["gini"], ".4f"), _fmt(imp["gamma"], ".4f")]]
        text = _table(["model", "mean[closed-form]", "gini[closed-form]", "gamma[tail-index]"], rows)
        _emit(args, "fit_report", text, {"command": "fit", "replay": True, "params": m.as_dict(), **imp})
        return EXIT_OK
    if not args.input:
        raise ValidationFailure("fit needs --input or --params")
    samples = _load_samples(args)
    cfg = FitConfig()
    payload, rows, n_ok, n_all = {}, [], 0, 0
    for period, s in samples.items():
        fits = {f: _fit_entry(s, f, cfg) for f in _families(args.family)}
        n_all += len(fits)
        n_ok += sum(1 for e in fits.values() if e.get("converged"))
        payload[period] = {"fits": {f: _public(e) for f, e in fits.items()}, "vuong": _vuong_entries(s, fits)}
        rows += _fit_rows(period, fits)
    _emit(args, "fit_report", _table(FIT_HEADER, rows), {"command": "fit", "periods": payload})
    return EXIT_OK if n_ok == n_all else EXIT_CONVERGENCE


def _fits_from_report(path, samples):
    rep = json.loads(Path(path).read_text())
    periods = rep.get("periods", {})
    if set(periods) != set(samples):
        raise ValidationFailure(f"report periods {sorted(periods)} do not match data periods {sorted(samples)}")
    out = {}
    for period, block in periods.items():
        out[period] = {}
        for fam, e in block["fits"].items():
            if "params" in e:
                m = MixtureParams.from_dict(e["params"])
                out[period][fam] = {"model": fam, "loglik": e["loglik"], "n_params": e["n_params"], "_params": m}
    return out


def cmd_gof(args):
    samples = _load_samples(args)
    cfg = FitConfig()
    if args.report:
        fitted = _fits_from_report(args.report, samples)
    else:
        fitted = {p: {f: _fit_entry(s, f, cfg) for f in _families(args.family)} for p, s in samples.items()}
    payload, rows, vrows, status = {}, [], [], EXIT_OK
    for period, s in samples.items():
        fam_out = {}
        for fam, e in sorted(fitted[period].items()):
            if "_params" not in e:
                fam_out[fam] = {"error": e.get("error", "fit failed")}
                status = EXIT_CONVERGENCE
                continue
            m = e["_params"]
            aic, bic = information_criteria(e["loglik"], e["n_params"], s.n)
            rec = {"aic": aic, "bic": bic, "rmse": rmse_cdf(s, m), "bootstrap_replications": args.boot,
                   "bootstrap_method": args.boot_method, "seed": args.seed}
            try:
                b = bootstrap_pvalue(s, fam, B=args.boot, seed=args.seed, cfg=cfg, method=args.boot_method,
                                     fit=e.get("_fit") or _StoredFit(m), workers=args.workers)
                rec.update(ad_statistic=b.observed, ad_pvalue=b.pvalue, bootstrap_failures=b.failures,
                           pvalue_granularity=b.granularity)
            except (UnreliablePValueError, DomainError, ValueError) as exc:
                rec.update(ad_statistic=None, ad_pvalue=None, error=f"{type(exc).__name__}: {exc}")
                status = EXIT_CONVERGENCE
            fam_out[fam] = rec
            rows.append([period, fam, _fmt(rec["aic"], ".1f"), _fmt(rec["bic"], ".1f"), _fmt(100 * rec["rmse"], ".4f"),
                         _fmt(rec["ad_statistic"], ".4f"), _fmt(rec["ad_pvalue"], ".3f"), args.boot])
        vu = _vuong_entries(s, fitted[period])
        for v in vu:
            vrows.append([period, v["model_a"], v["model_b"], _fmt(v.get("statistic"), ".4f"),
                          _fmt(v.get("pvalue"), ".3g"), v.get("favored", v.get("error"))])
        payload[period] = {"gof": fam_out, "vuong": vu}
    text = _table(["period", "model", "aic", "bic", "rmse[cdf]x100", "A2[weighted-AD]", "p[bootstrap]", "B"], rows)
    text += "\n\n" + _table(["period", "model_a", "model_b", "vuong[z]", "p[two-sided]", "favored"], vrows)
    _emit(args, "gof_report", text, {"command": "gof", "periods": payload})
    return status


class _StoredFit:
    """Minimal stand-in for a fit result when parameters come from a report."""

    def __init__(self, params):
        self.params = params


def _model_overlay(args, samples):
    if not args.report:
        return {}
    return _fits_from_report(args.report, samples)


def cmd_series(args):
    samples = _load_samples(args)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    written = []

    def put(table, name):
        p = out / f"{name}.tsv"
        table.write(p)
        written.append(str(p))

    overlay = _model_overlay(args, samples)
    if args.series == "trend":
        try:
            xs = np.array([float(k) for k in samples])
        except ValueError:
            raise ValidationFailure("trend needs numeric period keys") from None
        order = np.argsort(xs)
        keys = [list(samples)[i] for i in order]
        stats = {
            "mean": [samples[k].weighted_mean() for k in keys],
            "gini": [diag.empirical_gini(samples[k], args.gini_normalized) for k in keys],
            "top20_share": [diag.top_share(samples[k], 0.2) for k in keys],
        }
        for name, ys in stats.items():
            t = diag.SeriesTable(f"{name} by period", xs[order], np.array(ys))
            if args.base is not None:
                t = diag.index_numbers(t, float(args.base))
            put(t, f"trend_{name}")
    else:
        for period, s in samples.items():
            models = overlay.get(period, {})
            if args.series == "lorenz":
                t = diag.empirical_lorenz(s)
                put(t, f"lorenz_{period}")
                for fam, e in models.items():
                    m = e["_params"]
                    put(diag.SeriesTable(f"model Lorenz curve ({fam})", t.x, m.lorenz(t.x)), f"lorenz_{period}_{fam}")
            elif args.series == "mean-excess":
                put(diag.mean_excess_series(s), f"mean_excess_{period}")
            else:
                t = diag.zipf_series(s)
                put(t, f"zipf_{period}")
                for fam, e in models.items():
                    m = e["_params"]
                    surv = np.asarray(m.positive.sf(np.exp(t.x)), dtype=float)
                    with np.errstate(divide="ignore"):
                        put(diag.SeriesTable(f"model survivor among positives ({fam})", t.x, np.log(surv)),
                            f"zipf_{period}_{fam}")
    print("\n".join(written))
    return EXIT_OK


def cmd_simulate(args):
    m = MixtureParams.from_text(Path(args.params).read_text())
    s = m.sample(args.n, args.seed)
    path = Path(args.out)
    path.parent.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    vals = s.values[rng.permutation(s.n)] if args.shuffle else s.values
    lines = ["wealth,weight,size,period"] + [f"{v!r},1.0,1,{args.period}" for v in vals.tolist()]
    path.write_text("\n".join(lines) + "\n")
    print(str(path))
    return EXIT_OK


# -- entry point --------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="netwealth",
        description="Fit and assess finite-mixture models of net wealth.",
        epilog=EXIT_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def data_flags(p, required=True):
        p.add_argument("--input", required=required, help="delimited data file with a header row")
        p.add_argument("--columns", default="wealth:weight:size:period",
                       help="header names as wealth:weight:size:period (leave size/period empty if absent)")
        p.add_argument("--deflators", help="two-column period,deflator file (base period = 1)")
        p.add_argument("--out", help="directory for reports and series files")

    p = sub.add_parser("summarize", help="weighted summary statistics per period", epilog=EXIT_HELP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    data_flags(p)
    p.add_argument("--gini-normalized", action="store_true", help="divide the Gini by 1 - rho L(theta1)")
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("fit", help="maximum likelihood fits per period", epilog=EXIT_HELP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    data_flags(p, required=False)
    p.add_argument("--family", choices=(*FAMILY_CHOICES, "all"), default="all")
    p.add_argument("--params", help="key=value parameter file; report implied statistics without fitting")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("gof", help="RMSE, Anderson-Darling with bootstrap p-values, Vuong tests", epilog=EXIT_HELP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    data_flags(p)
    p.add_argument("--family", choices=(*FAMILY_CHOICES, "all"), default="all")
    p.add_argument("--report", help="fit_report.json from the fit command (otherwise fit afresh)")
    p.add_argument("--boot", type=int, default=100, help="bootstrap replications (default 100)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--boot-method", choices=("nonparametric", "parametric"), default="nonparametric")
    p.add_argument("--workers", type=int, default=1, help="processes for bootstrap replicates")
    p.set_defaults(func=cmd_gof)

    p = sub.add_parser("series", help="plot-ready two-column series", epilog=EXIT_HELP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    data_flags(p)
    p.add_argument("--series", choices=("lorenz", "mean-excess", "zipf", "trend"), required=True)
    p.add_argument("--report", help="fit_report.json for model overlays (lorenz, zipf)")
    p.add_argument("--base", help="base period for index numbers (trend)")
    p.add_argument("--gini-normalized", action="store_true")
    p.set_defaults(func=cmd_series)

    p = sub.add_parser("simulate", help="draw a unit-weight sample from a parameter file", epilog=EXIT_HELP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--params", required=True, help="key=value parameter file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--period", default="sim")
    p.add_argument("--shuffle", action="store_true", help="write rows in random order instead of sorted")
    p.add_argument("--out", required=True, help="output data file")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except NoDataError as exc:
        log.error("%s", exc)
        return EXIT_NO_DATA
    except IngestError as exc:
        log.error("%s", exc)
        return EXIT_INGEST
    except ConvergenceError as exc:
        log.error("%s", exc)
        return EXIT_CONVERGENCE
    except (ValidationFailure, DomainError, MeanSignError, InsufficientDataError, ValueError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
