"""Batch front-end: measure radius distributions, evaluate WER, report asymptotics.

Subcommands
    measure  sample the decision-region radii -> samples.csv + summary.json
    wer      evaluate WER curves by one or more methods -> CSV per method
    report   critical SNR / quantile-width summary -> report.json + table

Symbol polarity is fixed: bit 0 -> +sqrt(Es), bit 1 -> -sqrt(Es). Every
output embeds the result-determining configuration in '#' header lines;
execution knobs (--threads, --out) are omitted there because they cannot
change any value.

Exit codes: 0 success, 2 configuration error, 3 decoder invariant violation,
4 missing dependency between stages (e.g. sample-based WER without samples).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import wer as _wer
from .codes import AlistParseError, code_from_spec, ldpc_from_alist
from .decoders import make_decoder
from .modem import snr_from_eb_n0
from .montecarlo import McConfig, simulate_wer
from .srpdf import (
    DEFAULT_LAMBDA_CAP_LN,
    DEFAULT_PROBE_EB_N0_DB,
    DEFAULT_REL_TOL,
    InvariantViolationError,
    estimate_srpdf,
    fit_gamma,
    read_samples_csv,
    write_samples_csv,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3
EXIT_MISSING_STAGE = 4


class ConfigError(ValueError):
    pass


class MissingStageError(RuntimeError):
    pass


def _parse_seed(text: str) -> int:
    try:
        return int(text, 0)
    except ValueError:
        raise ConfigError(f"seed must be a decimal or 0x-hex integer, got {text!r}")


def _parse_sweep(text: str) -> list[float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"sweep must be start:stop:step, got {text!r}")
    start, stop, step = (float(p) for p in parts)
    if step <= 0.0 or stop < start:
        raise ConfigError(f"sweep needs step > 0 and stop >= start, got {text!r}")
    points = []
    x = start
    while x <= stop + 1e-9:
        points.append(round(x, 12))
        x += step
    if not points:
        raise ConfigError("empty sweep")
    return points


def _read_config_file(path: str) -> dict[str, str]:
    cfg = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}")
    for ln, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{ln}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        cfg[key.strip().replace("-", "_")] = value.strip()
    return cfg


def _merge_config(args: argparse.Namespace, defaults: dict) -> argparse.Namespace:
    """Fill argparse Nones from the config file, then from hard defaults. Flags win."""
    file_cfg = _read_config_file(args.config) if getattr(args, "config", None) else {}
    for key, default in defaults.items():
        if getattr(args, key, None) is None:
            if key in file_cfg:
                setattr(args, key, file_cfg[key])
            else:
                setattr(args, key, default)
    return args


def _build_code(args):
    spec = args.code
    if spec in ("ldpc", "alist"):
        if not args.alist:
            raise ConfigError("--code ldpc requires --alist PATH")
        path = Path(args.alist)
        if not path.exists():
            raise ConfigError(f"alist file not found: {path}")
        try:
            return ldpc_from_alist(path.read_text(), name=f"ldpc({path.name})")
        except AlistParseError as exc:
            raise ConfigError(f"bad alist {path}: {exc}")
    try:
        return code_from_spec(spec)
    except (ValueError, OSError) as exc:
        raise ConfigError(f"bad code spec {spec!r}: {exc}")


def _config_header(args, keys) -> list[str]:
    """'key=value' lines for the result-determining part of the config."""
    pairs = []
    for key in keys:
        val = getattr(args, key, None)
        if val is not None:
            pairs.append(f"{key}={val}")
    return pairs


_MEASURE_DEFAULTS = {
    "code": "hamming74",
    "alist": None,
    "decoder": "ml",
    "iters": 25,
    "channel": "awgn",
    "samples": 1000,
    "seed": "1",
    "probe_ebn0": DEFAULT_PROBE_EB_N0_DB,
    "rel_tol": DEFAULT_REL_TOL,
    "cap_ln": DEFAULT_LAMBDA_CAP_LN,
    "audit_fraction": 0.05,
    "threads": 1,
}

_MEASURE_HEADER_KEYS = (
    "code", "alist", "decoder", "iters", "channel", "samples", "seed",
    "probe_ebn0", "rel_tol", "cap_ln", "audit_fraction",
)


def cmd_measure(args) -> int:
    args = _merge_config(args, _MEASURE_DEFAULTS)
    code = _build_code(args)
    decoder = make_decoder(args.decoder, code, int(args.iters))
    seed = _parse_seed(str(args.seed))
    num_samples = int(args.samples)
    if num_samples < 1:
        raise ConfigError("--samples must be >= 1")
    est = estimate_srpdf(
        code,
        decoder,
        num_samples,
        seed,
        channel=args.channel,
        probe_eb_n0_db=float(args.probe_ebn0),
        lambda_cap_ln=float(args.cap_ln),
        rel_tol=float(args.rel_tol),
        audit_fraction=float(args.audit_fraction),
        threads=int(args.threads),
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    header = _config_header(args, _MEASURE_HEADER_KEYS)
    header += [f"n={code.n}", f"rate={code.rate!r}", f"es={est.es!r}"]
    (out / "samples.csv").write_text(write_samples_csv(est, header))
    summary = est.summary_dict()
    summary["rate"] = code.rate
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    print(f"measured {est.count} radii: mean={est.mean:.6g} variance={est.variance:.6g} "
          f"censored={est.censored_count} monotonicity_violation_rate={est.monotonicity_violation_rate:.4g}")
    print(f"wrote {out / 'samples.csv'} and {out / 'summary.json'}")
    return EXIT_OK


_WER_DEFAULTS = {
    "code": "hamming74",
    "alist": None,
    "decoder": "ml",
    "iters": 25,
    "channel": "awgn",
    "methods": "sample_integral",
    "sweep": None,
    "ebn0": None,
    "samples_csv": None,
    "summary": None,
    "mean": None,
    "variance": None,
    "seed": "1",
    "mc_words": 100000,
    "mc_errors": 100,
    "threads": 1,
}

_WER_HEADER_KEYS = (
    "code", "alist", "decoder", "iters", "channel", "methods", "sweep", "ebn0",
    "mean", "variance", "seed", "mc_words", "mc_errors",
)


def _load_measurement(args, out: Path):
    path = Path(args.samples_csv) if args.samples_csv else out / "samples.csv"
    if not path.exists():
        raise MissingStageError(f"sample-based methods need a samples CSV; not found: {path}")
    meta = {}
    for raw in path.read_text().splitlines():
        if raw.startswith("#") and "=" in raw:
            key, _, value = raw[1:].strip().partition("=")
            meta[key.strip()] = value.strip()
    try:
        n = int(meta["n"])
    except KeyError:
        raise MissingStageError(f"{path} lacks an 'n=' header line")
    channel = meta.get("channel", "awgn")
    es = float(meta.get("es", 1.0))
    return read_samples_csv(path.read_text(), n=n, es=es, channel=channel), meta


def _gamma_fit_for(args, out: Path):
    if args.mean is not None and args.variance is not None:
        return fit_gamma(float(args.mean), float(args.variance)), None
    path = Path(args.summary) if args.summary else out / "summary.json"
    if not path.exists():
        raise MissingStageError(
            f"gamma methods need --mean/--variance or a measurement summary; not found: {path}"
        )
    summary = json.loads(path.read_text())
    if summary.get("a") is None:
        raise MissingStageError(f"{path} has no usable Gamma fit (degenerate measurement?)")
    return fit_gamma(float(summary["mean"]), float(summary["variance"])), summary


def cmd_wer(args) -> int:
    args = _merge_config(args, _WER_DEFAULTS)
    code = _build_code(args)
    rate = code.rate
    if args.sweep:
        grid = _parse_sweep(str(args.sweep))
    elif args.ebn0 is not None:
        grid = [float(args.ebn0)]
    else:
        raise ConfigError("need --sweep start:stop:step or --ebn0 DB")
    methods = [m.strip() for m in str(args.methods).split(",") if m.strip()]
    bad = [m for m in methods if m not in _wer.METHODS]
    if bad:
        raise ConfigError(f"unknown methods {bad}; choose from {', '.join(_wer.METHODS)}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    est = None
    if any(m in ("sample_integral", "empirical_cdf") for m in methods):
        est, _ = _load_measurement(args, out)
    fit = None
    if any(m.startswith("gamma") for m in methods):
        fit, _ = _gamma_fit_for(args, out)
    decoder = None
    if "monte_carlo" in methods:
        decoder = make_decoder(args.decoder, code, int(args.iters))

    header = _config_header(args, _WER_HEADER_KEYS) + [f"n={code.n}", f"rate={rate!r}"]
    all_points = []
    for method in methods:
        points = []
        for db in grid:
            snr = snr_from_eb_n0(db, rate)
            if method == "sample_integral":
                point = (_wer.wer_fading_average if est.channel == "rayleigh" else _wer.wer_sample_integral)(est, snr)
            elif method == "empirical_cdf":
                point = _wer.wer_asymptotic_empirical(est, snr)
            elif method == "gamma_closed":
                point = _wer.wer_gamma_closed(fit, code.n, snr)
            elif method == "gamma_asymptotic":
                point = _wer.wer_gamma_asymptotic(fit, snr)
            elif method == "gamma_asymptotic_int":
                point = _wer.wer_gamma_asymptotic(fit, snr, integer_rounded=True)
            else:
                cfg = McConfig(
                    snr=snr,
                    max_words=int(args.mc_words),
                    target_errors=int(args.mc_errors),
                    channel=args.channel,
                    master_seed=_parse_seed(str(args.seed)),
                )
                res = simulate_wer(code, decoder, cfg, threads=int(args.threads))
                se = (res.wer * (1.0 - res.wer) / res.words) ** 0.5
                point = _wer.WerPoint(snr=snr, wer=res.wer, method="monte_carlo", std_error=se)
            points.append(point)
        (out / f"wer_{method}.csv").write_text(_wer.write_wer_csv(points, header))
        all_points.extend(points)
        print(f"{method}: " + " ".join(f"{p.wer:.3e}" for p in points))
    (out / "wer_compare.csv").write_text(_wer.write_wer_csv(all_points, header))
    print(f"wrote {len(methods)} curve file(s) and wer_compare.csv to {out}")
    return EXIT_OK


_REPORT_DEFAULTS = {
    "mean": None,
    "variance": None,
    "rate": None,
    "epsilon": 0.01,
    "summary": None,
    "samples_csv": None,
}


def cmd_report(args) -> int:
    args = _merge_config(args, _REPORT_DEFAULTS)
    epsilon = float(args.epsilon)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    est = None
    summary = None
    if args.mean is not None and args.variance is not None:
        mean, variance = float(args.mean), float(args.variance)
        if args.rate is None:
            raise ConfigError("--rate is required with --mean/--variance")
        rate = float(args.rate)
    else:
        path = Path(args.summary) if args.summary else out / "summary.json"
        if not path.exists():
            raise MissingStageError(f"report needs --mean/--variance or a summary; not found: {path}")
        summary = json.loads(path.read_text())
        mean, variance = float(summary["mean"]), float(summary["variance"])
        rate = float(args.rate) if args.rate is not None else float(summary["rate"])
        if args.samples_csv:
            est, _ = _load_measurement(args, out)

    if est is not None:
        result = _wer.asymptotic_summary_from_estimate(est, rate, epsilon)
    else:
        result = _wer.asymptotic_summary_from_moments(mean, variance, rate, epsilon)

    payload = {
        "critical_snr_eb_n0_db": result.critical_snr_eb_n0_db,
        "tau0": result.tau0,
        "delta_eps": result.delta_eps,
        "delta_eps_db": result.delta_eps_db,
        "chebyshev_bound_db": result.chebyshev_bound_db,
        "epsilon": result.epsilon,
        "mean": mean,
        "variance": variance,
        "rate": rate,
    }
    (out / "report.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")

    def fmt(x, suffix=""):
        return "n/a" if x is None else f"{x:.4g}{suffix}"

    print("quantity                      value")
    print(f"critical SNR (Eb/N0)          {result.critical_snr_eb_n0_db:.4g} dB")
    print(f"radius quantile width         {fmt(result.delta_eps)}")
    print(f"radius quantile width (dB)    {fmt(result.delta_eps_db, ' dB')}")
    print(f"Chebyshev bound (dB)          {fmt(result.chebyshev_bound_db, ' dB')}")
    print(f"epsilon                       {result.epsilon:g}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="srwer",
        description="Evaluate block-code WER from decision-region radius statistics. "
        "Polarity convention: bit 0 -> +sqrt(Es).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key=value config file; explicit flags win")
        p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("measure", help="measure the radius distribution")
    common(p)
    p.add_argument("--code", help="hamming74 | uncoded | repetition:N | conv:POLYS:K:INFO | ldpc36 | ldpc")
    p.add_argument("--alist", help="alist path for --code ldpc")
    p.add_argument("--decoder", help="ml | viterbi | spa | msa")
    p.add_argument("--iters", type=int, help="message-passing iterations")
    p.add_argument("--channel", choices=("awgn", "rayleigh"))
    p.add_argument("--samples", type=int, help="number of radius samples")
    p.add_argument("--seed", help="master seed (decimal or 0x hex)")
    p.add_argument("--probe-ebn0", dest="probe_ebn0", type=float, help="LLR-scaling Eb/N0 during measurement")
    p.add_argument("--rel-tol", dest="rel_tol", type=float, help="bisection relative tolerance")
    p.add_argument("--cap-ln", dest="cap_ln", type=float, help="censoring cap on normalized square radius")
    p.add_argument("--audit-fraction", dest="audit_fraction", type=float, help="fraction of samples audited below the radius")
    p.add_argument("--threads", type=int, help="worker processes (does not change results)")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("wer", help="evaluate WER curves")
    common(p)
    p.add_argument("--code", help="code spec (see measure)")
    p.add_argument("--alist")
    p.add_argument("--decoder")
    p.add_argument("--iters", type=int)
    p.add_argument("--channel", choices=("awgn", "rayleigh"))
    p.add_argument("--methods", help="comma list: " + ",".join(_wer.METHODS))
    p.add_argument("--sweep", help="Eb/N0 sweep start:stop:step in dB")
    p.add_argument("--ebn0", type=float, help="single Eb/N0 point in dB")
    p.add_argument("--samples-csv", dest="samples_csv", help="radius sample dump for sample-based methods")
    p.add_argument("--summary", help="measurement summary JSON for gamma methods")
    p.add_argument("--mean", type=float, help="radius mean (overrides summary)")
    p.add_argument("--variance", type=float, help="radius variance (overrides summary)")
    p.add_argument("--seed", help="Monte Carlo master seed")
    p.add_argument("--mc-words", dest="mc_words", type=int, help="Monte Carlo word cap")
    p.add_argument("--mc-errors", dest="mc_errors", type=int, help="Monte Carlo early-stop error target")
    p.add_argument("--threads", type=int)
    p.set_defaults(func=cmd_wer)

    p = sub.add_parser("report", help="asymptotic summary (critical SNR, quantile widths)")
    common(p)
    p.add_argument("--mean", type=float)
    p.add_argument("--variance", type=float)
    p.add_argument("--rate", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--summary", help="measurement summary JSON")
    p.add_argument("--samples-csv", dest="samples_csv", help="sample dump (enables quantile widths)")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (ConfigError, AlistParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantViolationError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except MissingStageError as exc:
        print(f"missing stage: {exc}", file=sys.stderr)
        return EXIT_MISSING_STAGE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
