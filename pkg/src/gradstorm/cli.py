"""Command-line harness: ``gradstorm <subcommand> [flags]``.

Exit codes: 0 success, 1 computation failure, 2 configuration error,
3 validation failure. Errors are reported as one JSON object on stderr.

Every subcommand accepts ``--config FILE`` with ``key = value`` lines
mirroring its flags (dashes or underscores); flags given on the command
line win over file values.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__, asymptotics, condmean, gaslimit, records, sde, validation
from .burgers import solve_characteristics
from .condmean import MeanFieldSample
from .errors import ConfigError, GradstormError
from .profiles import NoiseModel, parse_density, parse_velocity

EXIT_OK, EXIT_COMPUTE, EXIT_CONFIG, EXIT_VALIDATION = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


# ---------------------------------------------------------------------------
# flag value parsers
# ---------------------------------------------------------------------------


def grid(text):
    """``a:b:n`` -> n evenly spaced points from a to b inclusive; a bare number is one point."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return [float(parts[0])]
        if len(parts) != 3:
            raise ValueError
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must be a:b:n, got {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("grid needs n >= 1")
    return [float(v) for v in np.linspace(a, b, n)]


def int_range(text):
    try:
        a, b = (int(p) for p in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected m1:m2, got {text!r}") from None
    if b < a:
        raise argparse.ArgumentTypeError("need m1 <= m2")
    return a, b


def float_list(text):
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def finite(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"not finite: {text!r}")
    return v


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _common(p, profiles=True):
    p.add_argument("--config", help="file of 'key = value' lines mirroring the flags")
    p.add_argument("--out", help="write the main artifact here instead of stdout")
    if profiles:
        p.add_argument("--velocity", default="linear:-1", help="velocity spec, e.g. linear:-1")
        p.add_argument("--density", default="gaussian:1", help="density spec, e.g. uniform")
        p.add_argument("--sigma", type=finite, default=1.0)


def build_parser():
    parser = _Parser(prog="gradstorm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"gradstorm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", help="one conditional-mean sample as JSON")
    _common(p)
    p.add_argument("--t", type=finite, required=True)
    p.add_argument("--x", type=finite, required=True)
    p.add_argument("--fd", action="store_true", help="also report the finite-difference slope")

    p = sub.add_parser("sweep", help="CSV of samples on a (t, x) grid")
    _common(p)
    p.add_argument("--t-grid", type=grid, required=True)
    p.add_argument("--x-grid", type=grid, required=True)

    p = sub.add_parser("mc", help="Monte Carlo bin means with a quadrature column")
    _common(p)
    p.add_argument("--t", type=finite, required=True)
    p.add_argument("--x-grid", type=grid, default=grid("-2:2:21"))
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=20240917)
    p.add_argument("--bins", type=int, help="number of bin centres across the x-grid range")
    p.add_argument("--bandwidth", type=finite)
    p.add_argument("--L", type=finite, dest="L", help="truncation for non-normalizable f")

    p = sub.add_parser("blowup", help="slope at the origin near the critical time")
    _common(p, profiles=False)
    p.add_argument("--k", type=finite, required=True)
    p.add_argument("--alpha", type=finite, default=-1.0)
    p.add_argument("--sigma", type=finite, default=1.0)
    p.add_argument("--eps-decades", type=int_range, default=(4, 28),
                   help="m1:m2, eps = -10^(-m/4)")
    p.add_argument("--out-dir", help="write blowup.json and blowup.csv here")

    p = sub.add_parser("regime", help="predicted regime and coefficients as JSON")
    _common(p, profiles=False)
    p.add_argument("--k", type=finite, required=True)
    p.add_argument("--alpha", type=finite, default=-1.0)
    p.add_argument("--sigma", type=finite, default=1.0)

    p = sub.add_parser("limit", help="sigma -> 0 convergence and residual tables")
    _common(p)
    p.add_argument("--t", type=finite, default=0.5)
    p.add_argument("--x", type=finite, default=1.0)
    p.add_argument("--sigma-seq", type=float_list,
                   default=[2.0**-j for j in range(11)])
    p.add_argument("--stencil-t", type=grid, default=grid("0.4:1.2:3"))
    p.add_argument("--stencil-x", type=grid, default=grid("-0.8:1.1:3"))
    p.add_argument("--out-dir", help="write limit_sigma.csv and limit_residuals.csv here")

    p = sub.add_parser("burgers", help="invert the characteristic map")
    _common(p, profiles=False)
    p.add_argument("--velocity", default="linear:-1")
    p.add_argument("--t", type=finite, required=True)
    p.add_argument("--x", type=finite, required=True)

    p = sub.add_parser("validate", help="run the closed-form and cross-oracle checks")
    _common(p, profiles=False)
    p.add_argument("--seed", type=int, default=20240917)
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--only", type=lambda s: [t for t in s.split(",") if t],
                   help=f"comma list from {','.join(validation.CHECKS)}")
    p.add_argument("--out-dir", help="write validate.json here")
    return parser


# ---------------------------------------------------------------------------
# config files
# ---------------------------------------------------------------------------


def read_config(path):
    """``key = value`` lines; ``#`` starts a comment."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{n}: expected 'key = value'")
        out[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return out


def _glue_negative_values(argv):
    """Attach values such as ``-1:1:3`` to the preceding flag (``--x-grid=-1:1:3``).

    argparse only recognizes plain negative numbers as values; grid specs
    and comma lists starting with a minus sign would otherwise look like
    options. No subcommand takes positionals, so this is unambiguous.
    """
    out = []
    for tok in argv:
        prev = out[-1] if out else ""
        if (len(tok) > 1 and tok[0] == "-" and (tok[1].isdigit() or tok[1] == ".")
                and prev.startswith("--") and "=" not in prev):
            out[-1] = f"{prev}={tok}"
        else:
            out.append(tok)
    return out


def _config_path(argv):
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def _apply_config(parser, argv):
    """Install config-file values as subcommand defaults, then parse the flags."""
    argv = _glue_negative_values(list(sys.argv[1:] if argv is None else argv))
    path = _config_path(argv)
    if path is None:
        return parser.parse_args(argv)
    command = next((tok for tok in argv if not tok.startswith("-")), None)
    choices = parser._subparsers._group_actions[0].choices
    if command not in choices:
        return parser.parse_args(argv)
    sub = choices[command]
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, raw in read_config(path).items():
        action = actions.get(key)
        if action is None or key in ("config", "help"):
            raise ConfigError(f"unknown config key {key!r} for '{command}'")
        if isinstance(action, argparse._StoreTrueAction):
            defaults[action.dest] = raw.lower() in ("1", "true", "yes", "on")
            continue
        conv = action.type or str
        try:
            defaults[action.dest] = conv(raw)
        except (argparse.ArgumentTypeError, ValueError) as exc:
            raise ConfigError(f"config key {key!r}: {exc}") from None
        action.required = False
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def resolved(args, skip=("config", "out", "out_dir", "command")):
    cfg = {"command": args.command}
    for key, val in sorted(vars(args).items()):
        if key in skip or val is None:
            continue
        if isinstance(val, (list, tuple)):
            val = ",".join(records.fmt(v if isinstance(v, str) else float(v)) for v in val)
        cfg[key] = val
    return cfg


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _profiles(args):
    return parse_velocity(args.velocity), parse_density(args.density), NoiseModel(args.sigma)


def _emit(args, text, stdout):
    if getattr(args, "out", None):
        records.write_text(args.out, text)
    else:
        stdout.write(text)


def cmd_eval(args, stdout):
    v, f, noise = _profiles(args)
    s = condmean.conditional_mean(args.t, args.x, f, v, noise)
    payload = s.to_dict()
    if args.fd and args.t > 0:
        payload["diagnostics"]["du_hat_dx_fd"] = condmean.spatial_derivative(
            args.t, args.x, f, v, noise, fd=True)
    _emit(args, records.json_text(payload, resolved(args)), stdout)
    return EXIT_OK


def cmd_sweep(args, stdout):
    v, f, noise = _profiles(args)
    rows = []
    for t in args.t_grid:
        for x in args.x_grid:
            rows.append(condmean.conditional_mean(t, x, f, v, noise).row())
    _emit(args, records.csv_text(MeanFieldSample.CSV_FIELDS, rows, resolved(args)), stdout)
    return EXIT_OK


def cmd_mc(args, stdout):
    v, f, noise = _profiles(args)
    xs = args.x_grid
    if args.bins:
        xs = [float(x) for x in np.linspace(min(xs), max(xs), args.bins)]
    cfg = sde.McConfig(n_samples=args.samples, seed=args.seed, bandwidth=args.bandwidth,
                       L=args.L)
    est = sde.mc_conditional_mean(args.t, xs, f, v, noise, cfg)
    config = resolved(args)
    summary = sde.mc_summary(est)
    config["fraction_within_3se"] = summary["fraction"]
    _emit(args, records.csv_text(sde.McEstimate.CSV_FIELDS, [e.row() for e in est], config),
          stdout)
    return EXIT_OK


def cmd_blowup(args, stdout):
    m1, m2 = args.eps_decades
    res = condmean.blowup_scan(args.k, args.alpha, NoiseModel(args.sigma),
                               condmean.default_epsilon_grid(m1, m2))
    report = asymptotics.classify_regime(args.k, args.alpha, args.sigma)
    payload = {"scan": res.to_dict(), "prediction": {
        "regime": report.regime, "exponent": report.exponent,
        "description": report.predicted_rate_description}}
    config = resolved(args)
    js = records.json_text(payload, config)
    rows = list(zip(res.epsilon_grid, res.slope_at_origin))
    csv = records.csv_text(("epsilon", "slope_at_origin"), rows, config)
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        records.write_text(os.path.join(args.out_dir, "blowup.json"), js)
        records.write_text(os.path.join(args.out_dir, "blowup.csv"), csv)
    else:
        _emit(args, js, stdout)
    return EXIT_OK


def cmd_regime(args, stdout):
    rep = asymptotics.classify_regime(args.k, args.alpha, args.sigma)
    _emit(args, records.json_text(rep.to_dict(), resolved(args)), stdout)
    return EXIT_OK


def cmd_limit(args, stdout):
    v, f, noise = _profiles(args)
    conv = gaslimit.sigma_convergence(f, v, args.t, args.x, args.sigma_seq)
    config = resolved(args)
    config["fitted_order"] = conv.fitted_order
    config["monotone"] = conv.monotone
    sig_csv = records.csv_text(("sigma", "u_hat", "abs_error"), conv.rows(), config)
    rows = []
    for t in args.stencil_t:
        for x in args.stencil_x:
            c = gaslimit.continuity_residual(t, x, f, v, noise)
            p = gaslimit.fokker_planck_residual(t, x, 0.25, f, v, noise)
            m = gaslimit.momentum_residual(t, x, f, v, noise)
            rows.append((t, x, c.normalized, p.normalized, m.normalized, m.extra["Lambda"]))
    res_csv = records.csv_text(("t", "x", "continuity", "fokker_planck", "momentum", "Lambda"),
                               rows, config)
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        records.write_text(os.path.join(args.out_dir, "limit_sigma.csv"), sig_csv)
        records.write_text(os.path.join(args.out_dir, "limit_residuals.csv"), res_csv)
    else:
        _emit(args, sig_csv + res_csv, stdout)
    return EXIT_OK


def cmd_burgers(args, stdout):
    v = parse_velocity(args.velocity)
    out = solve_characteristics(v, args.t, args.x)
    payload = {"kind": out.kind, "count": out.count, "roots": out.roots, "u": out.u,
               "crossed": out.crossed}
    _emit(args, records.json_text(payload, resolved(args)), stdout)
    return EXIT_OK


def cmd_validate(args, stdout):
    only = set(args.only) if args.only else None
    if only and not only <= set(validation.CHECKS):
        raise ConfigError(f"unknown checks: {sorted(only - set(validation.CHECKS))}")
    checks = validation.run_all(seed=args.seed, n_samples=args.samples, only=only)
    payload = {"checks": [c.to_dict() for c in checks],
               "passed": all(c.passed for c in checks)}
    js = records.json_text(payload, resolved(args))
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        records.write_text(os.path.join(args.out_dir, "validate.json"), js)
    if args.out:
        records.write_text(args.out, js)
    for c in checks:
        stdout.write(c.line() + "\n")
    return EXIT_OK if payload["passed"] else EXIT_VALIDATION


COMMANDS = {
    "eval": cmd_eval, "sweep": cmd_sweep, "mc": cmd_mc, "blowup": cmd_blowup,
    "regime": cmd_regime, "limit": cmd_limit, "burgers": cmd_burgers, "validate": cmd_validate,
}


def _fail(stderr, code, kind, exc):
    stderr.write(json.dumps({"error": kind, "type": type(exc).__name__, "message": str(exc)},
                            sort_keys=True) + "\n")
    return code


def run(argv=None, stdout=None, stderr=None):
    """Execute one command line; returns the exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        return COMMANDS[args.command](args, stdout)
    except ConfigError as exc:
        return _fail(stderr, EXIT_CONFIG, "config", exc)
    except (GradstormError, ArithmeticError, ValueError) as exc:
        return _fail(stderr, EXIT_COMPUTE, "computation", exc)


def main():
    code = run()
    sys.exit(code)


if __name__ == "__main__":
    main()
