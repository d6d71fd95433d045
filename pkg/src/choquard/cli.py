"""Command-line front end.

Subcommands: ``classify``, ``region-grid``, ``construct``, ``verify`` and
``bootstrap``.  Every subcommand accepts ``--config FILE``, a flat
``key = value`` file whose keys are option names (dashes or underscores);
explicit flags override it.  ``CHOQUARD_SEED`` overrides the default seed.

Exit codes: 0 success, 1 verification failure, 2 parameter error,
3 regime error or infeasible construction, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from importlib import resources
from pathlib import Path

from .errors import ParameterError, RegimeError

EXIT_OK, EXIT_FAIL, EXIT_PARAM, EXIT_REGIME, EXIT_IO = 0, 1, 2, 3, 4

PRESETS = ("alpha-lt-2", "alpha-eq-2", "alpha-gt-2")


def _number(s: str):
    """ints and a/b stay exact; anything with a decimal point is a float."""
    from .construction import _parse_num

    v = _parse_num(s)
    return int(v) if hasattr(v, "denominator") and v.denominator == 1 else v


def read_config(path) -> dict:
    """Parse a flat key = value file; '#' starts a comment."""
    out = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def preset_path(name: str) -> Path:
    if name not in PRESETS:
        raise ParameterError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return Path(str(resources.files("choquard") / "presets" / f"{name}.cfg"))


def _default_seed() -> int:
    from .verify import DEFAULT_SEED

    env = os.environ.get("CHOQUARD_SEED", "")
    if not env:
        return DEFAULT_SEED
    try:
        return int(env)
    except ValueError as exc:
        raise ParameterError(f"CHOQUARD_SEED must be an integer, got {env!r}") from exc


def _add_params(p: argparse.ArgumentParser, with_sigma: bool = True, **defaults):
    p.add_argument("--n", type=int, default=defaults.get("n", 3))
    p.add_argument("--alpha", type=_number, default=defaults.get("alpha"))
    p.add_argument("--lambda", dest="lam", type=_number, default=defaults.get("lam"))
    if with_sigma:
        p.add_argument("--sigma", type=_number, default=defaults.get("sigma"))


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="flat key = value file overriding the defaults")
    p.add_argument("--out", help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="choquard", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="verdict for one parameter point")
    _add_params(p)
    _add_common(p)

    p = sub.add_parser("region-grid", help="CSV of verdicts over a (lambda, sigma) grid")
    _add_params(p, with_sigma=False)
    p.add_argument("--lambda-range", nargs=2, type=_number, metavar=("LO", "HI"))
    p.add_argument("--sigma-range", nargs=2, type=_number, metavar=("LO", "HI"))
    p.add_argument("--resolution", nargs=2, type=int, metavar=("NL", "NS"), default=[200, 200])
    p.add_argument("--preset", choices=PRESETS, help="reference layout shipped with the package")
    _add_common(p)

    p = sub.add_parser("construct", help="build a blow-up family and write its descriptor")
    _add_params(p)
    p.add_argument("--J", type=int, default=5, help="number of bumps")
    p.add_argument("--phi", default="log",
                   help="growth target: 'log' for log(1/t) or 'power:K' for t^-K")
    _add_common(p)

    p = sub.add_parser("verify", help="check a descriptor (or a fixture) against the inequality")
    p.add_argument("descriptor", nargs="?", help="JSON written by 'construct'")
    p.add_argument("--fixture", choices=["remark1"], help="verify a harmonic fixture instead")
    _add_params(p, alpha=1, lam=1, sigma=1)
    p.add_argument("--samples", type=int, default=20, help="sample points per bump")
    p.add_argument("--harmonic-points", type=int, default=50)
    p.add_argument("--tol", type=float, default=None, help="relative tolerance of the direct check")
    p.add_argument("--pass-fraction", type=float, default=None)
    p.add_argument("--target-rel", type=float, default=None, help="quadrature target")
    p.add_argument("--max-depth", type=int, default=None, help="quadrature refinement levels")
    p.add_argument("--quick", action="store_true",
                   help="certificate and direct checks only")
    p.add_argument("--seed", type=int, default=None)
    _add_common(p)

    p = sub.add_parser("bootstrap", help="exact exponent trace of the bootstrap")
    _add_params(p)
    p.add_argument("--start", choices=["Lemma41", "Lemma51"], default=None,
                   help="stage to start from (default: by lambda)")
    _add_common(p)
    return ap


def _apply_config(ap: argparse.ArgumentParser, argv):
    """Re-parse with defaults taken from --config (or a region-grid --preset)."""
    args = ap.parse_args(argv)
    files = []
    if getattr(args, "preset", None):
        files.append(preset_path(args.preset))
    if args.config:
        files.append(args.config)
    if not files:
        return args
    sub = ap._subparsers._group_actions[0].choices[args.command]
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for f in files:
        try:
            cfg = read_config(f)
        except OSError as exc:
            raise ParameterError(f"cannot read config {f}: {exc}") from exc
        for key, value in cfg.items():
            dest = "lam" if key == "lambda" else key
            if dest not in actions:
                raise ParameterError(f"unknown config key {key!r} for {args.command}")
            act = actions[dest]
            conv = act.type or str
            if act.nargs not in (None, "?"):
                defaults[dest] = [conv(v) for v in value.split()]
            elif isinstance(act, argparse._StoreTrueAction):
                defaults[dest] = value.lower() in ("1", "true", "yes", "on")
            else:
                defaults[dest] = conv(value)
    sub.set_defaults(**defaults)
    return ap.parse_args(argv)


def _params(args):
    from .regions import Params

    missing = [k for k in ("alpha", "lam", "sigma") if getattr(args, k, 0) is None]
    if missing:
        raise ParameterError("missing parameter(s): " + ", ".join(
            "--lambda" if m == "lam" else f"--{m}" for m in missing))
    return Params(args.n, args.alpha, args.lam, getattr(args, "sigma", 0))


def _emit(text: str, out):
    if out:
        try:
            Path(out).write_text(text)
        except OSError as exc:
            raise _IOFailure(f"cannot write {out}: {exc}") from exc
    else:
        sys.stdout.write(text)


class _IOFailure(Exception):
    pass


def cmd_classify(args) -> int:
    from .construction import _num
    from .regions import classify

    p = _params(args)
    rv = classify(p)
    body = {"n": p.n, "alpha": _num(p.alpha), "lambda": _num(p.lam), "sigma": _num(p.sigma),
            "verdict": rv.verdict.value, "g_alpha": _num(rv.g_value), "branch": rv.branch.value}
    _emit(rv.verdict.value + "\n" + json.dumps(body, sort_keys=True) + "\n", args.out)
    return EXIT_OK


def cmd_region_grid(args) -> int:
    from .regions import grid_scan, rows_to_csv

    if args.alpha is None or args.lambda_range is None or args.sigma_range is None:
        raise ParameterError("region-grid needs --alpha, --lambda-range and --sigma-range "
                             "(or --preset)")
    rows = grid_scan(args.n, args.alpha, args.lambda_range, args.sigma_range,
                     tuple(args.resolution))
    _emit(rows_to_csv(rows), args.out)
    return EXIT_OK


def _phi(spec: str):
    from .construction import GrowthTarget

    if spec == "log":
        return GrowthTarget.log()
    if spec.startswith("power:"):
        try:
            return GrowthTarget.power(float(spec.split(":", 1)[1]))
        except ValueError as exc:
            raise ParameterError(f"bad power exponent in {spec!r}") from exc
    raise ParameterError(f"unknown phi {spec!r}; use 'log' or 'power:K'")


def cmd_construct(args) -> int:
    from .construction import choose_sequences, dumps_family

    family = choose_sequences(_params(args), phi=_phi(args.phi), J=args.J)
    _emit(dumps_family(family), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    from dataclasses import replace

    from .construction import family_from_json
    from .fixtures import RemarkOneField
    from .quadrature import QuadratureSpec
    from .verify import VerifyConfig, verify

    if args.fixture:
        if args.descriptor:
            raise ParameterError("give either a descriptor or --fixture, not both")
        field_ = RemarkOneField(_params(args))
    else:
        if not args.descriptor:
            raise ParameterError("verify needs a descriptor path or --fixture")
        try:
            data = json.loads(Path(args.descriptor).read_text())
        except OSError as exc:
            raise _IOFailure(f"cannot read {args.descriptor}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ParameterError(f"descriptor is not valid JSON: {exc}") from exc
        field_ = family_from_json(data)
    seed = args.seed if args.seed is not None else _default_seed()
    cfg = VerifyConfig(samples_per_bump=args.samples, harmonic_points=args.harmonic_points,
                       seed=seed)
    if args.tol is not None:
        cfg = replace(cfg, tolerance=args.tol)
    if args.pass_fraction is not None:
        cfg = replace(cfg, pass_fraction=args.pass_fraction)
    spec = {}
    if args.target_rel is not None:
        spec["target_rel"] = args.target_rel
    if args.max_depth is not None:
        spec["max_depth"] = args.max_depth
    if spec:
        cfg = replace(cfg, spec=QuadratureSpec(**spec))
    if not (cfg.tolerance > 0 and 0 < cfg.pass_fraction <= 1 and cfg.samples_per_bump >= 1):
        raise ParameterError("tolerances must be positive and the pass fraction in (0, 1]")
    report = verify(field_, cfg, full=not args.quick)
    _emit(report.dumps(), args.out)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_bootstrap(args) -> int:
    from .bootstrap import Start, run_to_termination

    p = _params(args)
    start = args.start or ("Lemma51" if p.as_fractions().lam >= p.as_fractions().lam_top
                           else "Lemma41")
    trace = run_to_termination(p, Start(start))
    _emit(trace.dumps() + "\n", args.out)
    return EXIT_OK


COMMANDS = {
    "classify": cmd_classify,
    "region-grid": cmd_region_grid,
    "construct": cmd_construct,
    "verify": cmd_verify,
    "bootstrap": cmd_bootstrap,
}


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = _apply_config(ap, argv)
        return COMMANDS[args.command](args)
    except ParameterError as exc:
        print(f"parameter error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except RegimeError as exc:
        print(f"regime error: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except _IOFailure as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
