"""Command-line front end.

Every subcommand writes one artifact (JSON, or CSV for the advantage map)
to ``--output`` or stdout.  Exit status: 0 on success, 2 for invalid
configuration or infeasible input, 3 when a dimension cap is hit.  Failures
print a JSON error record on stderr.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .config import CatportError, DimensionLimitError, parse_overrides, use_settings

SCENARIOS = ("teleport-demo", "subroutine-verify", "advantage-map", "small-catalyst", "ergotropy")
TELEPORT_STATES = ("singlet-in-qutrit", "phi-plus", "product", "random-pure")

EXIT_OK, EXIT_USAGE, EXIT_RESOURCE = 0, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _tol_pair(text: str) -> tuple[str, str]:
    key, sep, val = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    return key.strip(), val.strip()


def _x_value(text: str):
    if text == "optimal":
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--x takes a number or 'optimal', got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--output", "-o", default=None, help="output file (default: stdout)")
    common.add_argument("--config", default=None, help="key=value file; flags win")
    common.add_argument("--tol", action="append", type=_tol_pair, default=[], metavar="KEY=VAL",
                        help="override a tolerance or setting (repeatable)")

    p = _Parser(prog="catport", description="Catalytic teleportation simulations.")
    sub = p.add_subparsers(dest="scenario", required=True, parser_class=_Parser)

    s = sub.add_parser("teleport-demo", parents=[common], help="Monte-Carlo teleportation fidelity")
    s.add_argument("--state", choices=TELEPORT_STATES, default="singlet-in-qutrit")
    s.add_argument("--d", type=int, default=3)
    s.add_argument("--mc", type=int, default=10_000)
    s.add_argument("--no-twirl", action="store_true")

    s = sub.add_parser("subroutine-verify", parents=[common], help="catalytic subroutine vs effective channel")
    s.add_argument("--n", type=int, default=2)
    s.add_argument("--d", type=int, default=2, help="local dimension of each party")
    s.add_argument("--channels", type=int, default=10)
    s.add_argument("--layout", choices=("suffix", "prefix"), default="suffix")

    s = sub.add_parser("advantage-map", parents=[common], help="catalytic advantage over the qutrit simplex (CSV)")
    s.add_argument("--resolution", type=float, default=0.02)
    s.add_argument("--full-triangle", action="store_true")

    s = sub.add_parser("small-catalyst", parents=[common], help="qutrit small-catalyst protocol")
    s.add_argument("--x", type=_x_value, default="optimal")

    s = sub.add_parser("ergotropy", parents=[common], help="collective work extraction report")
    s.add_argument("--state", type=_float_list, default=[0.5, 0.3, 0.2],
                   help="populations of a diagonal state")
    s.add_argument("--energies", type=_float_list, default=None, help="default 0,1,...,d-1")
    s.add_argument("--n", type=int, default=3, help="largest copy number")
    return p


def read_config(path) -> dict[str, str]:
    """Parse a ``key=value`` file; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        out[key.strip().replace("-", "_")] = val.strip()
    return out


def _apply_config(argv, parser):
    """Parse ``argv``; values from ``--config`` fill in anything not given as a flag."""
    args = parser.parse_args(argv)
    if not args.config:
        return args
    try:
        cfg = read_config(args.config)
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from None
    sub = parser._subparsers._group_actions[0].choices[args.scenario]
    known = {a.dest: a for a in sub._actions}
    defaults, tols = {}, []
    for key, val in cfg.items():
        if key in ("config", "scenario", "help"):
            continue
        if key.startswith("tol.") or key not in known:
            tols.append((key.removeprefix("tol."), val))
            continue
        act = known[key]
        if act.nargs == 0:
            defaults[key] = val.lower() in ("1", "true", "yes", "on")
        else:
            try:
                defaults[key] = act.type(val) if act.type else val
            except (argparse.ArgumentTypeError, ValueError) as exc:
                raise UsageError(f"config {key}: {exc}") from None
            if act.choices and defaults[key] not in act.choices:
                raise UsageError(f"config {key}: invalid choice {val!r}")
    sub.set_defaults(**defaults)
    args = parser.parse_args(argv)
    args.tol = tols + list(args.tol)
    return args


# ---------------------------------------------------------------- scenarios


def _teleport_state(name: str, d: int, seed: int):
    from .entmetrics import max_entangled
    from .qstate import PureState, haar_random_unitary

    if name == "singlet-in-qutrit":
        return max_entangled(d, levels=min(2, d))
    if name == "phi-plus":
        return max_entangled(d)
    if name == "product":
        v = np.zeros(d * d)
        v[0] = 1
        return PureState(v, (d, d))
    # random pure two-qudit state
    u = haar_random_unitary(d * d, np.random.default_rng(seed))
    return PureState(u[:, 0], (d, d))


def run_teleport_demo(args) -> dict:
    from .entmetrics import classical_threshold, singlet_fraction, tele_fidelity
    from .teleporter import avg_fidelity_mc

    if args.mc < 100:
        raise UsageError("--mc must be >= 100")
    if args.d < 2:
        raise UsageError("--d must be >= 2")
    state = _teleport_state(args.state, args.d, args.seed)
    rho = state.dm()
    f = singlet_fraction(rho)
    mean, err = avg_fidelity_mc(rho, samples=args.mc, seed=args.seed, twirl=not args.no_twirl)
    predicted = tele_fidelity(f, args.d)
    return {
        "scenario": "teleport-demo",
        "state": args.state,
        "d": args.d,
        "seed": args.seed,
        "samples": args.mc,
        "twirl": not args.no_twirl,
        "singlet_fraction": f,
        "predicted_fidelity": predicted,
        "mean_fidelity": mean,
        "stderr": err,
        # roundoff floor: a twirled resource gives the same fidelity for every input
        "within_3_stderr": bool(abs(mean - predicted) <= 3 * err + 1e-12),
        "classical_threshold": classical_threshold(args.d),
    }


def run_subroutine_verify(args) -> dict:
    from .catengine import build_catalyst, random_locc_channel, run_subroutine
    from .qstate import ptrace, random_density_matrix

    if args.n < 2 or args.d < 1 or args.channels < 1:
        raise UsageError("need --n >= 2, --d >= 1 and --channels >= 1")
    rng = np.random.default_rng(args.seed)
    cases = []
    for _ in range(args.channels):
        rho = random_density_matrix((args.d, args.d), rng)
        E = random_locc_channel(args.n, (args.d, args.d), seed=rng)
        cat = build_catalyst(rho, E, layout=args.layout)
        rep = run_subroutine(rho, cat, E)
        dd = args.d * args.d
        oracle = sum(ptrace(cat.sigma_n, [dd] * args.n, [i]) for i in range(args.n)) / args.n
        cases.append({
            "oracle_deviation": float(np.max(np.abs(rep.system_out.mat - oracle))),
            "catalyst_drift": rep.catalyst_drift,
            "joint_correlation": rep.joint_correlation,
            "epsilon_iid": rep.epsilon_iid,
            "bound_3eps_satisfied": rep.bound_3eps_satisfied,
        })
    return {
        "scenario": "subroutine-verify",
        "n": args.n,
        "d": args.d,
        "layout": args.layout,
        "seed": args.seed,
        "cases": cases,
        "max_oracle_deviation": max(c["oracle_deviation"] for c in cases),
        "max_catalyst_drift": max(c["catalyst_drift"] for c in cases),
        "bound_violations": sum(not c["bound_3eps_satisfied"] for c in cases),
    }


def run_advantage_map(args) -> str:
    from .advopt import advantage_map, write_csv

    if not 0 < args.resolution <= 0.5:
        raise UsageError("--resolution must lie in (0, 0.5]")
    return write_csv(advantage_map(args.resolution), full_triangle=args.full_triangle)


def run_small_catalyst_cli(args) -> dict:
    from .smallcat import optimize_x, run_small_catalyst

    x = optimize_x()[0] if args.x == "optimal" else args.x
    out = run_small_catalyst(x).to_dict()
    out["scenario"] = "small-catalyst"
    out["f"] = out["singlet_fraction"]
    out["F"] = out["tele_fidelity"]
    return out


def run_ergotropy(args) -> dict:
    from .gencat import work_report
    from .qstate import DensityMatrix

    p = np.asarray(args.state, dtype=float)
    e = np.arange(p.size, dtype=float) if args.energies is None else np.asarray(args.energies)
    if p.size != e.size:
        raise UsageError("--state and --energies must have the same length")
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    rep = work_report(DensityMatrix(np.diag(p)), np.diag(e), n_max=args.n)
    out = rep.to_dict()
    out.update(scenario="ergotropy", populations=p.tolist(), energies=e.tolist())
    return out


RUNNERS = {
    "teleport-demo": run_teleport_demo,
    "subroutine-verify": run_subroutine_verify,
    "advantage-map": run_advantage_map,
    "small-catalyst": run_small_catalyst_cli,
    "ergotropy": run_ergotropy,
}


SCHEMAS = {
    "teleport-demo": "teleport_demo.schema.json",
    "subroutine-verify": "subroutine_verify.schema.json",
    "small-catalyst": "protocol_report.schema.json",
    "ergotropy": "work_report.schema.json",
    "error": "error.schema.json",
}


def load_schema(name: str) -> dict:
    """JSON schema for a scenario's output (or ``"error"``)."""
    from importlib.resources import files

    return json.loads(files("catport").joinpath("schemas", SCHEMAS[name]).read_text())


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _finite(obj):
    # JSON has no inf/nan; emit them as null
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def _emit(text: str, output):
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _fail(kind: str, message: str, code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message, "exit_code": code}) + "\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(argv, parser)
        overrides = parse_overrides(dict(args.tol))
        with use_settings(**overrides):
            result = RUNNERS[args.scenario](args)
        if isinstance(result, str):
            text = result
        else:
            text = json.dumps(_finite(result), indent=2, sort_keys=True, default=_json_default) + "\n"
        _emit(text, args.output)
    except UsageError as exc:
        return _fail("usage", str(exc), EXIT_USAGE)
    except DimensionLimitError as exc:
        return _fail("dimension-limit", str(exc), EXIT_RESOURCE)
    except CatportError as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_USAGE)
    except OSError as exc:
        return _fail("io", str(exc), EXIT_USAGE)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
