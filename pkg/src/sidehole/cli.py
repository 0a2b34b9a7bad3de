"""Command-line front end.

Subcommands: alpha, spectrum, fingering, verify3d, oracle1d.
Exit codes: 0 ok, 1 usage error, 2 solver failure, 3 trend-assertion failure.
Every emitted file embeds the SHA-256 of the run manifest that produced it;
writes are atomic (temp file + rename).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .alpha import estimate_alpha
from .model import (ModelConfig, SideholeError, TubeSpec, ValidationError,
                    cents, to_frequency_hz, validate)
from .secular import (GeneralizedProblem, SecularProblem, find_roots,
                      fd_oracle, shooting_spectrum)
from .tube3d import BudgetError, Tube3DConfig, build_grid, convergence_study

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SOLVER = 2
EXIT_ASSERTION = 3


class UsageError(Exception):
    pass


@dataclass
class RunManifest:
    subcommand: str
    config: dict
    params: dict
    seed: int
    version: str = __version__
    cache_hit: bool = False
    outputs: list[str] = field(default_factory=list)

    def sha256(self) -> str:
        body = json.dumps(
            {k: v for k, v in asdict(self).items() if k != "outputs"},
            sort_keys=True)
        return hashlib.sha256(body.encode()).hexdigest()

    def to_json_dict(self) -> dict:
        d = asdict(self)
        d["sha256"] = self.sha256()
        return d


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_json(path: Path, payload: dict, manifest: RunManifest) -> None:
    payload = dict(payload)
    payload["manifest"] = manifest.to_json_dict()
    _atomic_write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    manifest.outputs.append(path.name)


def _write_csv(path: Path, csv_text: str, manifest: RunManifest) -> None:
    _atomic_write(path, f"# manifest_sha256={manifest.sha256()}\n" + csv_text)
    manifest.outputs.append(path.name)


def _load_config(args) -> ModelConfig:
    if args.config:
        cfg = ModelConfig.from_json(Path(args.config).read_text())
    else:
        cfg = ModelConfig()
    if getattr(args, "alpha", None) is not None:
        cfg = ModelConfig(tube=cfg.tube, holes=cfg.holes,
                          alpha=args.alpha, epsilon=cfg.epsilon)
    if getattr(args, "epsilon", None) is not None:
        cfg = ModelConfig(tube=cfg.tube, holes=cfg.holes,
                          alpha=cfg.alpha, epsilon=args.epsilon)
    return validate(cfg)


def _cache_path() -> Path:
    env = os.environ.get("SIDEHOLE_CACHE")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "sidehole" / "alpha_cache.json"


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse number list {text!r}: {exc}") from exc


# ----------------------------------------------------------------------------
# subcommands

def cmd_alpha(args) -> int:
    ladder_R = _floats(args.ladder_R)
    ladder_h = _floats(args.ladder_h)
    if len(ladder_R) < 3 or len(ladder_h) < 3:
        raise UsageError("alpha ladders need at least 3 entries each")
    manifest = RunManifest(
        subcommand="alpha", config={},
        params={"ladder_R": ladder_R, "ladder_h": ladder_h,
                "oracle": not args.no_oracle},
        seed=args.seed)
    cache_file = _cache_path()
    cache_key = json.dumps({"shape": "square", "ladder_R": ladder_R,
                            "ladder_h": ladder_h,
                            "oracle": not args.no_oracle}, sort_keys=True)
    cache = {}
    if cache_file.exists():
        cache = json.loads(cache_file.read_text())
    if cache_key in cache:
        manifest.cache_hit = True
        result = cache[cache_key]
    else:
        est = estimate_alpha(ladder_R=ladder_R, ladder_h=ladder_h,
                             with_oracle=not args.no_oracle)
        result = est.to_json_dict()
        cache[cache_key] = result
        _atomic_write(cache_file, json.dumps(cache, indent=2, sort_keys=True))
    out = Path(args.out) / "alpha.json"
    _write_json(out, result, manifest)
    _write_json(Path(args.out) / "alpha_manifest.json",
                {"outputs": manifest.outputs}, manifest)
    print(f"alpha = {result['alpha']!r}"
          + (f" (oracle {result['oracle_alpha']!r})"
             if result.get("oracle_alpha") else "")
          + (" [cache hit]" if manifest.cache_hit else ""))
    return EXIT_OK


def _single_hole_problem(cfg: ModelConfig) -> SecularProblem:
    if len(cfg.holes) != 1:
        raise UsageError(
            f"spectrum needs a config with exactly one hole, got {len(cfg.holes)}")
    hole = cfg.holes[0]
    return SecularProblem(a=hole.position_a, kappa=hole.kappa(cfg.alpha))


def cmd_spectrum(args) -> int:
    cfg = _load_config(args)
    if args.count < 1:
        raise UsageError(f"count must be >= 1, got {args.count}")
    problem = _single_hole_problem(cfg)
    manifest = RunManifest(
        subcommand="spectrum", config=cfg.to_json_dict(),
        params={"count": args.count}, seed=args.seed)
    spec = find_roots(problem, args.count)
    out = Path(args.out)
    _write_csv(out / "spectrum.csv", spec.to_csv(cfg.tube), manifest)
    payload = spec.to_json_dict()
    payload["kappa"] = problem.kappa
    payload["freq_hz"] = [to_frequency_hz(mu, cfg.tube) for mu in spec.mu_list]
    _write_json(out / "spectrum.json", payload, manifest)
    _write_csv(out / "secular_curve.csv",
               _secular_curve_csv(problem, args.count), manifest)
    if args.json:
        print(json.dumps(payload["mu"]))
    else:
        for k, mu in enumerate(spec.mu_list, 1):
            print(f"k={k}  mu={mu:.12g}  lambda={mu * mu:.12g}  "
                  f"f={to_frequency_hz(mu, cfg.tube):.6g} Hz")
    return EXIT_OK


def _secular_curve_csv(problem: SecularProblem, count: int,
                       samples_per_pi: int = 200,
                       pole_margin: float = 0.02) -> str:
    """Samples of the quotient form f_a(mu) = -mu sin(mu) / (sin(mu a)
    sin(mu(1-a))) on (0, (count+1) pi), excluding pole neighborhoods. The
    horizontal line f_a(mu) = kappa marks the eigenfrequencies."""
    a = problem.a
    hi = (count + 1) * math.pi
    mus = np.linspace(1e-6, hi, int(samples_per_pi * hi / math.pi))
    denom = np.sin(mus * a) * np.sin(mus * (1 - a))
    ok = np.abs(denom) > pole_margin
    lines = [f"# kappa={problem.kappa:.12g}", "mu,f_a"]
    for mu, d, keep in zip(mus, denom, ok):
        if keep:
            fa = -mu * math.sin(mu) / d
            lines.append(f"{mu:.12g},{fa:.12g}")
    return "\n".join(lines) + "\n"


def cmd_fingering(args) -> int:
    cfg = _load_config(args)
    fingering = args.fingering
    if len(fingering) != len(cfg.holes):
        raise UsageError(
            f"fingering string length {len(fingering)} does not match the "
            f"number of holes {len(cfg.holes)}")
    fractions = {"o": 1.0, "x": 0.0, "h": 0.5}
    if any(ch not in fractions for ch in fingering):
        raise UsageError(f"fingering characters must be o/x/h, got {fingering!r}")
    manifest = RunManifest(
        subcommand="fingering", config=cfg.to_json_dict(),
        params={"fingering": fingering, "count": args.count},
        seed=args.seed)

    def problem_for(fracs):
        holes = tuple(
            (h.position_a, (h.alpha_override or cfg.alpha) * h.delta * f)
            for h, f in zip(cfg.holes, fracs))
        return GeneralizedProblem(holes=holes, bore=cfg.tube.bore,
                                  left_end=cfg.tube.left_end,
                                  right_end=cfg.tube.right_end)

    closed = shooting_spectrum(problem_for([0.0] * len(cfg.holes)), 1)
    f_ref = to_frequency_hz(closed.mu_list[0], cfg.tube)
    spec = shooting_spectrum(
        problem_for([fractions[ch] for ch in fingering]), args.count)
    rows = ["k,mu,freq_hz,cents_vs_all_closed"]
    table = []
    for k, mu in enumerate(spec.mu_list, 1):
        f = to_frequency_hz(mu, cfg.tube)
        c = cents(f, f_ref)
        rows.append(f"{k},{mu:.12g},{f:.12g},{c:.12g}")
        table.append({"k": k, "mu": mu, "freq_hz": f, "cents_vs_all_closed": c})
    out = Path(args.out)
    _write_csv(out / "fingering.csv", "\n".join(rows) + "\n", manifest)
    _write_json(out / "fingering.json",
                {"fingering": fingering, "all_closed_fundamental_hz": f_ref,
                 "notes": table}, manifest)
    for row in table:
        print(f"k={row['k']}  mu={row['mu']:.10g}  f={row['freq_hz']:.6g} Hz  "
              f"({row['cents_vs_all_closed']:+.1f} cents)")
    return EXIT_OK


def cmd_verify3d(args) -> int:
    cfg = _load_config(args)
    eps_ladder = _floats(args.epsilons)
    if args.m < 1:
        raise UsageError(f"m must be >= 1, got {args.m}")
    if len(cfg.holes) > 1:
        raise UsageError("verify3d supports at most one hole")
    hole = cfg.holes[0] if cfg.holes else None
    manifest = RunManifest(
        subcommand="verify3d", config=cfg.to_json_dict(),
        params={"epsilons": eps_ladder, "m": args.m,
                "trend_slack": args.trend_slack},
        seed=args.seed)
    # budget pre-check so over-budget ladders are a usage error, not a solver one
    for eps in eps_ladder:
        try:
            build_grid(Tube3DConfig(epsilon=eps, hole=hole))
        except BudgetError as exc:
            raise UsageError(str(exc)) from exc
    base = Tube3DConfig(epsilon=eps_ladder[0], hole=hole)
    report = convergence_study(base, eps_ladder, m=args.m, alpha=cfg.alpha,
                               seed=args.seed, trend_slack=args.trend_slack)
    out = Path(args.out)
    _write_csv(out / "sweep.csv", report.to_csv(), manifest)
    _write_json(out / "sweep.json", report.to_json_dict(), manifest)
    if report.failures:
        for eps, msg in report.failures:
            print(f"epsilon={eps}: {msg}", file=sys.stderr)
        return EXIT_SOLVER
    for r in report.rows:
        print(f"epsilon={r.epsilon}: lambda1_3d={r.lambdas_3d[0]:.8g} "
              f"lambda1_1d={r.lambdas_1d[0]:.8g} rel_dev={r.rel_dev[0]:.4g}")
    if len(report.rows) < 2:
        print("warning: ladder has fewer than 2 completed entries; "
              "trend check skipped", file=sys.stderr)
        return EXIT_OK
    if not report.k1_trend_ok():
        print("trend assertion failed: k=1 deviation is not nonincreasing "
              f"(slack {report.trend_slack})", file=sys.stderr)
        return EXIT_ASSERTION
    return EXIT_OK


def cmd_oracle1d(args) -> int:
    cfg = _load_config(args)
    problem = GeneralizedProblem(
        holes=tuple((h.position_a, h.kappa(cfg.alpha)) for h in cfg.holes),
        bore=cfg.tube.bore,
        left_end=cfg.tube.left_end, right_end=cfg.tube.right_end)
    manifest = RunManifest(
        subcommand="oracle1d", config=cfg.to_json_dict(),
        params={"n": args.n, "count": args.count},
        seed=args.seed)
    spec = fd_oracle(problem, n=args.n, count=args.count)
    out = Path(args.out)
    _write_csv(out / "oracle1d.csv", spec.to_csv(cfg.tube), manifest)
    _write_json(out / "oracle1d.json", spec.to_json_dict(), manifest)
    for k, mu in enumerate(spec.mu_list, 1):
        print(f"k={k}  mu={mu:.12g}  lambda={mu * mu:.12g}")
    return EXIT_OK


# ----------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="path to a ModelConfig JSON file")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--json", action="store_true",
                        help="machine-readable stdout")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--alpha", type=float, default=None,
                        help="override the config's coupling constant")
    common.add_argument("--epsilon", type=float, default=None,
                        help="override the config's epsilon")

    p = _Parser(prog="sidehole",
                description="Resonances of a flute tube with small side holes")
    sub = p.add_subparsers(dest="subcommand", required=True)

    pa = sub.add_parser("alpha", parents=[common],
                        help="compute the hole constant")
    pa.add_argument("--ladder-R", default="4,8,16", dest="ladder_R")
    pa.add_argument("--ladder-h", default="0.25,0.125,0.0625", dest="ladder_h")
    pa.add_argument("--no-oracle", action="store_true")
    pa.set_defaults(func=cmd_alpha)

    ps = sub.add_parser("spectrum", parents=[common],
                        help="1-D spectrum of a single-hole tube")
    ps.add_argument("--count", type=int, default=5)
    ps.set_defaults(func=cmd_spectrum)

    pf = sub.add_parser("fingering", parents=[common],
                        help="note table for a fingering pattern")
    pf.add_argument("--fingering", required=True,
                    help="one of o/x/h per hole (open/closed/half)")
    pf.add_argument("--count", type=int, default=4)
    pf.set_defaults(func=cmd_fingering)

    pv = sub.add_parser("verify3d", parents=[common],
                        help="3-D convergence sweep against the 1-D model")
    pv.add_argument("--epsilons", default="0.3,0.2,0.15")
    pv.add_argument("--m", type=int, default=3)
    pv.add_argument("--trend-slack", type=float, default=0.1,
                    dest="trend_slack",
                    help="allowed per-step growth of the k=1 deviation")
    pv.set_defaults(func=cmd_verify3d)

    po = sub.add_parser("oracle1d", parents=[common],
                        help="finite-difference oracle spectrum")
    po.add_argument("--n", type=int, default=2000)
    po.add_argument("--count", type=int, default=6)
    po.set_defaults(func=cmd_oracle1d)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SideholeError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
