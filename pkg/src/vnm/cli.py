"""``vnm`` command line: calibrate, check, demo, exhaust.

Every run produces a JSON report with the library version, an echo of the
run configuration and a timestamp.  Exit status: 0 on success or pass,
2 when an axiom is falsified (demos falsify on purpose), 1 on usage or
configuration errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from datetime import datetime, timezone
from typing import Optional

import numpy as np

from . import __version__
from .axioms import (AxiomReport, check_independence, check_mixture_laws,
                     check_segmental_continuity, check_sequential_continuity, check_weak_order,
                     closedness_witness, falsify_weakstar_closedness)
from .calibration import DEFAULT_TOL, calibrate, parse_grid
from .errors import VNMError
from .exhaustion import theorem1_exhaustion, trivial_exhaustion, verify_exhaustion
from .lottery import DensityMeasure, dirac, discretize, outcome_to_json, random_lottery
from .preference import Verdict, from_utility, oracle_from_config
from .utility import eval_utility, expect, from_config
from .weakstar import DEFAULT_FAMILY, converges, dudley_distance, lemma5_net, semicontinuity_net

EXIT_OK, EXIT_ERROR, EXIT_FALSIFIED = 0, 1, 2

AXIOMS = ("weak_order", "independence", "segmental_continuity", "weakstar_closedness",
          "sequential_continuity", "mixture_laws")

# allowed RunConfig fields per command (None-valued fields are dropped before validation)
FIELDS = {
    "calibrate": {"command", "oracle", "grid", "tol", "out", "report", "seed"},
    "check": {"command", "axiom", "oracle", "trials", "seed", "report", "grid_n", "levels",
              "exhaustion", "threads"},
    "demo": {"command", "demo", "utility", "xstar", "x0", "n", "x", "eps", "steps", "density",
             "carrier", "k", "out", "report"},
    "exhaust": {"command", "utility", "levels", "verify", "probes", "report"},
}
RANDOMIZED = {"check"}


class ConfigError(VNMError, ValueError):
    """A run configuration failed validation."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _load_json_arg(text: str):
    """Inline JSON, a path to a JSON file, or a bare catalog name."""
    text = text.strip()
    if text.startswith("{"):
        return json.loads(text)
    if os.path.exists(text):
        with open(text) as fh:
            return json.load(fh)
    return {"utility": text}


def validate_config(cfg: dict) -> dict:
    cmd = cfg.get("command")
    if cmd not in FIELDS:
        raise ConfigError(f"unknown command {cmd!r}")
    cfg = {k: v for k, v in cfg.items() if v is not None}
    extra = set(cfg) - FIELDS[cmd]
    if extra:
        raise ConfigError(f"unknown fields for {cmd}: {sorted(extra)}")
    if cmd in RANDOMIZED and "seed" not in cfg:
        raise ConfigError(f"{cmd} is randomized and needs a seed")
    return cfg


def _envelope(cfg: dict, result: dict, status: int) -> dict:
    return {"command": cfg["command"], "version": __version__, "config": cfg, "result": result,
            "exit_code": status, "timestamp": datetime.now(timezone.utc).isoformat()}


def _write_json(path: str, data) -> None:
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# commands


def _calibrate(cfg):
    o = oracle_from_config(cfg["oracle"])
    grid = parse_grid(cfg["grid"])
    res = calibrate(o, grid, cfg.get("tol", DEFAULT_TOL), seed=cfg.get("seed", 0))
    table = {"anchors": res.to_json()["anchors"], "points": res.to_json()["points"]}
    if "out" in cfg:
        _write_json(cfg["out"], table)
    result = res.to_json()
    result["table_file"] = cfg.get("out")
    return result, EXIT_OK


def _sample_triple(o, rng, region, tries=50):
    """Three random lotteries with P ≻ Q ≻ R, ordered by the oracle."""
    for _ in range(tries):
        ranked = []
        for L in (random_lottery(rng, region) for _ in range(3)):
            i = 0
            while i < len(ranked) and o.compare(ranked[i], L) is Verdict.FIRST_STRICT:
                i += 1
            ranked.insert(i, L)
        P, Q, R = ranked
        if o.compare(P, Q) is Verdict.FIRST_STRICT and o.compare(Q, R) is Verdict.FIRST_STRICT:
            return P, Q, R
    return None


def _check(cfg):
    axiom = cfg["axiom"]
    seed, trials = int(cfg["seed"]), int(cfg.get("trials", 1000))
    threads = cfg.get("threads")
    if axiom == "mixture_laws":
        rep = check_mixture_laws(trials, seed, threads=threads)
        return rep.to_json(), EXIT_FALSIFIED if rep.falsified else EXIT_OK
    if "oracle" not in cfg:
        raise ConfigError(f"axiom {axiom} needs --oracle")
    o = oracle_from_config(cfg["oracle"])
    if axiom == "weak_order":
        rng = np.random.default_rng(seed)
        sample = [random_lottery(rng, o.scope) for _ in range(trials)]
        rep = check_weak_order(o, sample)
        rep.seed = seed
    elif axiom == "independence":
        rep = check_independence(o, trials, seed, threads=threads)
    elif axiom == "segmental_continuity":
        grid_n = int(cfg.get("grid_n", 1000))
        rep = AxiomReport("segmental_continuity", 0, seed=seed, details={"grid_n": grid_n, "instances": []})
        for i in range(trials):
            trip = _sample_triple(o, np.random.default_rng([seed, i]), o.scope)
            if trip is None:
                continue
            r = check_segmental_continuity(o, *trip, grid_n)
            rep.trials += 1
            rep.details["instances"].append({"trial": i, "t_bar": r.details["t_bar"],
                                             "boundary": r.details["boundary"]})
            for w in r.violations:
                w.update({"trial": i, "seed": seed})
                rep.violations.append(w)
    elif axiom == "weakstar_closedness":
        rep = falsify_weakstar_closedness(o, trials, DEFAULT_FAMILY, seed, threads=threads)
    elif axiom == "sequential_continuity":
        if o.utility is None:
            raise ConfigError("sequential_continuity needs a utility-backed oracle to build levels")
        kind = cfg.get("exhaustion", "theorem1")
        levels = int(cfg.get("levels", 10))
        if kind == "theorem1":
            exh = theorem1_exhaustion(o.utility, levels)
        elif kind == "trivial":
            exh = trivial_exhaustion(o.utility.domain, levels)
        else:
            raise ConfigError(f"unknown exhaustion {kind!r}; use theorem1 or trivial")
        rep = check_sequential_continuity(o, exh, trials, DEFAULT_FAMILY, seed, threads=threads)
    else:
        raise ConfigError(f"unknown axiom {axiom!r}; choose from {', '.join(AXIOMS)}")
    return rep.to_json(), EXIT_FALSIFIED if rep.falsified else EXIT_OK


def _utility(cfg):
    spec = cfg.get("utility", "log")
    return from_config(spec if isinstance(spec, dict) else _load_json_arg(spec))


def _demo_lemma5(cfg):
    u = _utility(cfg)
    x_star = float(cfg.get("xstar", 1.0))
    x0 = float(cfg.get("x0", math.e))
    n_max = int(cfg.get("n", 30))
    o = from_utility(u)
    limit, rival = dirac(x_star), dirac(x0)
    nets, rows = [], []
    for n in range(n_max + 1):
        P = lemma5_net(u, x_star, x0, n)
        nets.append(P)
        xs = P.max_outcome()
        rows.append({"n": n, "x_n": outcome_to_json(xs),
                     "weights": {"x_star": f"{P[x_star].numerator}/{P[x_star].denominator}"
                                 if x_star in P.atoms else "0/1",
                                 "x_n": f"{P[xs].numerator}/{P[xs].denominator}"},
                     "expected_utility": expect(P, u),
                     "prefers_net_to_x0": o.compare(P, rival) is Verdict.FIRST_STRICT,
                     "dudley_to_limit": dudley_distance(P, limit)})
    tail = min(5, len(nets))
    w = closedness_witness(o, nets, [rival] * len(nets), limit, rival, tail=tail)
    result = {"utility": u.config, "x_star": x_star, "x0": x0, "net": rows,
              "x0_preferred_to_x_star": o.compare(rival, limit) is Verdict.FIRST_STRICT,
              "closedness_falsified": w is not None,
              "convergence": converges(nets, limit, tail=tail).to_json()}
    if "out" in cfg:
        _write_json(cfg["out"], result)
    return result, EXIT_FALSIFIED if w is not None else EXIT_OK


def _demo_semicontinuity(cfg):
    u = _utility(cfg if "utility" in cfg else {**cfg, "utility": "step"})
    x = float(cfg.get("x", 0.0))
    net = semicontinuity_net(u, x, float(cfg.get("eps", 0.5)), int(cfg.get("steps", 1000)))
    o = from_utility(u)
    A_seq, B_seq, A, B = net.sequences()
    w = closedness_witness(o, A_seq, B_seq, A, B)
    result = {"utility": u.config, "x": x, "kind": net.kind, "t": f"{net.t.numerator}/{net.t.denominator}",
              "blend": net.blend.to_json(), "blend_expected_utility": expect(net.blend, u),
              "u_at_x": eval_utility(u, x), "steps": len(net.outcomes),
              "first_outcomes": [outcome_to_json(v) for v in net.outcomes[:5]],
              "convergence": converges([dirac(v) for v in net.outcomes], dirac(x)).to_json(),
              "closedness_falsified": w is not None}
    result["convergence"]["scores"] = result["convergence"]["scores"][-5:]
    if "out" in cfg:
        _write_json(cfg["out"], result)
    return result, EXIT_FALSIFIED if w is not None else EXIT_OK


def _demo_density(cfg):
    name = cfg.get("density", "uniform")
    carrier = cfg.get("carrier", "0,1")
    a, b = (float(v) for v in str(carrier).split(","))
    ks = [int(v) for v in str(cfg.get("k", "4,16,64,256")).split(",")]
    M = DensityMeasure.from_catalog(name, (a, b))
    L = DEFAULT_FAMILY.max_lipschitz
    rows, ok = [], True
    for k in ks:
        d = dudley_distance(M, discretize(M, k))
        bound = L * (b - a) / (2 * k)
        ok &= d <= bound
        rows.append({"k": k, "dudley": d, "bound": bound, "within_bound": d <= bound})
    result = {"density": M.to_json(), "discretizations": rows, "all_within_bound": ok}
    if "utility" in cfg:
        u = _utility(cfg)
        result["expected_utility"] = {"density": expect(M, u),
                                      "discretized": [expect(discretize(M, k), u) for k in ks]}
    if "out" in cfg:
        _write_json(cfg["out"], result)
    return result, EXIT_OK if ok else EXIT_FALSIFIED


def _demo(cfg):
    kind = cfg.get("demo")
    handlers = {"lemma5": _demo_lemma5, "semicontinuity": _demo_semicontinuity,
                "density": _demo_density}
    if kind not in handlers:
        raise ConfigError(f"unknown demo {kind!r}; choose from {sorted(handlers)}")
    return handlers[kind](cfg)


def _probe_grid(exh, count: int) -> list:
    """Probes across the last level, clipped to [-1e3, 1e3]; log-spaced on
    positive ranges."""
    last = exh.levels[-1]
    if last.is_empty or count < 1:
        return []
    lo, hi = max(last.lower, -1e3), min(last.upper, 1e3)
    if lo > 0:
        pts = np.exp(np.linspace(math.log(lo), math.log(hi), count + 2))[1:-1]
    else:
        pts = np.linspace(lo, hi, count + 2)[1:-1]
    return [float(x) for x in pts]


def _exhaust(cfg):
    u = _utility(cfg)
    exh = theorem1_exhaustion(u, int(cfg.get("levels", 10)))
    result = {"exhaustion": exh.to_json()}
    status = EXIT_OK
    if cfg.get("verify"):
        probes = _probe_grid(exh, int(cfg.get("probes", 1000)))
        rep = verify_exhaustion(exh, probe_grid=probes)
        result["verification"] = rep.to_json()
        status = EXIT_OK if rep.ok else EXIT_FALSIFIED
    return result, status


COMMANDS = {"calibrate": _calibrate, "check": _check, "demo": _demo, "exhaust": _exhaust}


def run(config: dict, report_path: Optional[str] = None):
    """Validate a RunConfig, execute it, write the report.  Returns
    (exit_code, report)."""
    cfg = validate_config(config)
    result, status = COMMANDS[cfg["command"]](cfg)
    report = _envelope(cfg, result, status)
    path = report_path or cfg.get("report")
    if path:
        _write_json(path, report)
    return status, report


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="vnm", description="Expected-utility lotteries, axiom falsifiers and calibration.")
    p.add_argument("--version", action="version", version=f"vnm {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("calibrate", help="recover a utility table by standard gambles")
    c.add_argument("--oracle", required=True, help="oracle config: inline JSON or a path")
    c.add_argument("--grid", required=True, help="lin:N:[a,b] or log:N:[a,b]")
    c.add_argument("--tol", type=float, default=DEFAULT_TOL)
    c.add_argument("--out", help="table JSON path")
    c.add_argument("--report")
    c.add_argument("--seed", type=int, help="seed for the post-hoc verification sample")

    k = sub.add_parser("check", help="run an axiom checker or falsifier")
    k.add_argument("--axiom", required=True, choices=AXIOMS)
    k.add_argument("--oracle", help="oracle config: inline JSON or a path")
    k.add_argument("--trials", type=int, default=1000)
    k.add_argument("--seed", type=int, required=True)
    k.add_argument("--report")
    k.add_argument("--grid-n", type=int, dest="grid_n")
    k.add_argument("--levels", type=int)
    k.add_argument("--exhaustion", choices=("theorem1", "trivial"))
    k.add_argument("--threads", type=int)

    d = sub.add_parser("demo", help="counterexample and discretization demonstrations")
    d.add_argument("demo", choices=("lemma5", "semicontinuity", "density"))
    d.add_argument("--utility", help="catalog name or utility JSON")
    d.add_argument("--xstar", type=float)
    d.add_argument("--x0", type=float)
    d.add_argument("--n", type=int)
    d.add_argument("--x", type=float, help="jump point for the semicontinuity net")
    d.add_argument("--eps", type=float)
    d.add_argument("--steps", type=int)
    d.add_argument("--density", choices=("uniform", "triangular", "beta"))
    d.add_argument("--carrier", help="a,b")
    d.add_argument("--k", help="comma-separated cell counts")
    d.add_argument("--out")
    d.add_argument("--report")

    e = sub.add_parser("exhaust", help="build u^-1([-n, n]) levels and verify them")
    e.add_argument("--utility", default="log")
    e.add_argument("--levels", type=int, default=10)
    e.add_argument("--verify", action="store_true")
    e.add_argument("--probes", type=int, default=1000)
    e.add_argument("--report")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = {k: v for k, v in vars(args).items() if v is not None}
    try:
        if "oracle" in cfg:
            cfg["oracle"] = _load_json_arg(cfg["oracle"])
        if cfg.get("verify") is False:
            del cfg["verify"]
        status, report = run(cfg)
    except (VNMError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"vnm: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if not cfg.get("report"):
        json.dump(report, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    else:
        summary = report["result"].get("verdict", "ok" if status == EXIT_OK else "falsified")
        print(f"{cfg['command']}: {summary} (exit {status}); report written to {cfg['report']}")
    return status


if __name__ == "__main__":
    sys.exit(main())
