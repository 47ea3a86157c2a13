"""Command-line experiment runner.

Exit status: 0 when every declared check passes, 1 when a check fails,
2 on a configuration error, 3 when a minimization does not converge.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import fields
from typing import Sequence

import numpy as np

from .config import SUBCOMMANDS, ConfigError, ExperimentConfig, load_config
from .dynamics import WaveState, conservation_report, embed_radial, evolve, h1_norm
from .functional import (
    MassSpec,
    check_thresholds,
    energy,
    gn_check,
    multipliers,
    pde_residual,
    pohozaev_residual,
    solve_soliton,
)
from .grid import RADIAL, Domain, Field
from .nonlinearity import check_hypotheses, eta_estimate
from .rearrange import property_suite
from .solver import (
    Check,
    MinimizeOptions,
    MinimizeResult,
    ThresholdViolation,
    energy_map_monotone,
    minimize,
    scan_energy_map,
    subadditivity_check,
    verify_ground_state,
)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NONCONVERGED = 0, 1, 2, 3


# -- artifacts -----------------------------------------------------------------


def atomic_write(path: str, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n"


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    raise TypeError(f"not serializable: {type(x).__name__}")


class Run:
    """Collects summary lines and checks for one subcommand."""

    def __init__(self, out: str):
        self.out = out
        self.lines: list[str] = []
        self.checks: list[Check] = []

    def info(self, line: str) -> None:
        self.lines.append(line)

    def check(self, c: Check) -> None:
        self.checks.append(c)
        self.lines.append(c.line())

    def write(self, name: str, text: str) -> None:
        atomic_write(os.path.join(self.out, name), text)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


# -- helpers -------------------------------------------------------------------


def _options(cfg: ExperimentConfig, seed: int) -> MinimizeOptions:
    allowed = {f.name for f in fields(MinimizeOptions)} - {"seed"}
    kw = {k: v for k, v in cfg.solver.items() if k in allowed}
    try:
        return MinimizeOptions(seed=seed, **kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"solver: {exc}") from exc


def _mass(cfg: ExperimentConfig, F) -> MassSpec:
    a = cfg.require_mass()
    if len(a) != F.M:
        raise ConfigError(f"mass has {len(a)} entries but the nonlinearity has M={F.M}")
    try:
        return MassSpec(a)
    except ValueError as exc:
        raise ConfigError(f"mass: {exc}") from exc


def _threshold_checks(run: Run, F, a: MassSpec) -> None:
    rep = check_thresholds(F, a.array())
    run.check(Check("upper mass condition (eta_inf)", rep.etas_ok, rep.margins[0], f"lhs {rep.lhs_upper:.6g} < 1"))
    run.check(Check("lower mass condition (eta0)", rep.etal_ok, rep.margins[1], f"lhs {rep.lhs_lower:.6g} > 1"))


def _result_artifacts(run: Run, res: MinimizeResult, prefix: str = "") -> None:
    run.write(f"{prefix}result.json", json_text(res.to_dict()))
    run.write(f"{prefix}field.csv", res.u.to_csv())
    run.write(f"{prefix}energy_log.csv", csv_text(["iteration", "energy", "stationarity", "step"], res.log))


# -- subcommands ---------------------------------------------------------------


def cmd_gn_const(cfg: ExperimentConfig, args, run: Run) -> int:
    N = args.N if args.N is not None else int(cfg.gn.get("N", 1))
    if N < 1:
        raise ConfigError("N must be a positive integer")
    gn = solve_soliton(N)
    ts = gn.two_sharp
    run.info(f"N = {N}, 2# = {ts:g}")
    run.info(f"w(0) = {gn.w0:.10f}")
    run.info(f"|w|_2^2 = {gn.mass_w:.10f}")
    run.info(f"C = {gn.C:.10f}")
    run.info(f"C^{ts:g} = {gn.C_pow:.6f}")
    kappa = math.sqrt(2.0 / N)
    dom = Domain.radial(N, 40.0 / kappa, 8192)
    ratio = gn_check(gn, gn.sample(dom))
    run.check(Check("GN ratio at the soliton", abs(ratio - 1) <= 1e-4, 1e-4 - abs(ratio - 1), f"ratio {ratio:.8f}"))
    if N == 1:
        for name, got, want in (("w(0) = 6^(1/4)", gn.w0, 6**0.25), ("|w|_2^2 = pi sqrt3 / 2", gn.mass_w, math.pi * math.sqrt(3) / 2),
                                ("C^6 = 4 / pi^2", gn.C_pow, 4 / math.pi**2)):
            run.check(Check(name, abs(got - want) <= 1e-5, 1e-5 - abs(got - want)))
    run.write("gn.json", json_text(gn.to_dict()))
    prof = gn.sample(dom)
    run.write("soliton.csv", prof.to_csv())
    return EXIT_OK if run.passed else EXIT_FAIL


def cmd_minimize(cfg: ExperimentConfig, args, run: Run) -> int:
    F = cfg.build_nonlinearity()
    a = _mass(cfg, F)
    dom = cfg.build_domain()
    opts = _options(cfg, args.seed)
    _threshold_checks(run, F, a)
    try:
        res = minimize(F, a, dom, opts)
    except ThresholdViolation as exc:
        run.info(f"refused: {exc}")
        run.write("result.json", json_text({"refused": str(exc)}))
        return EXIT_FAIL
    _result_artifacts(run, res)
    run.info(f"m = {res.energy:.6f}")
    run.info("lambda = " + ", ".join(f"{x:.6f}" for x in res.lam))
    run.info(f"iterations = {res.iterations}, stationarity = {res.stationarity:.3g}, init = {res.init}")
    for c in verify_ground_state(F, a, res).checks:
        run.check(c)
    if not res.converged:
        run.info(f"not converged: {res.reason}")
        return EXIT_NONCONVERGED
    return EXIT_OK if run.passed else EXIT_FAIL


def _mass_list(raw, M: int, where: str) -> list[MassSpec]:
    if not isinstance(raw, list) or not raw:
        raise ConfigError(f"{where} must be a nonempty list")
    out = []
    for x in raw:
        t = tuple(np.atleast_1d(np.asarray(x, dtype=float)))
        if len(t) != M:
            raise ConfigError(f"{where}: entry {x!r} does not have {M} components")
        try:
            out.append(MassSpec(t))
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from exc
    return out


def cmd_scan_m(cfg: ExperimentConfig, args, run: Run) -> int:
    F = cfg.build_nonlinearity()
    grid = _mass_list(cfg.scan.get("a_grid"), F.M, "scan.a_grid")
    opts = _options(cfg, args.seed)
    domains = cfg.scan.get("domains")
    if domains is not None:
        if not isinstance(domains, list) or len(domains) != len(grid):
            raise ConfigError("scan.domains must list one domain per a_grid entry")
        doms = [cfg.build_domain(d) for d in domains]
    else:
        doms = [cfg.build_domain()] * len(grid)
    lookup = dict(zip(grid, doms))
    warm = bool(cfg.scan.get("warm_start", True))
    if warm or args.threads <= 1:
        records = scan_energy_map(F, grid, lambda m: lookup[m], opts, warm_start=warm)
    else:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            parts = list(pool.map(lambda m: scan_energy_map(F, [m], lookup[m], opts, warm_start=False)[0], grid))
        records = parts
    header = [f"a{j + 1}" for j in range(F.M)] + ["m", "converged"]
    run.write("scan.csv", csv_text(header, [r.row() for r in records]))
    for r in records:
        run.info(f"a = {list(r.a.a)}: m = {r.m:.8g}, converged = {r.converged}, saturated = {r.saturated}")
    run.check(energy_map_monotone(records))
    if not all(r.converged for r in records):
        return EXIT_NONCONVERGED
    return EXIT_OK if run.passed else EXIT_FAIL


def cmd_subadd(cfg: ExperimentConfig, args, run: Run) -> int:
    F = cfg.build_nonlinearity()
    (a,) = _mass_list([cfg.subadd.get("a", cfg.mass)], F.M, "subadd.a")
    (b,) = _mass_list([cfg.subadd.get("b")], F.M, "subadd.b")
    dom = cfg.build_domain()
    opts = _options(cfg, args.seed)
    rep = subadditivity_check(F, a, b, dom, opts, tuple(cfg.subadd.get("scaling_s", (1.5, 2.0))))
    run.info(f"m(a) = {rep.m_a:.8g}, m(b) = {rep.m_b:.8g}, m(sqrt(a^2+b^2)) = {rep.m_ab:.8g}")
    run.info(f"slack = {rep.slack:.8g}")
    for c in rep.checks():
        run.check(c)
    run.write("subadd.json", json_text({"m_a": rep.m_a, "m_b": rep.m_b, "m_ab": rep.m_ab, "slack": rep.slack,
                                        "saturated": rep.saturated, "converged": rep.converged,
                                        "scaling": [list(x) for x in rep.scaling]}))
    if not rep.converged:
        return EXIT_NONCONVERGED
    return EXIT_OK if run.passed else EXIT_FAIL


def cmd_rearrange_test(cfg: ExperimentConfig, args, run: Run) -> int:
    sec = cfg.rearrange
    try:
        dom = Domain.radial(int(sec.get("N", 2)), float(sec.get("r_max", 12.0)), int(sec.get("n_points", 4000)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"rearrange: {exc}") from exc
    trials = int(sec.get("trials", 200))
    results = property_suite(dom, trials, args.seed)
    for c in results:
        run.lines.append(c.line())
        run.checks.append(Check(c.name, c.passed, c.tol - c.worst))
    run.write("rearrange.csv", csv_text(["property", "worst", "tolerance", "passed"],
                                        [[c.name, c.worst, c.tol, c.passed] for c in results]))
    return EXIT_OK if run.passed else EXIT_FAIL


def cmd_eta_limits(cfg: ExperimentConfig, args, run: Run) -> int:
    F = cfg.build_nonlinearity()
    out = {}
    for side, exact in (("zero", F.eta0()), ("infinity", F.eta_inf())):
        est = eta_estimate(F, side)
        name = "eta0" if side == "zero" else "eta_inf"
        out[name] = {"closed_form": exact, "estimate": est.value, "trend": est.trend}
        run.info(f"{name}: estimate {est.value:.8g} ({est.trend})" + ("" if exact is None else f", closed form {exact:.8g}"))
        if exact is not None:
            if math.isinf(exact) or exact == 0:
                ok, margin = est.value == exact, 0.0 if est.value == exact else -1.0
            else:
                err = abs(est.value - exact) / abs(exact)
                ok, margin = err <= 1e-3, 1e-3 - err
            run.check(Check(f"{name} estimate matches closed form", ok, margin))
    hyp = check_hypotheses(F)
    for v in hyp.verdicts.values():
        run.lines.append(f"{'PASS' if v.passed else 'FAIL'} hypothesis {v.name}: {v.detail}")
        run.checks.append(Check(v.name, v.passed, 0.0))
    out["hypotheses"] = {k: {"passed": v.passed, "detail": v.detail} for k, v in hyp.verdicts.items()}
    run.write("eta.json", json_text(out))
    return EXIT_OK if run.passed else EXIT_FAIL


def _dynamics_box(cfg: ExperimentConfig) -> Domain:
    d = cfg.dynamics
    try:
        return Domain.periodic(float(d.get("L", 120.0)), int(d.get("n_points", 1024)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"dynamics: {exc}") from exc


def cmd_evolve(cfg: ExperimentConfig, args, run: Run) -> int:
    F = cfg.build_nonlinearity()
    if F.N != 1:
        raise ConfigError("evolve runs on a one-dimensional periodic box; the nonlinearity needs N=1")
    a = _mass(cfg, F)
    dom = cfg.build_domain()
    if dom.kind != RADIAL:
        raise ConfigError("evolve computes its ground state on a RadialN domain")
    box = _dynamics_box(cfg)
    d = cfg.dynamics
    dt, T = float(d.get("dt", 1e-3)), float(d.get("T", 10.0))
    eps = float(d.get("perturbation", 0.0))
    every = int(d.get("observe_every", max(1, int(round(0.1 / dt)))))
    res = minimize(F, a, dom, _options(cfg, args.seed))
    if not res.converged:
        run.info(f"ground state not converged: {res.reason}")
        return EXIT_NONCONVERGED
    u = embed_radial(res.u, box)
    V = u.values.astype(complex)
    if eps > 0:
        rng = np.random.default_rng(args.seed)
        x = box.r
        pert = np.zeros_like(V)
        for j in range(F.M):
            for _ in range(4):
                c = rng.normal() + 1j * rng.normal()
                pert[j] += c * np.exp(-((x - rng.uniform(-5, 5)) / rng.uniform(1.0, 4.0)) ** 2)
        V = V + eps * h1_norm(box, u.values) / h1_norm(box, pert) * pert
    state = WaveState(Field(box, V))
    orbit = [u] if d.get("orbit", True) else None
    traj = evolve(F, state, dt, T, every, orbit)
    header = ["t"] + [f"mass{j + 1}" for j in range(F.M)] + ["energy"] + (["orbital_distance"] if orbit else [])
    run.write("trajectory.csv", csv_text(header, traj.rows()))
    rep = conservation_report(traj)
    run.info("lambda = " + ", ".join(f"{x:.6f}" for x in res.lam))
    run.check(Check("mass conservation", bool(np.all(rep.mass_drift <= 1e-10)), float(1e-10 - rep.mass_drift.max())))
    run.info(f"energy drift = {rep.energy_drift:.3g}, wrap-around = {rep.wraparound:.3g}")
    if eps == 0:
        dev = float(np.abs(np.abs(traj.final.values) - np.abs(u.values)).max())
        run.check(Check("standing-wave modulus", dev <= 1e-4, 1e-4 - dev))
    if orbit:
        d0, sup = traj.distances[0], max(traj.distances)
        if eps > 0:
            run.check(Check("orbital distance stays within 5x initial", sup <= 5 * d0, 5 * d0 - sup, f"sup {sup:.4g}, initial {d0:.4g}"))
        else:
            run.info(f"sup orbital distance = {sup:.3g}")
    return EXIT_OK if run.passed else EXIT_FAIL


def _result_from_field(F, a: MassSpec, u: Field) -> MinimizeResult:
    """Wrap a stored field as a result so the ground-state checks can run on it."""
    lam = multipliers(F, u)
    J = energy(F, u)
    sat = [bool(math.sqrt(u.domain.integrate(c * c)) >= aj - 1e-6) for c, aj in zip(u.values, a.a)]
    symmetry = "radial" if u.domain.kind == RADIAL else "X"
    return MinimizeResult(u, J, lam, pde_residual(F, u, lam), pohozaev_residual(F, u, lam), sat, 0, True,
                          symmetry, 0.0, J, "given")


def cmd_verify(cfg: ExperimentConfig, args, run: Run) -> int:
    F = cfg.build_nonlinearity()
    a = _mass(cfg, F)
    for v in check_hypotheses(F).verdicts.values():
        run.lines.append(f"{'PASS' if v.passed else 'FAIL'} hypothesis {v.name}: {v.detail}")
        run.checks.append(Check(v.name, v.passed, 0.0))
    _threshold_checks(run, F, a)
    path = cfg.verify.get("input")
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                u = Field.from_json(fh.read())
        except (OSError, ValueError, KeyError) as exc:
            raise ConfigError(f"verify.input: {exc}") from exc
        res = _result_from_field(F, a, u)
    else:
        res = minimize(F, a, cfg.build_domain(), _options(cfg, args.seed))
    run.info(f"energy = {res.energy:.8g}")
    for c in verify_ground_state(F, a, res, strict_monotone=bool(cfg.verify.get("strict_monotone", False))).checks:
        run.check(c)
    if not res.converged:
        return EXIT_NONCONVERGED
    return EXIT_OK if run.passed else EXIT_FAIL


COMMANDS = {
    "gn-const": cmd_gn_const,
    "minimize": cmd_minimize,
    "scan-m": cmd_scan_m,
    "subadd": cmd_subadd,
    "rearrange-test": cmd_rearrange_test,
    "eta-limits": cmd_eta_limits,
    "evolve": cmd_evolve,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="normsys", description="Normalized ground states of Schrödinger systems.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON configuration file")
        s.add_argument("--out", default="out", help="output directory (default: out)")
        s.add_argument("--seed", type=int, default=None, help="override the config seed")
        s.add_argument("--threads", type=int, default=1, help="parallel independent runs")
        if name == "gn-const":
            s.add_argument("--N", type=int, default=None, help="space dimension")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config:
            cfg = load_config(args.config)
        elif args.command in ("gn-const", "rearrange-test"):
            cfg = ExperimentConfig()
        else:
            raise ConfigError(f"{args.command} needs --config")
        if cfg.subcommand is not None and cfg.subcommand != args.command:
            raise ConfigError(f"config is for {cfg.subcommand!r}, not {args.command!r}")
        if args.seed is None:
            args.seed = cfg.seed
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        run = Run(args.out)
        code = COMMANDS[args.command](cfg, args, run)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    summary = "\n".join(run.lines) + "\n"
    sys.stdout.write(summary)
    run.write("summary.txt", summary)
    return code


if __name__ == "__main__":
    sys.exit(main())
