"""Command-line front end: named verification suites with JSON/CSV reports.

One process, subcommand dispatch.  Exit codes: 0 all checks pass, 1 at
least one verification failed, 2 usage or input error.  Reports are
deterministic for a fixed seed; PIC_TOOLKIT_SEED overrides any configured
seed.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import bands, comparison, curvature, exterior, gridcalc, hodge, potentials
from .reporting import Region, Report, dump_reports, write_csv


@dataclass
class SuiteConfig:
    suite: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    tol: float = 1e-9
    out: str | None = None


class InputError(ValueError):
    """Bad config or data file; maps to exit code 2."""


def _parse_range(text: str):
    """'4..8' -> [4, 6, 8] (even only when span > 1), '4' -> [4]."""
    if ".." in text:
        lo, hi = (int(t) for t in text.split("..", 1))
        return list(range(lo, hi + 1))
    return [int(text)]


# -- suites --------------------------------------------------------------


def suite_clifford(cfg: SuiteConfig):
    rng = np.random.default_rng(cfg.seed)
    reports = []
    for n in cfg.params.get("dims", [4, 5, 6, 7, 8]):
        worst = 0.0
        eye = np.eye(n)
        for k in range(n + 1):
            for key in exterior.degree_basis(n, k):
                a = exterior.FormElement(n, {key: 1.0})
                for i in range(n):
                    for j in range(i, n):
                        ci_cj = exterior.clifford_c(eye[i], exterior.clifford_c(eye[j], a))
                        cj_ci = exterior.clifford_c(eye[j], exterior.clifford_c(eye[i], a))
                        t1 = ci_cj + cj_ci + (2.0 if i == j else 0.0) * a
                        ti_tj = exterior.clifford_ct(eye[i], exterior.clifford_ct(eye[j], a))
                        tj_ti = exterior.clifford_ct(eye[j], exterior.clifford_ct(eye[i], a))
                        t2 = ti_tj + tj_ti - (2.0 if i == j else 0.0) * a
                        mixed = exterior.clifford_c(eye[i], exterior.clifford_ct(eye[j], a)) + \
                            exterior.clifford_ct(eye[j], exterior.clifford_c(eye[i], a))
                        worst = max(worst, t1.norm(), t2.norm(), mixed.norm())
        samples = cfg.params.get("samples", 100)
        for _ in range(samples):
            u = rng.standard_normal(n)
            v = rng.standard_normal(n)
            w = exterior.random_form(n, int(rng.integers(0, n + 1)), rng)
            lhs = exterior.clifford_c(u, exterior.clifford_c(v, w)) + exterior.clifford_c(
                v, exterior.clifford_c(u, w)
            )
            worst = max(worst, (lhs + 2.0 * float(u @ v) * w).norm() / max(1.0, w.norm()))
        reports.append(
            Report(
                check=f"clifford.relations.n{n}",
                params={"n": n, "samples": samples},
                passed=worst < 1e-12,
                tolerance=1e-12,
                regions=[Region("relation_margin", 1e-12 - worst)],
                details={"max_defect": worst},
            )
        )
    return reports


def _tensor_from_params(cfg: SuiteConfig, n: int):
    path = cfg.params.get("tensor")
    if path:
        try:
            with open(path) as fh:
                return curvature.load_curvature_json(json.load(fh))
        except (OSError, KeyError, ValueError) as exc:
            raise InputError(f"cannot load curvature tensor from {path}: {exc}") from exc
    h = np.zeros((n, n))
    h[: n - 1, : n - 1] = np.eye(n - 1)
    return curvature.kulkarni_nomizu(h, h) * 0.5  # product model default


def suite_curvature(cfg: SuiteConfig):
    n = cfg.params.get("n", 4)
    sigma = cfg.params.get("sigma", 1.0)
    R = _tensor_from_params(cfg, n)
    scfg = curvature.SearchConfig(seed=cfg.seed, tolerance=cfg.tol)
    verdict = curvature.is_sigma_pic(R, sigma, scfg)
    report = Report(
        check="curvature.sigma_pic",
        params={"n": R.n, "sigma": sigma, "restarts": scfg.restarts},
        passed=verdict.passed,
        tolerance=scfg.tolerance,
        regions=[Region("min_isotropic_margin", verdict.min_found - sigma)],
        details={"min_found": verdict.min_found, "seed": scfg.seed},
    )
    return [report]


def suite_weitzenboeck(cfg: SuiteConfig):
    n = cfg.params.get("n", 4)
    sigma = cfg.params.get("sigma", 1.0)
    R = _tensor_from_params(cfg, n)
    scfg = curvature.SearchConfig(seed=cfg.seed, tolerance=cfg.tol)
    rep = curvature.weitzenboeck_lower_bound_check(R, sigma, scfg)
    double_path = float(
        np.max(
            np.abs(
                curvature.weitzenboeck_on_two_forms(R).matrix
                - curvature.weitzenboeck_clifford_trace(R)
            )
        )
    )
    return [
        Report(
            check="weitzenboeck.lower_bound",
            params={"n": R.n, "sigma": sigma},
            passed=rep.passed or not rep.asserted,
            tolerance=1e-9,
            regions=[Region("eigenvalue_margin", rep.margin)],
            details={
                "lambda_min": rep.lambda_min,
                "bound": rep.bound,
                "pic_precondition": rep.pic_verdict.passed,
                "asserted": rep.asserted,
            },
        ),
        Report(
            check="weitzenboeck.double_path",
            params={"n": R.n},
            passed=double_path < 1e-10,
            tolerance=1e-10,
            regions=[Region("matrix_agreement", 1e-10 - double_path)],
        ),
    ]


def suite_comparison(cfg: SuiteConfig):
    rng = np.random.default_rng(cfg.seed)
    draws = cfg.params.get("draws", 20)
    worst = 0.0
    for _ in range(draws):
        n = int(rng.integers(3, 8))
        K = float(rng.uniform(0.05, 4.0))
        Lam = float(rng.uniform(0.0, 3.0))
        rho = float(rng.uniform(0.05, 2.0))
        model = comparison.RotSymModel(n=n, K=K, A0=-Lam / (n - 1))
        res = comparison.riccati_oracle(model, rho)
        barrier = comparison.laplace_upper_negative_boundary(
            comparison.ComparisonParams(n, K, Lam, rho)
        )
        worst = max(worst, abs(res.trace - barrier))
    pole_err = 0.0
    for _ in range(5):
        K = float(rng.uniform(0.3, 2.0))
        Lam = math.sqrt(K) * float(rng.uniform(1.2, 3.0))
        out = comparison.laplace_upper_positive_boundary(
            comparison.ComparisonParams(4, K, Lam, 50.0)
        )
        expected = math.atanh(math.sqrt(K) / Lam) / math.sqrt(K)
        pole_err = max(pole_err, abs(out.rho_pole - expected))
    flat = comparison.ComparisonParams(4, 0.0, 0.0, 0.0, r_f=3.0)
    limit_err = max(
        abs(comparison.hessian_lower_focal(flat) + 2.0 / 3.0),
        abs(comparison.laplace_lower_focal(flat) + 2.0),
    )
    return [
        Report(
            check="comparison.umbilic_equality",
            params={"draws": draws},
            passed=worst < 1e-6,
            tolerance=1e-6,
            regions=[Region("oracle_vs_barrier", 1e-6 - worst)],
            details={"seed": cfg.seed},
        ),
        Report(
            check="comparison.pole_location",
            params={},
            passed=pole_err < 1e-9,
            tolerance=1e-9,
            regions=[Region("pole_agreement", 1e-9 - pole_err)],
        ),
        Report(
            check="comparison.flat_limits",
            params={"r_f": 3.0},
            passed=limit_err < 1e-9,
            tolerance=1e-9,
            regions=[Region("flat_limit_agreement", 1e-9 - limit_err)],
        ),
    ]


def suite_bandwidth(cfg: SuiteConfig):
    p = potentials.BandwidthParams(
        n=cfg.params.get("n", 4),
        sigma=cfg.params.get("sigma", 1.0),
        delta=cfg.params.get("delta", 0.1),
        Lambda=cfg.params.get("Lambda", 0.2),
        r_f=cfg.params.get("rf", 8.0),
        L=cfg.params.get("L", 8.0),
    )
    reports = [potentials.verify_bandwidth_margin(p), potentials.check_L_chain(p.n, p.sigma, p.delta)]
    chi = potentials.make_chi()
    xs = np.linspace(0.0, 2.0, 10_001)
    chi_ok = (
        float(np.max(np.abs(chi.chi(xs[xs <= 0.5]) + xs[xs <= 0.5]))) < 1e-12
        and float(chi.chipp(xs).min()) >= 0.0
        and float(chi.chipp(xs).max()) <= 4.0
        and float(chi.chip(xs).min()) >= -1.0
        and float(chi.chip(xs).max()) <= 0.0
    )
    reports.append(
        Report(
            check="bandwidth.chi_cutoff",
            params={"plateau_end": chi.plateau_end},
            passed=chi_ok,
            tolerance=1e-12,
            regions=[Region("chi_second_deriv_headroom", 4.0 - float(chi.chipp(xs).max()))],
            details={"c_plateau": chi.c_plateau},
        )
    )
    return reports


def suite_focal(cfg: SuiteConfig):
    p = potentials.FocalParams(
        n=cfg.params.get("n", 4),
        sigma=cfg.params.get("sigma", 1.0),
        lam=cfg.params.get("lam", 5.0),
        lam_bar=cfg.params.get("lam_bar", 100.0),
    )
    r_f = cfg.params.get("rf", 18.01)
    reports = [
        potentials.check_focal_regularity(p, r_f),
        potentials.check_focal_boundary(p),
        potentials.verify_focal_inequality(p, r_f, orientation="N"),
        potentials.verify_focal_inequality(p, r_f, orientation="D"),
    ]
    if cfg.out:
        rows = potentials.focal_margin_rows(p, r_f)
        write_csv(_sibling(cfg.out, "focal_margins.csv"), ["rho", "lhs", "rhs", "margin"], rows)
    return reports


def suite_identities(cfg: SuiteConfig):
    reports = []
    grid_path = cfg.params.get("grid")
    if grid_path:
        try:
            with open(grid_path) as fh:
                grid, fields = gridcalc.load_grid_config(json.load(fh))
        except (OSError, KeyError, ValueError) as exc:
            raise InputError(f"cannot load grid config from {grid_path}: {exc}") from exc
        if len(fields) < 2:
            raise InputError("grid config needs at least two fields for the pairings")
        alpha, beta = fields[0], fields[1]
        res_dirac = gridcalc.green_residual_dirac(alpha, beta)
        res_lap = gridcalc.green_residual_laplace(alpha, beta)
        bound = cfg.params.get("residual_bound", 10.0 * grid.h**2)
        checks = [("green_dirac", res_dirac), ("green_laplace", res_lap)]
        return [
            Report(
                check=f"identities.{name}.config",
                params={"n": grid.n, "N_r": grid.N_r, "N_t": grid.N_t, "L": grid.L},
                passed=res <= bound,
                tolerance=bound,
                regions=[Region("residual_headroom", bound - res)],
                details={"residual": res},
            )
            for name, res in checks
        ]
    Ns = cfg.params.get("N_r", [16, 32, 64])
    n = cfg.params.get("n", 4)
    N_t = cfg.params.get("N_t", 6)
    csv_rows = []
    for kind in ("dirac", "laplace", "weitzenboeck"):
        residuals, hs, orders = gridcalc.convergence_study(kind, Ns, n=n, N_t=N_t, seed=cfg.seed)
        ok = all(abs(o - 2.0) <= 0.3 for o in orders)
        label = f"green_{kind}" if kind != "weitzenboeck" else "twisted_weitzenboeck"
        reports.append(
            Report(
                check=f"identities.{label}",
                params={"n": n, "N_r": Ns, "N_t": N_t},
                passed=ok,
                tolerance=0.3,
                regions=[Region("order_window", 0.3 - max(abs(o - 2.0) for o in orders))],
                details={"residuals": residuals, "orders": orders, "seed": cfg.seed},
            )
        )
        csv_rows.append((label, [(h, r, o) for h, r, o in zip(hs, residuals, orders + [float("nan")])]))
    if cfg.out:
        for label, rows in csv_rows:
            write_csv(_sibling(cfg.out, f"convergence_{label}.csv"), ["h", "residual", "order"], rows)
    return reports


def suite_hodge(cfg: SuiteConfig):
    rng = np.random.default_rng(cfg.seed)
    reports = []
    jobs = [
        ("annulus", "absolute", 1),
        ("annulus", "relative", 1),
        ("torus", "absolute", 1),
        ("solid_torus", "absolute", 1),
        ("solid_torus", "relative", 2),
    ]
    twists = cfg.params.get("twists", 10)
    path = cfg.params.get("complex")
    if path:
        try:
            with open(path) as fh:
                K = hodge.load_complex(json.load(fh))
        except (OSError, KeyError, ValueError) as exc:
            raise InputError(f"cannot load complex from {path}: {exc}") from exc
        jobs = [(K, "absolute", k) for k in range(K.dim + 1)]
    for name, cond, k in jobs:
        K = name if isinstance(name, hodge.SimplicialComplex) else hodge.load_bundled(name)
        target = hodge.betti_relative(K, k) if cond == "relative" else hodge.betti(K, k)
        ok = True
        for _ in range(twists):
            f = rng.uniform(-5.0, 5.0, K.n_simplices(0))
            T = hodge.TwistedComplex(K, f, cond)
            if hodge.harmonic_dimension(T, k) != target:
                ok = False
        label = name if isinstance(name, str) else "custom"
        reports.append(
            Report(
                check=f"hodge.{label}.{cond}.k{k}",
                params={"k": k, "condition": cond, "twists": twists},
                passed=ok,
                tolerance=0.0,
                regions=[Region("dimension_match", 0.0 if ok else -1.0)],
                details={"betti_target": target, "seed": cfg.seed},
            )
        )
    return reports


def suite_band(cfg: SuiteConfig):
    doc = cfg.params.get("band")
    if doc:
        try:
            with open(doc) as fh:
                band = bands.load_band_json(json.load(fh))
        except (OSError, KeyError, ValueError) as exc:
            raise InputError(f"cannot load band spec from {doc}: {exc}") from exc
    else:
        band = bands.WarpedBand(4, 0.0, 3.0, bands.WarpProfile("const"))
    sigma = cfg.params.get("sigma", 1.0)
    scfg = curvature.SearchConfig(seed=cfg.seed, restarts=cfg.params.get("restarts", 64))
    return [bands.sigma_pic_profile(band, sigma, cfg=scfg)]


def suite_counterexample(cfg: SuiteConfig):
    spec = bands.CounterexampleSpec(
        n=cfg.params.get("n", 4),
        k=cfg.params.get("k", 2),
        sigma=cfg.params.get("sigma", 1.0),
        L=cfg.params.get("L", 3.0),
    )
    return [bands.counterexample_report(spec, curvature.SearchConfig(seed=cfg.seed))]


SUITES = {
    "clifford": suite_clifford,
    "curvature": suite_curvature,
    "weitzenboeck": suite_weitzenboeck,
    "comparison": suite_comparison,
    "bandwidth": suite_bandwidth,
    "focal": suite_focal,
    "identities": suite_identities,
    "hodge": suite_hodge,
    "band": suite_band,
    "counterexample": suite_counterexample,
}


def run_suite(cfg: SuiteConfig) -> int:
    """Run a named suite; returns the process exit code."""
    if cfg.suite not in SUITES:
        raise InputError(f"unknown suite {cfg.suite!r}; have {sorted(SUITES)}")
    env_seed = os.environ.get("PIC_TOOLKIT_SEED")
    if env_seed is not None:
        cfg.seed = int(env_seed)
    reports = SUITES[cfg.suite](cfg)
    for rep in reports:
        print(rep.summary_line())
    if cfg.out:
        dump_reports(cfg.out, reports, seed=cfg.seed)
    return 0 if all(r.passed for r in reports) else 1


def _sibling(out_path: str, name: str) -> str:
    base = os.path.dirname(os.path.abspath(out_path))
    return os.path.join(base, name)


# -- argument parsing ------------------------------------------------------


def _add_common(sp):
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.add_argument("--out", type=str, default=None, help="write JSON report here")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pic-verify", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    vf = sub.add_parser("verify", help="run a verification suite")
    vsub = vf.add_subparsers(dest="suite", required=True)

    sp = vsub.add_parser("clifford")
    sp.add_argument("--n", type=str, default="4..8", help="dimension or range like 4..8")
    sp.add_argument("--samples", type=int, default=100)
    _add_common(sp)

    for name in ("curvature", "weitzenboeck"):
        sp = vsub.add_parser(name)
        sp.add_argument("--n", type=int, default=4)
        sp.add_argument("--sigma", type=float, default=1.0)
        sp.add_argument("--tensor", type=str, default=None, help="curvature tensor JSON file")
        _add_common(sp)

    sp = vsub.add_parser("comparison")
    sp.add_argument("--draws", type=int, default=20)
    _add_common(sp)

    sp = vsub.add_parser("bandwidth")
    for flag, default in (("--n", 4), ("--sigma", 1.0), ("--delta", 0.1), ("--Lambda", 0.2),
                          ("--rf", 8.0), ("--L", 8.0)):
        sp.add_argument(flag, type=float if "." in str(default) else int, default=default)
    _add_common(sp)

    sp = vsub.add_parser("focal")
    sp.add_argument("--n", type=int, default=4)
    sp.add_argument("--sigma", type=float, default=1.0)
    sp.add_argument("--lambda", dest="lam", type=float, default=5.0)
    sp.add_argument("--lambda-bar", dest="lam_bar", type=float, default=100.0)
    sp.add_argument("--rf", type=float, default=18.01)
    _add_common(sp)

    sp = vsub.add_parser("identities")
    sp.add_argument("--n", type=int, default=4)
    sp.add_argument("--N-t", dest="N_t", type=int, default=6)
    sp.add_argument("--N-r", dest="N_r", type=str, default="16,32,64")
    sp.add_argument("--grid", type=str, default=None, help="grid config JSON with explicit fields")
    _add_common(sp)

    sp = vsub.add_parser("hodge")
    sp.add_argument("--complex", type=str, default=None, help="complex JSON file")
    sp.add_argument("--twists", type=int, default=10)
    _add_common(sp)

    sp = vsub.add_parser("band")
    sp.add_argument("--band", type=str, default=None, help="band spec JSON file")
    sp.add_argument("--sigma", type=float, default=1.0)
    sp.add_argument("--restarts", type=int, default=64)
    _add_common(sp)

    sp = vsub.add_parser("counterexample")
    sp.add_argument("--n", type=int, default=4)
    sp.add_argument("--k", type=int, default=2)
    sp.add_argument("--sigma", type=float, default=1.0)
    sp.add_argument("--L", type=float, default=3.0)
    _add_common(sp)

    em = sub.add_parser("emit", help="emit CSV curves or a config template")
    esub = em.add_subparsers(dest="what", required=True)
    sp = esub.add_parser("csv")
    sp.add_argument("--curve", choices=("barrier", "focal"), required=True)
    sp.add_argument("--n", type=int, default=4)
    sp.add_argument("--K", type=float, default=1.0)
    sp.add_argument("--Lambda", type=float, default=1.0)
    sp.add_argument("--sigma", type=float, default=1.0)
    sp.add_argument("--lambda", dest="lam", type=float, default=5.0)
    sp.add_argument("--lambda-bar", dest="lam_bar", type=float, default=100.0)
    sp.add_argument("--rf", type=float, default=18.01)
    sp.add_argument("--rho-max", type=float, default=2.0)
    sp.add_argument("--points", type=int, default=256)
    sp.add_argument("--out", type=str, required=True)
    sp = esub.add_parser("json")
    sp.add_argument("--suite", choices=sorted(SUITES), required=True)
    sp.add_argument("--out", type=str, required=True)

    return ap


def _config_from_args(args) -> SuiteConfig:
    params = {}
    if args.suite == "clifford":
        params = {"dims": _parse_range(args.n), "samples": args.samples}
    elif args.suite in ("curvature", "weitzenboeck"):
        params = {"n": int(args.n), "sigma": args.sigma, "tensor": args.tensor}
    elif args.suite == "comparison":
        params = {"draws": args.draws}
    elif args.suite == "bandwidth":
        params = {"n": int(args.n), "sigma": args.sigma, "delta": args.delta,
                  "Lambda": args.Lambda, "rf": args.rf, "L": args.L}
    elif args.suite == "focal":
        params = {"n": args.n, "sigma": args.sigma, "lam": args.lam,
                  "lam_bar": args.lam_bar, "rf": args.rf}
    elif args.suite == "identities":
        params = {"n": args.n, "N_t": args.N_t, "N_r": [int(t) for t in args.N_r.split(",")],
                  "grid": args.grid}
    elif args.suite == "hodge":
        params = {"complex": args.complex, "twists": args.twists}
    elif args.suite == "band":
        params = {"band": args.band, "sigma": args.sigma, "restarts": args.restarts}
    elif args.suite == "counterexample":
        params = {"n": args.n, "k": args.k, "sigma": args.sigma, "L": args.L}
    return SuiteConfig(suite=args.suite, params=params, seed=args.seed, tol=args.tol, out=args.out)


def _emit(args) -> int:
    if args.what == "json":
        template = SuiteConfig(suite=args.suite)
        with open(args.out, "w") as fh:
            json.dump(
                {"suite": template.suite, "params": template.params, "seed": template.seed,
                 "tol": template.tol, "out": None},
                fh, indent=1, sort_keys=True)
            fh.write("\n")
        return 0
    if args.curve == "barrier":
        p = comparison.ComparisonParams(args.n, args.K, args.Lambda, 0.0)
        rows = comparison.barrier_curve_rows(p, np.linspace(0.0, args.rho_max, args.points))
        write_csv(args.out, ["rho", "barrier", "oracle", "margin"], rows)
        return 0
    fp = potentials.FocalParams(args.n, args.sigma, args.lam, args.lam_bar)
    rows = potentials.focal_margin_rows(fp, args.rf, points=args.points)
    write_csv(args.out, ["rho", "lhs", "rhs", "margin"], rows)
    return 0


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.command == "verify":
            return run_suite(_config_from_args(args))
        return _emit(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
