"""``qdsfluct`` command line front end.

Exit codes: 0 success, 2 invalid input or failed hypothesis, 3 numerical
failure, 4 I/O problem.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import corpus, fcs, io, lindblad, response
from . import liouville as lv
from .config import DEFAULT, Tolerances
from .davies import spohn_condition
from .errors import InputOutputError, QdsError, ValidationError
from .ratefunc import ScanBoxError, cgf_scan, legendre
from .symmetry import (
    box_grid,
    energetic_es_residual,
    energetic_translation_residual,
    es_symmetry_residual,
    translation_symmetry_residual,
)

COMMANDS = ("validate", "cgf-scan", "rate-function", "symmetry-check", "steady-state", "fluxes",
            "linear-response", "unravel", "compare")
REQUIRED = ("detailed_balance", "kms", "ergodicity")


# --- argument handling ---------------------------------------------------------------


def parse_box(text: str):
    box = []
    for part in text.split(","):
        try:
            a, b = (float(x) for x in part.split(":"))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad interval {part!r}; expected a:b") from None
        if not a < b:
            raise argparse.ArgumentTypeError(f"empty interval {part!r}")
        box.append((a, b))
    return box


def parse_tol(items) -> Tolerances:
    changes = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep:
            raise ValidationError(f"expected name=value, got {item!r}", "--tol")
        try:
            changes[name.strip()] = float(value)
        except ValueError:
            raise ValidationError(f"not a number: {value!r}", f"--tol {name}") from None
    try:
        return DEFAULT.replace(**changes)
    except KeyError as exc:
        raise ValidationError(str(exc.args[0]), "--tol") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qdsfluct", description="Entropic full counting statistics "
                                "of weak-coupling quantum dynamical semigroups.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--model", required=True,
                   help="model JSON file, or corpus:NAME for a bundled model")
    p.add_argument("--alpha-box", type=parse_box, default=None, help="a:b[,a:b...] one interval per reservoir")
    p.add_argument("--resolution", type=int, default=None, help="grid points per axis (>= 2)")
    p.add_argument("--t", type=float, default=None, help="time horizon for unraveling")
    p.add_argument("--samples", type=int, default=None, help="number of trajectories")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE")
    p.add_argument("--force", action="store_true",
                   help="run despite failed hypotheses and overwrite existing outputs")
    return p


def model_path(arg: str):
    if arg.startswith("corpus:"):
        try:
            return corpus.path(arg.split(":", 1)[1])
        except KeyError as exc:
            raise InputOutputError(str(exc.args[0])) from None
    return Path(arg)


# --- validation ------------------------------------------------------------------


def validation_report(model, tol: Tolerances) -> list:
    rows = []
    for j, sub in enumerate(model.subs):
        rep = lindblad.detailed_balance_check(sub.rho_ref, sub.lind, tol)
        rows.append({"hypothesis": "detailed_balance", "reservoir": j, "passed": rep.passed,
                     "residual": rep.residual})
        cp = lindblad.choi_is_cp(sub.lind.phi.superop, tol)
        rows.append({"hypothesis": "complete_positivity", "reservoir": j, "passed": cp.passed,
                     "residual": cp.residual})
    rows.append({"hypothesis": "kms", "reservoir": None, "passed": bool(model.flags["kms"]), "residual": 0.0})
    er = lindblad.positivity_improving_check(model.total, tol=tol)
    rows.append({"hypothesis": "ergodicity", "reservoir": None, "passed": er.passed, "residual": er.residual})
    sp = spohn_condition([Q for r in model.reservoirs for Q in r.couplings], model.H_S, tol)
    rows.append({"hypothesis": "spohn_condition", "reservoir": None, "passed": sp.passed,
                 "residual": sp.residual})
    rows.append({"hypothesis": "time_reversal", "reservoir": None, "passed": bool(model.flags["tri"]),
                 "residual": 0.0})
    for r in rows:
        r["required"] = r["hypothesis"] in REQUIRED or r["hypothesis"] == "complete_positivity"
    return rows


def _hypotheses_ok(rows) -> bool:
    return all(bool(r["passed"]) for r in rows if r["required"])


# --- commands ---------------------------------------------------------------------


class Run:
    def __init__(self, args, model, tol):
        self.args = args
        self.model = model
        self.tol = tol
        self.out = Path(args.out) if args.out else Path(f"qdsfluct-{args.command}")
        self.files = []

    def box(self, default):
        box = self.args.alpha_box or [default] * self.model.M
        if len(box) != self.model.M:
            raise ValidationError(f"{len(box)} intervals given for {self.model.M} reservoirs", "--alpha-box")
        return box

    def resolution(self, default):
        r = self.args.resolution or default
        if r < 2:
            raise ValidationError("resolution must be at least 2", "--resolution")
        return r

    def prepare(self):
        io.ensure_dir(self.out)

    def target(self, name) -> Path:
        p = self.out / name
        if p.exists() and not self.args.force:
            raise InputOutputError(f"{p} exists; pass --force to overwrite")
        self.files.append(p)
        return p

    def csv(self, name, header, rows):
        return io.write_csv(self.target(name), header, rows)

    def json(self, name, obj):
        return io.write_json(self.target(name), obj)

    def finish(self, config):
        if (self.out / "manifest.json").exists() and not self.args.force:
            raise InputOutputError(f"{self.out / 'manifest.json'} exists; pass --force to overwrite")
        io.write_manifest(self.out, config, self.files, self.tol)


def _alpha_cols(M):
    return [f"alpha_{j + 1}" for j in range(M)]


def cmd_validate(run: Run, rows) -> int:
    run.json("validation.json", {"hypotheses": rows, "flags": dict(run.model.flags)})
    for r in rows:
        mark = "ok  " if r["passed"] else ("FAIL" if r["required"] else "no  ")
        where = "" if r["reservoir"] is None else f"[{r['reservoir']}]"
        print(f"{mark} {r['hypothesis']}{where} residual={io.fmt(float(r['residual']))}")
    return 0 if _hypotheses_ok(rows) else 2


def cmd_cgf_scan(run: Run) -> int:
    m = run.model
    scan = cgf_scan(m, run.box((-1.0, 2.0)), run.resolution(21), tol=run.tol)
    rows = [list(a) + [e, g] for a, e, g in zip(scan.grid, scan.values, scan.gaps)]
    run.csv("cgf_scan.csv", _alpha_cols(m.M) + ["e", "gap"], rows)
    run.csv("cgf_plot.csv", _alpha_cols(m.M) + ["e"], [r[:-1] for r in rows])
    run.json("cgf_derivatives.json", {"gradient0": scan.gradient0, "hessian0": scan.hessian0,
                                      "mean_entropy_rates": scan.mean_rates})
    return 0


def _rate_direction(scan):
    m = scan.model
    sbar = scan.mean_rates
    if np.linalg.norm(sbar) > 1e-12:
        return sbar
    if m.M == 1:
        return np.ones(1) * math.sqrt(max(scan.hessian0[0, 0], 1e-12))
    u = 1.0 / m.betas
    v = np.eye(m.M)[0] - u[0] * u / (u @ u)
    v /= np.linalg.norm(v)
    return v * math.sqrt(max(float(v @ scan.hessian0 @ v), 1e-12))


def cmd_rate_function(run: Run) -> int:
    m = run.model
    scan = cgf_scan(m, run.box((-1.0, 2.0)), run.resolution(21), tol=run.tol)
    v = _rate_direction(scan)
    rows, notes = [], []
    for s in np.linspace(-2.0, 2.0, run.resolution(21)):
        point = s * v
        try:
            res = legendre(scan, point, run.tol)
            value = res.value
            if math.isinf(value):
                notes.append({"sigma": point, "diagnostics": res.diagnostics})
        except ScanBoxError as exc:
            value = math.nan
            notes.append({"sigma": point, "error": str(exc)})
        rows.append(list(point) + [value])
    run.csv("rate_function.csv", [f"sigma_{j + 1}" for j in range(m.M)] + ["I"], rows)
    run.json("rate_function.json", {"mean_entropy_rates": scan.mean_rates, "direction": v,
                                    "notes": notes})
    return 0


def cmd_symmetry(run: Run) -> int:
    m = run.model
    grid = box_grid(run.box((-1.0, 2.0)), run.resolution(21))
    reps = [es_symmetry_residual(m, grid, run.tol)]
    if m.flags.get("kms"):
        reps.append(translation_symmetry_residual(m, grid, tol=run.tol))
        reps.append(energetic_translation_residual(m, grid, tol=run.tol))
        reps.append(energetic_es_residual(m, grid, tol=run.tol))
    rows = [r.row() for r in reps]
    run.csv("symmetry_residuals.csv", ["check", "residual", "threshold", "status"],
            [[r["check"], r["residual"], r["threshold"], r["status"]] for r in rows])
    for r in rows:
        print(f"{r['status']:<11} {r['check']} residual={io.fmt(r['residual'])}")
    return 3 if any(r.passed is False for r in reps) else 0


def cmd_steady_state(run: Run) -> int:
    m = run.model
    rho = fcs.steady_state(m, run.tol)
    resid = float(np.max(np.abs(lv.apply(lv.adjoint(m.total.generator), rho))))
    run.json("steady_state.json", {"rho_plus": io.matrix_to_json(rho), "residual": resid,
                                   "entropy_production": fcs.entropy_production(m, rho, run.tol)})
    return 0


def cmd_fluxes(run: Run) -> int:
    m = run.model
    fl = fcs.fluxes(m, tol=run.tol)
    I, F = fl.mean("I"), fl.mean("F")
    rows = [[j + 1, m.betas[j], I[j], F[j], -I[j]] for j in range(m.M)]
    run.csv("fluxes.csv", ["reservoir", "beta", "entropy_flux", "energy_flux", "mean_entropy_rate"], rows)
    run.json("fluxes.json", {"energy_flux_sum": float(F.sum()),
                             "entropy_production": fcs.entropy_production(m, fl.rho_plus, run.tol),
                             "minus_entropy_flux_sum": float(-I.sum())})
    return 0


def cmd_linear_response(run: Run) -> int:
    m = run.model
    mats = {meth: response.transport(m, meth, tol=run.tol) for meth in response.METHODS}
    D = fcs.hessian_fd(lambda a: fcs.energetic_cgf(m, a, run.tol), m.M)
    rows = [[meth, j + 1, k + 1, T.L[j, k]] for meth, T in mats.items()
            for j in range(m.M) for k in range(m.M)]
    run.csv("transport.csv", ["method", "j", "k", "L"], rows)
    ref = mats["green_kubo"].L
    run.json("transport_checks.json", {
        "onsager": {k: T.onsager_residual for k, T in mats.items()},
        "column_sums": {k: T.conservation_residual for k, T in mats.items()},
        "agreement_with_green_kubo": {k: float(np.max(np.abs(T.L - ref))) for k, T in mats.items()},
        "fdt": float(np.max(np.abs(D - 2 * ref))),
        "clt_covariance": D})
    return 0


def _ensemble(run: Run, rho):
    t = run.args.t if run.args.t is not None else 5.0
    N = run.args.samples if run.args.samples is not None else 10_000
    if not t > 0:
        raise ValidationError("t must be positive", "--t")
    if N < 1:
        raise ValidationError("samples must be at least 1", "--samples")
    from .unravel import sample_ensemble

    return sample_ensemble(run.model, rho, t, N, run.args.seed)


def cmd_unravel(run: Run) -> int:
    m = run.model
    st = _ensemble(run, fcs.steady_state(m, run.tol))
    run.csv("samples.csv", ["trajectory"] + [f"sigma_{j + 1}" for j in range(m.M)] + ["events"],
            [[i] + list(x) + [c] for i, (x, c) in enumerate(zip(st.samples, st.counts))])
    est, se, (lo, hi) = st.mean_with_error()
    run.json("summary.json", {"t": st.t, "samples": st.N, "seed": st.seed, "mean": est, "se": se,
                              "ci95": [lo, hi], "exact_mean": -fcs.cgf_gradient0(m, tol=run.tol).value})
    return 0


def cmd_compare(run: Run) -> int:
    m = run.model
    rho = np.eye(m.dim) / m.dim
    st = _ensemble(run, rho)
    grid = box_grid(run.box((-0.2, 0.2)), run.resolution(3))
    rows, ok = [], True
    for a in grid:
        L = fcs.deform(m, a, check=False).matrix
        exact = float(np.real(np.trace(rho @ lv.semigroup_apply(L, st.t, np.eye(m.dim)))))
        est, se, (lo, hi) = st.laplace(a)
        gap = abs(float(est) - exact)
        z = gap / float(se) if se > 0 else (0.0 if gap <= 1e-12 * max(1.0, abs(exact)) else math.inf)
        passed = z <= 3.0
        ok &= passed
        rows.append(list(a) + [exact, float(est), float(se), float(lo), float(hi), z, passed])
    run.csv("compare.csv", _alpha_cols(m.M) + ["exact", "estimate", "se", "ci_lo", "ci_hi", "z", "pass"], rows)
    for r in rows:
        print(("pass " if r[-1] else "FAIL ") + " ".join(io.fmt(x) for x in r[:m.M])
              + f" z={r[-2]:.2f}")
    return 0 if ok else 3


DISPATCH = {"cgf-scan": cmd_cgf_scan, "rate-function": cmd_rate_function, "symmetry-check": cmd_symmetry,
            "steady-state": cmd_steady_state, "fluxes": cmd_fluxes, "linear-response": cmd_linear_response,
            "unravel": cmd_unravel, "compare": cmd_compare}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        tol = parse_tol(args.tol)
        model = io.load_model(model_path(args.model), tol)
        run = Run(args, model, tol)
        rows = validation_report(model, tol)
        config = {"command": args.command, "model_sha256": io.file_digest(model_path(args.model)),
                  "alpha_box": args.alpha_box, "resolution": args.resolution, "t": args.t,
                  "samples": args.samples, "seed": args.seed, "tolerances": tol.as_dict()}
        run.prepare()
        if args.command == "validate":
            code = cmd_validate(run, rows)
        else:
            if not _hypotheses_ok(rows) and not args.force:
                failed = [r["hypothesis"] for r in rows if r["required"] and not r["passed"]]
                print(f"qdsfluct: model fails required hypotheses: {failed} (use --force)", file=sys.stderr)
                return 2
            code = DISPATCH[args.command](run)
        run.finish(config)
        return code
    except QdsError as exc:
        print(f"qdsfluct: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"qdsfluct: I/O error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
