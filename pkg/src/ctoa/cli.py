"""Command-line front end: ``ctoa <task> [options]``.

Exit status is 0 when every comparison passes, 1 on a numerical mismatch or
failure, and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

TASKS = ("spectrum", "evolve", "table1", "table2", "table3", "table4", "symmetry", "commutator")
# inputs this close to pi/2 or 0 select the parity-definite operators
GAMMA_SNAP = 1e-4
SPECTRUM_TOL = 5e-4
SYMMETRY_TOL = {"position": 1e-9, "momentum": 1e-8}
COMMUTATOR_TOL = 1e-3
PROBE_MIN = 0.1


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    task: str
    mu: float = 1.0
    hbar: float = 1.0
    l: float = 1.0
    gamma: float = 0.0
    N: int = 2000
    K: int = 200
    dt: float = 1e-4
    t_end: float | None = None
    count: int = 7
    n: int = 1
    rows: int | None = None
    family: str = "all"
    method: str = "analytic"
    extrapolate: bool = True
    N_fine: int = 4000
    output: str | None = None
    format: str = "csv"
    figure: str | None = None
    figures: bool = True


def _positive(kind):
    def conv(text):
        try:
            v = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"malformed number {text!r}")
        if not (v > 0 and math.isfinite(v)):
            raise argparse.ArgumentTypeError(f"{text!r} must be positive")
        return v

    return conv


def _real(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed number {text!r}")
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"{text!r} must be finite")
    return v


def _snap_gamma(g: float) -> float:
    if abs(g) < GAMMA_SNAP:
        return 0.0 if abs(g) < 1e-12 else g
    if abs(g - math.pi / 2) < GAMMA_SNAP:
        return math.pi / 2
    return g


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ctoa",
        description="Spectra, free evolution and commutator checks for confined arrival-time operators.",
    )
    ap.add_argument("task", choices=TASKS)
    ap.add_argument("--mu", type=_positive(float), default=1.0)
    ap.add_argument("--hbar", type=_positive(float), default=1.0)
    ap.add_argument("--l", type=_positive(float), default=1.0, help="box half-length")
    ap.add_argument("--gamma", type=_real, default=None, help="boundary phase in (-pi/2, pi/2]")
    ap.add_argument("--N", type=_positive(int), default=2000, help="quadrature order")
    ap.add_argument("--modes", type=_positive(int), default=None, help="plane-wave count 2K+1")
    ap.add_argument("--dt", type=_positive(float), default=1e-4)
    ap.add_argument("--t-end", type=_positive(float), default=None)
    ap.add_argument("--count", type=_positive(int), default=7)
    ap.add_argument("--n", type=_positive(int), default=1, help="eigenfunction rank to evolve")
    ap.add_argument("--rows", type=_positive(int), default=None, help="first rows of a table")
    ap.add_argument("--family", choices=("all", "even", "odd"), default="all")
    ap.add_argument("--method", choices=("analytic", "numeric", "both"), default="analytic")
    ap.add_argument("--no-extrapolate", action="store_true")
    ap.add_argument("--N-fine", type=_positive(int), default=4000)
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    ap.add_argument("-o", "--output", default=None, help="output file (default stdout)")
    ap.add_argument("--figure", default=None, help="figure path (default: next to --output)")
    ap.add_argument("--no-figures", action="store_true")
    return ap


def parse_args(argv=None) -> RunConfig:
    ap = _parser()
    a = ap.parse_args(argv)
    try:
        modes = a.modes if a.modes is not None else 401
        if modes % 2 != 1:
            raise UsageError("--modes must be odd (2K+1)")
        if a.gamma is None:
            gamma = math.pi / 8 if a.task == "commutator" else 0.0
        else:
            gamma = _snap_gamma(a.gamma)
        if not (-math.pi / 2 < gamma <= math.pi / 2):
            raise UsageError(f"--gamma {a.gamma} outside (-pi/2, pi/2]")
        if a.task == "commutator" and a.N_fine < 2000:
            raise UsageError("--N-fine must be >= 2000")
        if a.family != "all" and gamma not in (0.0, math.pi / 2):
            raise UsageError("--family needs gamma = 0 or pi/2")
    except UsageError as exc:
        ap.error(str(exc))
    return RunConfig(
        task=a.task,
        mu=a.mu,
        hbar=a.hbar,
        l=a.l,
        gamma=gamma,
        N=a.N,
        K=(modes - 1) // 2,
        dt=a.dt,
        t_end=a.t_end,
        count=a.count,
        n=a.n,
        rows=a.rows,
        family=a.family,
        method=a.method,
        extrapolate=not a.no_extrapolate,
        N_fine=a.N_fine,
        output=a.output,
        format=a.format,
        figure=a.figure,
        figures=not a.no_figures,
    )


def _num(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    return x


def _csv_cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "pass" if x else "fail"
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def _render(cfg: RunConfig, columns, rows, residuals) -> str:
    if cfg.format == "json":
        doc = {
            "config": asdict(cfg),
            "results": [{c: _num(r.get(c)) for c in columns} for r in rows],
            "residuals": {k: _num(v) for k, v in residuals.items()},
        }
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_csv_cell(_num(r.get(c))) for c in columns])
    return buf.getvalue()


def _params(cfg: RunConfig):
    from .kernel import PhysicalParams

    return PhysicalParams(cfg.mu, cfg.hbar, cfg.l, cfg.gamma)


def _family_cases(cfg: RunConfig):
    from .analytic import cases_for

    cases = cases_for(_params(cfg))
    if cfg.family == "all":
        return None
    return [c for c in cases if c.endswith(cfg.family)][0]


def _task_spectrum(cfg: RunConfig):
    from .analytic import analytic_spectrum, eigenvalues
    from .nystrom import numeric_spectrum

    p = _params(cfg)
    rows = []
    case = _family_cases(cfg)
    if case is not None:
        for n, r, tp, tm in eigenvalues(p, case, cfg.count):
            for sign, t in ((1, tp), (-1, tm)):
                rows.append({"n": n, "sign": sign, "case": case, "root": r, "analytic": t})
    else:
        ana = analytic_spectrum(p, cfg.count)
        for e in ana.entries:
            rows.append({"n": e.n, "sign": e.sign, "case": e.case, "root": e.root, "analytic": e.tau})
    if cfg.method != "analytic":
        if case is not None:
            raise UsageError("numeric spectra are merged over families; drop --family")
        num = numeric_spectrum(p, cfg.N, cfg.count, extrapolate=cfg.extrapolate)
        lookup = {(e.n, e.sign): e.tau for e in num.entries}
        for r in rows:
            r["numeric"] = lookup.get((r["n"], r["sign"]))
    if cfg.method == "numeric":
        for r in rows:
            r.pop("analytic", None)
            r.pop("root", None)
    cols = ["n", "sign", "case", "root", "analytic"]
    if cfg.method == "numeric":
        cols = ["n", "sign", "numeric"]
    elif cfg.method == "both":
        cols += ["numeric", "difference", "pass"]
        for r in rows:
            r["difference"] = abs(r["numeric"] - r["analytic"])
            r["pass"] = r["difference"] <= SPECTRUM_TOL
    residuals = {}
    if cfg.method == "both":
        residuals["max_difference"] = max(r["difference"] for r in rows)
    ok = all(r.get("pass", True) for r in rows)

    def fig(path):
        from .plotting import plot_spectrum

        plot_spectrum(rows, path, title=f"gamma = {cfg.gamma:.6g}")

    return cols, rows, residuals, ok, fig


def _task_evolve(cfg: RunConfig):
    from .analytic import AnalyticEigenfunction, analytic_spectrum, eigenfunction, normalize
    from .evolution import trace
    from .quadrature import gauss_legendre, rescale

    p = _params(cfg)
    case = _family_cases(cfg)
    if case is not None:
        ef = eigenfunction(p, case, cfg.n)
    else:
        e = analytic_spectrum(p, cfg.n).select(1)[cfg.n - 1]
        from .analytic import family_roots

        fam = int(np.argmin(np.abs(family_roots(e.case, cfg.n, p) - e.root))) + 1
        ef = AnalyticEigenfunction(p, e.case, fam, 1, e.root)
    f = normalize(ef, rescale(gauss_legendre(cfg.N), p.l))
    t_end = cfg.t_end if cfg.t_end is not None else 2.0 * ef.tau
    tr = trace(p, f, cfg.K, t_end, cfg.dt, ef.tau)
    rows = [
        {"t": float(t), "mean_q": float(m), "var_q": float(v)}
        for t, m, v in zip(tr.times, tr.mean, tr.variance)
    ]
    t_min, v_min = tr.minimum()
    residuals = {"eigenvalue": ef.tau, "case": ef.case, "t_min": t_min, "min_variance": v_min}
    if tr.times[-1] >= ef.tau:
        m_tau, v_tau = tr.at(ef.tau)
        residuals.update({"mean_at_tau": m_tau, "variance_at_tau": v_tau})
    residuals["captured_norm"] = tr.captured_norm

    def fig(path):
        from .plotting import plot_traces

        plot_traces([(f"n={cfg.n}", tr)], path, title=f"gamma = {cfg.gamma:.6g}")

    return ["t", "mean_q", "var_q"], rows, residuals, True, fig


def _task_dynamics_table(cfg: RunConfig):
    from .tables import SETUPS, reproduce_dynamics

    setup = SETUPS[cfg.task]
    rows_n = setup.default_rows
    if cfg.rows is not None:
        rows_n = rows_n[: cfg.rows]
    rows = reproduce_dynamics(cfg.task, rows_n, N=cfg.N)
    for r in rows:
        for k, v in r["checks"].items():
            r[f"{k}_ok"] = v
    cols = [
        "n",
        "eigenvalue",
        "ref_eigenvalue",
        "t_min",
        "min_variance",
        "ref_min_variance",
        "variance_at_tau",
        "ref_variance_at_tau",
        "mean_at_tau",
        "ref_mean_at_tau",
        "captured_norm",
        "dt",
        "pass",
    ]
    residuals = {"rows_failed": sum(not r["pass"] for r in rows)}
    ok = all(r["pass"] for r in rows)

    def fig(path):
        from .plotting import plot_traces

        plot_traces([(f"n={r['n']}", r["trace"]) for r in rows], path, title=cfg.task)

    return cols, rows, residuals, ok, fig


def _task_table4(cfg: RunConfig):
    from .tables import reproduce_table4

    rows = reproduce_table4(N=cfg.N, count=min(cfg.count, 7), extrapolate=cfg.extrapolate)
    cols = ["column", "gamma", "n", "analytic", "numeric", "ref_exact", "ref_numeric", "pass"]
    residuals = {
        "max_pairing": max(r["pairing"] for r in rows),
        "rows_failed": sum(not r["pass"] for r in rows),
    }

    def fig(path):
        from .plotting import plot_table4

        plot_table4(rows, path)

    return cols, rows, residuals, all(r["pass"] for r in rows), fig


def _task_symmetry(cfg: RunConfig):
    from .analytic import symmetry_report

    rep = symmetry_report(_params(cfg), cfg.count)
    rows = []
    for name, val in rep.items():
        tol = SYMMETRY_TOL["momentum" if name.endswith("_k") else "position"]
        rows.append({"name": name, "residual": val, "tolerance": tol, "pass": val < tol})

    def fig(path):
        from .plotting import plot_residuals

        plot_residuals(rows, path)

    return ["name", "residual", "tolerance", "pass"], rows, {}, all(r["pass"] for r in rows), fig


def _task_commutator(cfg: RunConfig):
    from .algebra import commutator_residual, make_canonical_vector, probe_vector
    from .kernel import PhysicalParams

    p = _params(cfg)
    periodic = p.gamma == 0.0
    v = make_canonical_vector(p, [0.0, 1.0] if periodic else [1.0], periodic=periodic)
    label = "canonical_h=q" if periodic else "canonical_h=1"
    rows = []
    prev = None
    for N in (cfg.N_fine, 2 * cfg.N_fine):
        res = commutator_residual(p, v, N)
        ok = res < COMMUTATOR_TOL and (prev is None or res < prev)
        rows.append({"name": label, "gamma": p.gamma, "N_fine": N, "residual": res, "pass": ok})
        prev = res
    # the zero-integral condition is only visible in the interior for the periodic operator
    pp = PhysicalParams(p.mu, p.hbar, p.l, 0.0)
    l2 = p.l * p.l
    probe = probe_vector(pp, [l2**3, 0.0, -3 * l2**2, 0.0, 3 * l2, 0.0, -1.0])
    res = commutator_residual(pp, probe, cfg.N_fine)
    rows.append(
        {"name": "probe_nonzero_integral", "gamma": 0.0, "N_fine": cfg.N_fine, "residual": res,
         "pass": res > PROBE_MIN}
    )

    def fig(path):
        from .plotting import plot_residuals

        for r in rows:
            r["label"] = f"{r['name']} N={r['N_fine']}"
        plot_residuals(rows, path, label="label")

    return ["name", "gamma", "N_fine", "residual", "pass"], rows, {}, all(r["pass"] for r in rows), fig


_TASKS = {
    "spectrum": _task_spectrum,
    "evolve": _task_evolve,
    "table1": _task_dynamics_table,
    "table2": _task_dynamics_table,
    "table3": _task_dynamics_table,
    "table4": _task_table4,
    "symmetry": _task_symmetry,
    "commutator": _task_commutator,
}


def run(cfg: RunConfig, stdout=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    try:
        cols, rows, residuals, ok, fig = _TASKS[cfg.task](cfg)
    except UsageError as exc:
        print(f"ctoa: error: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, RuntimeError, ValueError) as exc:
        print(f"ctoa: {cfg.task} failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    text = _render(cfg, cols, rows, residuals)
    if cfg.output:
        out = Path(cfg.output)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
    else:
        stdout.write(text)
    fig_path = cfg.figure
    if fig_path is None and cfg.output and cfg.figures:
        fig_path = str(Path(cfg.output).with_suffix(".png"))
    if fig_path and cfg.figures:
        fig(fig_path)
    if not ok:
        failed = sum(1 for r in rows if r.get("pass") is False)
        print(f"ctoa: {cfg.task}: {failed} comparison(s) outside tolerance", file=sys.stderr)
    return 0 if ok else 1


def main(argv=None) -> int:
    cfg = parse_args(argv)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
