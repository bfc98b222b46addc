"""Command-line entry point: derive -> transform -> scale -> normalform -> certify -> simulate -> report."""
from __future__ import annotations

import argparse
import difflib
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import reference as ref
from .chetayev import (
    check_chetayev_conditions,
    chetayev_function,
    hamiltonian_vector_field,
    instability_cone,
)
from .exactalg import Jet
from .lie import normal_form
from .model import NORMALIZED, PendulumParams, build_hamiltonian
from .poisson import PoissonSeries, from_sokolskii, to_sokolskii
from .scaling import GradedSeries, blowup
from .sim import SimConfig, export_csv, integrate, load_weak_instability_config, write_gnuplot
from .symplin import (
    STANDARDIZING_P,
    Matrix4,
    hamiltonian_matrix,
    spectrum,
    transform_jet,
)

__all__ = ["PipelineConfig", "PipelineResult", "run_pipeline", "build_report", "render_reference_artifacts", "main"]

SCHEMA_VERSION = 1
GOLDEN_ENV = "SOKOLSKII_GOLDEN_DIR"
GOLDEN_FILES = (
    "H4.txt",
    "scaled.txt",
    "sokolskii.txt",
    "normalform.txt",
    "normalform_derived.txt",
    "generators.txt",
    "eom_z.txt",
)
EXIT_OK, EXIT_MISMATCH, EXIT_IO = 0, 1, 3

_SPECTRUM_CASES = (
    ("pendant normalized", NORMALIZED, "pendant"),
    ("upright m=1 l=1 g=1", PendulumParams(1, 1, 1), "upright"),
    ("upright m=2 l=1/2 g=981/100", PendulumParams(2, Fraction(1, 2), Fraction(981, 100)), "upright"),
)


def golden_dir() -> Path:
    env = os.environ.get(GOLDEN_ENV)
    return Path(env) if env else Path(__file__).with_name("golden")


@dataclass
class PipelineConfig:
    max_degree: int = 4
    eps_order: int = 2
    simulate: SimConfig | None = None
    output_dir: Path = Path("sokolskii-out")
    format: str = "text"

    def __post_init__(self):
        self.output_dir = Path(self.output_dir)
        if self.format not in ("text", "json"):
            raise ValueError("format must be 'text' or 'json'")
        if isinstance(self.simulate, dict):
            self.simulate = SimConfig.from_dict(self.simulate)

    @property
    def golden_mode(self) -> bool:
        """Golden comparisons only make sense at the reference truncation."""
        return self.max_degree == 4 and self.eps_order == 2

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        known = {k: v for k, v in data.items() if k in cls.__dataclass_fields__}
        return cls(**known)


@dataclass
class PipelineResult:
    exit_code: int
    messages: list = field(default_factory=list)
    artifacts: dict = field(default_factory=dict)


# -- rendering ---------------------------------------------------------------

def _graded_text(g: GradedSeries) -> str:
    return f"# eps_truncation: {g.eps_truncation}\n" + g.to_text()


def _generators_text(gens: Sequence) -> str:
    return "".join(f"# W_{i}\n{w.to_text()}" for i, w in enumerate(gens, start=1))


def _eom_text(components: Sequence[GradedSeries]) -> str:
    names = ("z1", "z2", "z3", "z4")
    return "".join(f"# {n}'\n{_graded_text(c)}" for n, c in zip(names, components))


def render_reference_artifacts() -> dict:
    """Golden text artifacts built only from the hand-entered reference values."""
    hz = ref.quadratic_z() + ref.quartic_z()
    derived_nf = ref.normal_form_hamiltonian()
    derived_nf = GradedSeries(
        {k: (v.scale(Fraction(1, 2)) if k == 1 else v) for k, v in derived_nf.items()}, 2
    )
    sok = ref.sokolskii_hamiltonian()
    sok = GradedSeries({k: (v.scale(Fraction(1, 2)) if k == 1 else v) for k, v in sok.items()}, 2)
    return {
        "H4.txt": hz.to_text(header=True),
        "scaled.txt": _graded_text(ref.scaled_z()),
        "sokolskii.txt": _graded_text(sok),
        "normalform.txt": _graded_text(ref.normal_form_hamiltonian()),
        "normalform_derived.txt": _graded_text(derived_nf),
        "generators.txt": _generators_text([PoissonSeries(), ref.generator_w2()]),
        "eom_z.txt": _eom_text(ref.instability_field()),
    }


# -- stages ------------------------------------------------------------------

def derive(max_degree: int = 4, params: PendulumParams = NORMALIZED, equilibrium: str = "pendant") -> Jet:
    return build_hamiltonian(params, max_degree, equilibrium)


def transform(h: Jet, p: Matrix4 = STANDARDIZING_P) -> Jet:
    return transform_jet(h, p)


def _reference_convention(sok: GradedSeries) -> GradedSeries:
    # the reference normal form carries -eps (R^2 + Theta^2/r^2), twice the
    # eps^1 part the blow-up produces; both versions are normalized
    return GradedSeries({k: (v.scale(2) if k == 1 else v) for k, v in sok.items()}, sok.eps_truncation, sok.metadata)


def spectrum_table() -> list:
    rows = []
    for label, params, eq in _SPECTRUM_CASES:
        h = build_hamiltonian(params, 2, eq)
        rep = spectrum(hamiltonian_matrix(h.homogeneous_part(2)))
        if params.normalized:
            expected = ref.table1_eigenvalues(eq)
        else:
            expected = ref.table1_eigenvalues(eq, float(params.g / params.l))
        got = sorted(rep.eigenvalues, key=lambda z: (round(z.imag, 9), round(z.real, 9)))
        exp = sorted((complex(x) for x in expected), key=lambda z: (round(z.imag, 9), round(z.real, 9)))
        err = max(abs(a - b) for a, b in zip(got, exp))
        rows.append(
            {
                "case": label,
                "equilibrium": eq,
                "eigenvalues": [[z.real, z.imag] for z in rep.eigenvalues],
                "classification": rep.classification,
                "max_error": err,
                "ok": err <= 1e-10,
            }
        )
    return rows


def _compare(name: str, text: str, gdir: Path, stage: str) -> list:
    gpath = gdir / name
    if not gpath.exists():
        return [f"[{stage}] golden file missing: {gpath}"]
    want = gpath.read_text()
    if want == text:
        return []
    diff = difflib.unified_diff(
        want.splitlines(keepends=True), text.splitlines(keepends=True), f"golden/{name}", name
    )
    return [f"[{stage}] {name} differs from golden\n" + "".join(diff)]


_STAGE_OF = {
    "H4.txt": "transform",
    "scaled.txt": "scale",
    "sokolskii.txt": "scale",
    "normalform.txt": "normalform",
    "normalform_derived.txt": "normalform",
    "generators.txt": "normalform",
    "eom_z.txt": "certify",
}


def run_pipeline(config: PipelineConfig, update_golden: bool = False) -> PipelineResult:
    """Run every stage, write artifacts and compare with the golden files."""
    out = config.output_dir
    res = PipelineResult(EXIT_OK)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        res.exit_code = EXIT_IO
        res.messages.append(f"[io] cannot create output directory {out}: {exc}")
        return res
    if not config.golden_mode:
        res.messages.append(
            f"[config] max_degree={config.max_degree} eps_order={config.eps_order}: "
            + ("beyond reference order, " if config.eps_order > 2 else "")
            + "golden comparison skipped"
        )

    h = derive(config.max_degree)
    hz = transform(h)
    scaled = blowup(hz, eps_truncation=config.eps_order)
    sok = to_sokolskii(scaled)
    nf_main = normal_form(_reference_convention(sok))
    nf_derived = normal_form(sok)
    deg = max(config.max_degree, 4)
    fld = hamiltonian_vector_field(from_sokolskii(nf_main.normal_hamiltonian, deg))
    report = check_chetayev_conditions(chetayev_function(deg), instability_cone(deg), fld)

    texts = {
        "H4.txt": hz.to_text(header=True),
        "scaled.txt": _graded_text(scaled),
        "sokolskii.txt": _graded_text(sok),
        "normalform.txt": _graded_text(nf_main.normal_hamiltonian),
        "normalform_derived.txt": _graded_text(nf_derived.normal_hamiltonian),
        "generators.txt": _generators_text(nf_main.generators),
        "eom_z.txt": _eom_text(fld.components),
        "chetayev.json": report.dumps() + "\n",
    }
    spec_rows = spectrum_table()
    texts["spectrum.json"] = json.dumps({"schema_version": SCHEMA_VERSION, "cases": spec_rows}, indent=2) + "\n"

    try:
        for name, text in texts.items():
            (out / name).write_text(text, encoding="utf-8")
        if config.simulate is not None:
            traj = integrate(config.simulate, fld)
            export_csv(traj, out / "trajectory.csv")
            write_gnuplot(out / "trajectory.csv", out / "trajectory.gp")
            summary = {
                "config": config.simulate.to_dict(),
                "samples": len(traj),
                "growth_z12": traj.growth_factor("z12"),
                "growth_z34": traj.growth_factor("z34"),
                "h_drift": traj.h_drift(),
                "first_omega_time": traj.first_omega_time(),
            }
            (out / "simulation.json").write_text(json.dumps(summary, indent=2) + "\n")
            res.artifacts["simulation"] = summary
    except OSError as exc:
        res.exit_code = EXIT_IO
        res.messages.append(f"[io] cannot write artifacts to {out}: {exc}")
        return res

    res.artifacts.update(texts)
    if 2 not in nf_main.normal_hamiltonian.parts:
        res.messages.append(
            "[certify] normal form stops at eps^1: no alpha term, so the certificate rests on "
            "2 eps (z1^2 + z2^2) alone and says nothing about the sign of alpha"
        )
    failures = []
    if not report.passed:
        bad = ", ".join(c.name for c in report.conditions if not c.passed)
        failures.append(f"[certify] Chetayev conditions not certified: {bad}")
    for row in spec_rows:
        if not row["ok"]:
            failures.append(f"[spectrum] {row['case']}: eigenvalue error {row['max_error']:.3g}")

    if config.golden_mode:
        gdir = golden_dir()
        if update_golden:
            gdir.mkdir(parents=True, exist_ok=True)
            for name in GOLDEN_FILES:
                (gdir / name).write_text(texts[name], encoding="utf-8")
            res.messages.append(f"[golden] updated {len(GOLDEN_FILES)} files in {gdir}")
        else:
            for name in GOLDEN_FILES:
                failures += _compare(name, texts[name], gdir, _STAGE_OF[name])

    res.messages += failures
    if failures:
        res.exit_code = EXIT_MISMATCH
    else:
        res.messages.append(f"[pipeline] all stages passed; artifacts in {out}")
    return res


# -- report ------------------------------------------------------------------

def _read_json(path: Path):
    try:
        return json.loads(path.read_text())
    except (OSError, ValueError):
        return None


def build_report(output_dir) -> dict:
    """Summary of whatever artifacts exist in ``output_dir``; gaps are listed."""
    d = Path(output_dir)
    missing = []
    spectra = _read_json(d / "spectrum.json")
    if spectra is None:
        missing.append("spectrum.json")
    nf_coeffs = None
    alpha = None
    try:
        nf = GradedSeries.from_text((d / "normalform.txt").read_text(), PoissonSeries.from_text)
        nf_coeffs = {f"eps^{k}": str(v) for k, v in nf.items()}
        if 2 in nf.parts:
            alpha = str(nf.parts[2].coeff(0, 1, 2, 0))
    except OSError:
        missing.append("normalform.txt")
    chet = _read_json(d / "chetayev.json")
    if chet is None:
        missing.append("chetayev.json")
    sim = _read_json(d / "simulation.json")
    return {
        "schema_version": SCHEMA_VERSION,
        "eigenvalues": None
        if spectra is None
        else [
            {"case": c["case"], "eigenvalues": c["eigenvalues"], "classification": c["classification"]}
            for c in spectra["cases"]
        ],
        "normal_form": nf_coeffs,
        "theta_r2_coefficient": alpha,
        "chetayev": None if chet is None else ("PASS" if chet.get("passed") else "FAIL"),
        "simulation": "not run"
        if sim is None
        else {k: sim[k] for k in ("growth_z12", "growth_z34", "h_drift", "first_omega_time")},
        "missing": missing,
    }


def format_report(rep: dict) -> str:
    lines = ["Pendant-equilibrium instability report", ""]
    lines.append("Linearization eigenvalues")
    if rep["eigenvalues"] is None:
        lines.append("  (missing)")
    else:
        for c in rep["eigenvalues"]:
            eig = ", ".join(_fmt_complex(complex(*z)) for z in c["eigenvalues"])
            lines.append(f"  {c['case']:<30} {eig}  [{c['classification']}]")
    lines += ["", "Normal form"]
    if rep["normal_form"] is None:
        lines.append("  (missing)")
    else:
        for k, v in rep["normal_form"].items():
            lines.append(f"  {k}: {v}")
        lines.append(f"  Theta r^2 coefficient at eps^2: {rep['theta_r2_coefficient']}")
    lines += ["", f"Chetayev verdict: {rep['chetayev'] or '(missing)'}"]
    sim = rep["simulation"]
    if isinstance(sim, dict):
        lines.append(
            f"Simulation: |(z1,z2)| growth {sim['growth_z12']:.6g}, |(z3,z4)| growth {sim['growth_z34']:.6g}, "
            f"H drift {sim['h_drift']:.3g}"
        )
    else:
        lines.append(f"Simulation: {sim}")
    if rep["missing"]:
        lines.append("Missing artifacts: " + ", ".join(rep["missing"]))
    return "\n".join(lines) + "\n"


def _fmt_complex(z: complex) -> str:
    if abs(z.imag) < 1e-15:
        return f"{z.real:+.10g}"
    if abs(z.real) < 1e-15:
        return f"{z.imag:+.10g}j"
    return f"{z.real:+.10g}{z.imag:+.10g}j"


# -- argument parsing ----------------------------------------------------------

def _params_from_args(args) -> PendulumParams:
    if args.physical is None:
        return NORMALIZED
    m, l, g = (Fraction(x) for x in args.physical)
    return PendulumParams(m, l, g)


def _load_config(args) -> PipelineConfig:
    data = {}
    if args.config:
        data = json.loads(Path(args.config).read_text())
    cfg = PipelineConfig.from_dict(data)
    if args.output_dir is not None:
        cfg.output_dir = Path(args.output_dir)
    if args.format is not None:
        cfg.format = args.format
    if getattr(args, "max_degree", None) is not None:
        cfg.max_degree = args.max_degree
    if getattr(args, "eps_order", None) is not None:
        cfg.eps_order = args.eps_order
    return cfg


def _emit(obj_text: str, obj_json, fmt: str) -> None:
    if fmt == "json":
        sys.stdout.write(json.dumps(obj_json, indent=2) + "\n")
    else:
        sys.stdout.write(obj_text)


def _chain(cfg: PipelineConfig, upto: str):
    h = derive(cfg.max_degree)
    if upto == "derive":
        return h
    hz = transform(h)
    if upto == "transform":
        return hz
    scaled = blowup(hz, eps_truncation=cfg.eps_order)
    if upto == "scale":
        return scaled
    return to_sokolskii(scaled)


def build_parser() -> argparse.ArgumentParser:
    def global_flags(parser, default):
        parser.add_argument("--config", default=default, help="pipeline configuration JSON")
        parser.add_argument("--output-dir", default=default, help="directory for artifacts (pipeline, report)")
        parser.add_argument("--format", choices=("text", "json"), default=default, help="output format")

    p = argparse.ArgumentParser(prog="sokolskii", description=__doc__)
    global_flags(p, None)
    # accepted after the subcommand too; SUPPRESS keeps the top-level value when absent
    common = argparse.ArgumentParser(add_help=False)
    global_flags(common, argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True)
    _add = sub.add_parser
    sub.add_parser = lambda name, **kw: _add(name, parents=[common], **kw)

    def with_order(sp):
        sp.add_argument("--max-degree", type=int)
        sp.add_argument("--eps-order", type=int)
        return sp

    d = with_order(sub.add_parser("derive", help="Taylor-expand the Hamiltonian"))
    d.add_argument("--equilibrium", choices=("pendant", "upright"), default="pendant")
    d.add_argument("--physical", nargs=3, metavar=("M", "L", "G"), help="physical parameters as rationals")
    t = with_order(sub.add_parser("transform", help="apply the standardizing symplectic matrix"))
    t.add_argument("--matrix", help="JSON 4x4 matrix of Q(sqrt2) strings")
    t.add_argument("--input", help="serialized (y, p) jet; default: derive it")
    with_order(sub.add_parser("scale", help="blow-up and eps grading"))
    n = with_order(sub.add_parser("normalform", help="Lie-triangle normal form"))
    n.add_argument("--convention", choices=("reference", "derived"), default="reference",
                   help="eps^1 convention when the input is derived here")
    n.add_argument("--input", help="serialized graded Poisson series (eps^k blocks)")
    n.add_argument("--triangle-report", help="write the full Lie triangle as JSON")
    with_order(sub.add_parser("certify", help="Chetayev instability certificate"))
    s = sub.add_parser("simulate", help="integrate the truncated normal-form system")
    s.add_argument("--sim-config", help="SimConfig JSON (default: shipped weak-instability run)")
    s.add_argument("--csv", help="write trajectory CSV")
    s.add_argument("--gnuplot", help="write gnuplot script for the CSV")
    sub.add_parser("report", help="summarize artifacts in --output-dir")
    pl = with_order(sub.add_parser("pipeline", help="run every stage and compare with golden files"))
    pl.add_argument("--update-golden", action="store_true", help="overwrite golden files with this run")
    pl.add_argument("--simulate", action="store_true", help="also run the shipped simulation")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
    except (OSError, ValueError) as exc:
        sys.stderr.write(f"error: bad configuration: {exc}\n")
        return 2
    try:
        return _dispatch(args, cfg)
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_IO
    except ValueError as exc:
        sys.stderr.write(f"error: bad input: {exc}\n")
        return 2


def _dispatch(args, cfg: PipelineConfig) -> int:
    fmt = cfg.format
    cmd = args.command

    if cmd == "derive":
        h = derive(cfg.max_degree, _params_from_args(args), args.equilibrium)
        _emit(h.to_text(header=True), {"hamiltonian": h.to_text(header=True).splitlines()}, fmt)
        return 0
    if cmd == "transform":
        h = Jet.from_text(Path(args.input).read_text()) if args.input else derive(cfg.max_degree)
        p = STANDARDIZING_P
        if args.matrix:
            p = Matrix4.from_json(json.loads(Path(args.matrix).read_text()))
        hz = transform(h, p)
        _emit(hz.to_text(header=True), {"hamiltonian": hz.to_text(header=True).splitlines()}, fmt)
        return 0
    if cmd == "scale":
        g = _chain(cfg, "scale")
        _emit(_graded_text(g), {f"eps^{k}": v.to_text().splitlines() for k, v in g.items()}, fmt)
        return 0
    if cmd == "normalform":
        if args.input:
            sok = GradedSeries.from_text(Path(args.input).read_text(), PoissonSeries.from_text)
        else:
            sok = _chain(cfg, "sokolskii")
            if args.convention == "reference":
                sok = _reference_convention(sok)
        res = normal_form(sok)
        if args.triangle_report:
            tri = {
                f"H_{i}^{j}": v.to_text().splitlines() for (i, j), v in sorted(res.triangle.entries.items())
            }
            data = {"cells": tri, "generators": [w.to_text().splitlines() for w in res.generators]}
            Path(args.triangle_report).write_text(json.dumps(data, indent=2) + "\n")
        text = _graded_text(res.normal_hamiltonian) + _generators_text(res.generators)
        _emit(
            text,
            {
                "normal_form": {f"eps^{k}": v.to_text().splitlines() for k, v in res.normal_hamiltonian.items()},
                "generators": [w.to_text().splitlines() for w in res.generators],
            },
            fmt,
        )
        return 0
    if cmd == "certify":
        sok = _reference_convention(_chain(cfg, "sokolskii"))
        nf = normal_form(sok).normal_hamiltonian
        deg = max(cfg.max_degree, 4)
        fld = hamiltonian_vector_field(from_sokolskii(nf, deg))
        rep = check_chetayev_conditions(chetayev_function(deg), instability_cone(deg), fld)
        sys.stdout.write(rep.dumps() + "\n")
        return 0 if rep.passed else 1
    if cmd == "simulate":
        sc = SimConfig.from_json(args.sim_config) if args.sim_config else (cfg.simulate or load_weak_instability_config())
        fld = hamiltonian_vector_field(ref.instability_hamiltonian_z())
        traj = integrate(sc, fld)
        if args.csv:
            export_csv(traj, args.csv)
            if args.gnuplot:
                write_gnuplot(args.csv, args.gnuplot)
        summary = {
            "samples": len(traj),
            "growth_z12": traj.growth_factor("z12"),
            "growth_z34": traj.growth_factor("z34"),
            "h_drift": traj.h_drift(),
            "first_omega_time": traj.first_omega_time(),
        }
        _emit("".join(f"{k}: {v}\n" for k, v in summary.items()), summary, fmt)
        return 0
    if cmd == "report":
        rep = build_report(cfg.output_dir)
        _emit(format_report(rep), rep, fmt)
        return 0
    # pipeline
    if args.simulate and cfg.simulate is None:
        cfg.simulate = load_weak_instability_config()
    res = run_pipeline(cfg, update_golden=args.update_golden)
    for m in res.messages:
        quiet = res.exit_code or fmt == "json"
        (sys.stderr if quiet else sys.stdout).write(m.rstrip("\n") + "\n")
    if res.exit_code == EXIT_OK and fmt == "text":
        sys.stdout.write(format_report(build_report(cfg.output_dir)))
    elif res.exit_code == EXIT_OK:
        sys.stdout.write(json.dumps(build_report(cfg.output_dir), indent=2) + "\n")
    return res.exit_code


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
