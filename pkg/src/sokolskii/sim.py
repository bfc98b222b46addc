"""Numerical integration of the truncated z-chart equations with diagnostics.

The graded polynomial field is collapsed to float coefficients for a given
epsilon and compiled to plain Python source, which keeps a fixed-step RK4 run
of a million steps in the range of seconds without any array overhead.
"""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .chetayev import VectorFieldSeries, chetayev_function, instability_cone
from .exactalg import Z_VARS
from .scaling import GradedSeries

__all__ = [
    "SimConfig",
    "Trajectory",
    "RunSummary",
    "IntegrationError",
    "compile_polynomial",
    "compile_field",
    "integrate",
    "sweep",
    "export_csv",
    "read_csv",
    "write_gnuplot",
    "load_weak_instability_config",
    "CSV_HEADER",
]

CSV_HEADER = ("t", "z1", "z2", "z3", "z4", "H", "V", "Theta", "in_omega")
METHODS = ("rk4", "rk45")
_DATA = Path(__file__).with_name("data")


class IntegrationError(RuntimeError):
    """Adaptive integration gave up; ``partial`` holds what was computed."""

    def __init__(self, message: str, partial: "Trajectory"):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class SimConfig:
    """Parameters of one run.

    ``record_every`` counts fixed steps between stored samples (RK4) or sets
    the output grid spacing ``record_every * step`` (RK45). The first and last
    instants are always stored.
    """

    eps: float
    initial_state: tuple
    t_end: float
    step: float = 1e-3
    method: str = "rk4"
    record_every: int = 1
    sokolskii_diagnostics: bool = False
    rtol: float = 1e-10
    atol: float = 1e-20

    def __post_init__(self):
        object.__setattr__(self, "initial_state", tuple(float(x) for x in self.initial_state))
        if len(self.initial_state) != 4:
            raise ValueError("initial_state needs four components")
        if not self.step > 0:
            raise ValueError("step must be positive")
        if not self.t_end >= self.step:
            raise ValueError("t_end must be at least one step")
        # eps = 0 is accepted so the decoupled linear rotation can be run
        if self.eps < 0:
            raise ValueError("eps must be non-negative")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ValueError("record_every must be a positive integer")
        if self.sokolskii_diagnostics:
            z = self.initial_state
            if z[2] * z[2] + z[3] * z[3] == 0:
                raise ValueError("Sokol'skii diagnostics need r(0) > 0")

    @classmethod
    def from_dict(cls, data: dict) -> "SimConfig":
        known = {k: v for k, v in data.items() if k in cls.__dataclass_fields__}
        return cls(**known)

    @classmethod
    def from_json(cls, path) -> "SimConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["initial_state"] = list(self.initial_state)
        return d


def load_weak_instability_config() -> SimConfig:
    """Shipped configuration for the weak-instability run."""
    return SimConfig.from_json(_DATA / "weak_instability.json")


def _float_terms(g, eps: float) -> dict:
    """Collapse a graded series (or single jet) to ``{exponent: float}``."""
    out: dict = {}
    parts = g.items() if isinstance(g, GradedSeries) else [(0, g)]
    for k, j in parts:
        w = eps**k
        for e, c in j.terms.items():
            out[e] = out.get(e, 0.0) + w * float(c)
    return {e: c for e, c in out.items() if c != 0.0}


def _poly_source(terms: dict) -> str:
    if not terms:
        return "0.0"
    pieces = []
    for e, c in sorted(terms.items()):
        factors = [repr(c)]
        for name, n in zip(Z_VARS, e):
            factors += [name] * n
        pieces.append("*".join(factors))
    return " + ".join(pieces)


def compile_polynomial(g, eps: float) -> Callable[..., float]:
    """Float function ``f(z1, z2, z3, z4)`` for a jet or graded series at ``eps``."""
    src = f"def f({', '.join(Z_VARS)}):\n    return {_poly_source(_float_terms(g, eps))}\n"
    ns: dict = {}
    exec(compile(src, "<polynomial>", "exec"), ns)
    return ns["f"]


def compile_field(field_: VectorFieldSeries | Sequence, eps: float) -> Callable[..., tuple]:
    """Float right-hand side ``f(z1, z2, z3, z4) -> (z1', z2', z3', z4')``."""
    comps = field_.components if isinstance(field_, VectorFieldSeries) else tuple(field_)
    if isinstance(field_, VectorFieldSeries) and field_.chart != "z":
        raise ValueError("only z-chart fields can be integrated")
    body = ", ".join(_poly_source(_float_terms(c, eps)) for c in comps)
    src = f"def f({', '.join(Z_VARS)}):\n    return ({body})\n"
    ns: dict = {}
    exec(compile(src, "<field>", "exec"), ns)
    return ns["f"]


@dataclass
class Trajectory:
    """Recorded samples; arrays share the first axis."""

    t: np.ndarray
    states: np.ndarray
    H: np.ndarray
    V: np.ndarray
    Theta: np.ndarray
    in_omega: np.ndarray
    config: SimConfig | None = None
    r: np.ndarray | None = None

    def __len__(self):
        return len(self.t)

    @property
    def samples(self):
        for i in range(len(self.t)):
            yield (
                float(self.t[i]),
                tuple(float(x) for x in self.states[i]),
                float(self.H[i]),
                float(self.V[i]),
                float(self.Theta[i]),
                bool(self.in_omega[i]),
            )

    def norm12(self) -> np.ndarray:
        return np.hypot(self.states[:, 0], self.states[:, 1])

    def norm34(self) -> np.ndarray:
        return np.hypot(self.states[:, 2], self.states[:, 3])

    def growth_factor(self, which: str = "z12") -> float:
        """``max_t |.| / |.|(0)`` for the (z1, z2) or (z3, z4) block."""
        n = self.norm12() if which == "z12" else self.norm34()
        if not len(n):
            return math.nan
        return float(n.max() / n[0]) if n[0] else math.inf

    def h_drift(self, final_only: bool = False) -> float:
        """Relative energy drift, maximal over the run unless ``final_only``."""
        if not len(self.H):
            return math.nan
        h0 = self.H[0]
        dev = abs(self.H[-1] - h0) if final_only else float(np.max(np.abs(self.H - h0)))
        return float(dev / abs(h0)) if h0 else float(dev)

    def first_omega_time(self) -> float | None:
        idx = np.flatnonzero(self.in_omega)
        return float(self.t[idx[0]]) if len(idx) else None

    @classmethod
    def empty(cls) -> "Trajectory":
        z = np.zeros(0)
        return cls(z, np.zeros((0, 4)), z, z, z, np.zeros(0, dtype=bool))


class _Diagnostics:
    def __init__(self, source: GradedSeries | None, eps: float):
        self.h = compile_polynomial(source, eps) if source is not None else None
        self.v = compile_polynomial(chetayev_function(), eps)
        cone = instability_cone()
        self.theta = compile_polynomial(cone.inequalities[1][0], eps)
        self.cone = [(compile_polynomial(g, eps), s) for g, s in cone.inequalities]

    def build(self, ts, states, config, with_r: bool) -> Trajectory:
        states = np.asarray(states, dtype=float).reshape(-1, 4)
        rows = [tuple(s) for s in states]
        nan = math.nan
        H = np.array([self.h(*z) if self.h else nan for z in rows])
        V = np.array([self.v(*z) for z in rows])
        Th = np.array([self.theta(*z) for z in rows])
        inside = np.array(
            [all((g(*z) > 0) if s == ">" else (g(*z) < 0) for g, s in self.cone) for z in rows],
            dtype=bool,
        )
        r = np.hypot(states[:, 2], states[:, 3]) if with_r else None
        return Trajectory(np.asarray(ts, dtype=float), states, H, V, Th, inside, config, r)


def _rk4(f, y0, step: float, t_end: float, record_every: int):
    n_full = int(math.floor(t_end / step * (1 + 1e-12)))
    tail = t_end - n_full * step
    if tail <= step * 1e-9:
        tail = 0.0
    y1, y2, y3, y4 = y0
    h = step
    h2 = h / 2
    h6 = h / 6
    ts, ys = [0.0], [(y1, y2, y3, y4)]
    for i in range(1, n_full + 1):
        a1, a2, a3, a4 = f(y1, y2, y3, y4)
        b1, b2, b3, b4 = f(y1 + h2 * a1, y2 + h2 * a2, y3 + h2 * a3, y4 + h2 * a4)
        c1, c2, c3, c4 = f(y1 + h2 * b1, y2 + h2 * b2, y3 + h2 * b3, y4 + h2 * b4)
        d1, d2, d3, d4 = f(y1 + h * c1, y2 + h * c2, y3 + h * c3, y4 + h * c4)
        y1 += h6 * (a1 + 2 * b1 + 2 * c1 + d1)
        y2 += h6 * (a2 + 2 * b2 + 2 * c2 + d2)
        y3 += h6 * (a3 + 2 * b3 + 2 * c3 + d3)
        y4 += h6 * (a4 + 2 * b4 + 2 * c4 + d4)
        if i % record_every == 0 or (i == n_full and not tail):
            ts.append(i * h)
            ys.append((y1, y2, y3, y4))
    if tail:
        h, h2, h6 = tail, tail / 2, tail / 6
        a = f(y1, y2, y3, y4)
        b = f(*(y + h2 * k for y, k in zip((y1, y2, y3, y4), a)))
        c = f(*(y + h2 * k for y, k in zip((y1, y2, y3, y4), b)))
        d = f(*(y + h * k for y, k in zip((y1, y2, y3, y4), c)))
        ys.append(tuple(y + h6 * (p + 2 * q + 2 * s + u) for y, p, q, s, u in zip((y1, y2, y3, y4), a, b, c, d)))
        ts.append(t_end)
    return ts, ys


def integrate(config: SimConfig, field_: VectorFieldSeries | Sequence) -> Trajectory:
    """Integrate the eps-substituted polynomial field from ``config.initial_state``.

    Raises
    ------
    IntegrationError
        When the adaptive solver fails (typically step-size underflow); the
        error carries the partial trajectory.
    """
    f = compile_field(field_, config.eps)
    source = field_.source_hamiltonian if isinstance(field_, VectorFieldSeries) else None
    diag = _Diagnostics(source, config.eps)
    if config.method == "rk4":
        ts, ys = _rk4(f, config.initial_state, config.step, config.t_end, config.record_every)
        return diag.build(ts, ys, config, config.sokolskii_diagnostics)

    spacing = config.step * config.record_every
    grid = np.arange(0.0, config.t_end, spacing)
    grid = np.append(grid, config.t_end) if grid[-1] < config.t_end else grid
    sol = solve_ivp(
        lambda t, y: f(*y),
        (0.0, config.t_end),
        np.asarray(config.initial_state),
        method="RK45",
        t_eval=grid,
        rtol=config.rtol,
        atol=config.atol,
    )
    traj = diag.build(sol.t, sol.y.T, config, config.sokolskii_diagnostics)
    if sol.status != 0:
        raise IntegrationError(f"RK45 stopped at t={sol.t[-1] if len(sol.t) else 0.0}: {sol.message}", traj)
    return traj


@dataclass(frozen=True)
class RunSummary:
    config: SimConfig
    growth_z12: float = math.nan
    growth_z34: float = math.nan
    first_omega_time: float | None = None
    h_drift: float = math.nan
    error: str | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["config"] = self.config.to_dict()
        return d


def _summarize(config: SimConfig, field_) -> RunSummary:
    try:
        tr = integrate(config, field_)
    except Exception as exc:  # collected per run
        return RunSummary(config, error=f"{type(exc).__name__}: {exc}")
    return RunSummary(
        config,
        growth_z12=tr.growth_factor("z12"),
        growth_z34=tr.growth_factor("z34"),
        first_omega_time=tr.first_omega_time(),
        h_drift=tr.h_drift(final_only=True),
    )


def sweep(configs: Sequence[SimConfig], field_, workers: int = 1) -> list:
    """Independent runs; summaries come back in input order, errors included."""
    configs = list(configs)
    if workers <= 1 or len(configs) < 2:
        return [_summarize(c, field_) for c in configs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda c: _summarize(c, field_), configs))


def export_csv(traj: Trajectory, path) -> None:
    """Write samples with 17 significant digits so floats round-trip exactly."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for t, z, H, V, Th, inside in traj.samples:
            w.writerow([format(x, ".17g") for x in (t, *z, H, V, Th)] + [int(inside)])


def read_csv(path) -> Trajectory:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ValueError("unexpected CSV header")
    if len(rows) == 1:
        return Trajectory.empty()
    data = np.array([[float(x) for x in row[:8]] for row in rows[1:]])
    inside = np.array([row[8] == "1" for row in rows[1:]], dtype=bool)
    return Trajectory(data[:, 0], data[:, 1:5], data[:, 5], data[:, 6], data[:, 7], inside)


def write_gnuplot(csv_path, script_path, title: str = "truncated normal-form system") -> None:
    """gnuplot script plotting z1..z4 against t from ``csv_path``."""
    csv_name = Path(csv_path).name
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        f"set title '{title}'",
        "set xlabel 't'",
        "set ylabel 'z'",
        f"plot for [i=2:5] '{csv_name}' using 1:i with lines",
        "",
    ]
    Path(script_path).write_text("\n".join(lines))
