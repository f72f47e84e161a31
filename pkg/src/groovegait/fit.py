"""Derivative-free calibration of the gait coupling parameters.

The objective is the sum of squared heading errors (degrees squared)
between observed headings and the simulated heading, linearly
interpolated between half-cycle samples.  Candidates outside the bounds
are simulated at their projection onto the bound box and charged a
quadratic penalty, so both optimizers can run unconstrained.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Sequence

import numpy as np

from groovegait.errors import ArityError
from groovegait.sim import Scenario, run

FREE_PARAMS = ("k_front", "k_rear", "beta")
PENALTY = 1e6

GOLDEN_TOL = 1e-4
GOLDEN_MAX_EVALS = 200

NM_REFLECT = 1.0
NM_EXPAND = 2.0
NM_CONTRACT = 0.5
NM_SHRINK = 0.5
NM_DIAMETER_TOL = 1e-5
NM_SPREAD_TOL = 1e-8
NM_MAX_EVALS = 500
NM_INITIAL_STEP = 0.1

# eigenvalue ratio below which a direction in parameter space counts as flat
FLAT_RATIO = 1e-3

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ObservationSeries:
    scenario: Scenario
    points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        pts = tuple((float(t), float(h)) for t, h in self.points)
        object.__setattr__(self, "points", pts)
        times = [t for t, _ in pts]
        if any(t < 0 for t in times):
            raise ValueError("observation times must be nonnegative")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("observation times must be strictly increasing")
        if times and times[-1] > self.scenario.duration_s:
            raise ValueError(f"observation at {times[-1]} s is past the scenario end "
                             f"({self.scenario.duration_s} s)")


@dataclass(frozen=True)
class FitProblem:
    series: tuple[ObservationSeries, ...]
    free_params: tuple[str, ...]
    bounds: Mapping[str, tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "series", tuple(self.series))
        object.__setattr__(self, "free_params", tuple(self.free_params))
        if not self.free_params:
            raise ArityError("at least one free parameter is required")
        bounds = {}
        for name in self.free_params:
            if name not in FREE_PARAMS:
                raise ValueError(f"unknown free parameter {name!r}; choose from {FREE_PARAMS}")
            lo, hi = self.bounds.get(name, (0.0, 1.0))
            lo, hi = float(lo), float(hi)
            if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
                raise ValueError(f"bounds for {name} must be finite with lo <= hi")
            if lo < 0 or hi > 1 or (name == "beta" and lo <= 0):
                raise ValueError(f"bounds for {name} leave the parameter's valid range")
            bounds[name] = (lo, hi)
        object.__setattr__(self, "bounds", bounds)

    @property
    def lower(self) -> np.ndarray:
        return np.array([self.bounds[n][0] for n in self.free_params])

    @property
    def upper(self) -> np.ndarray:
        return np.array([self.bounds[n][1] for n in self.free_params])


@dataclass(frozen=True)
class FitResult:
    params: dict[str, float]
    sse: float
    evaluations: int
    converged: bool
    method: str = ""
    notes: tuple[str, ...] = ()


def _as_vector(problem: FitProblem, candidate) -> np.ndarray:
    if isinstance(candidate, Mapping):
        return np.array([float(candidate[n]) for n in problem.free_params])
    x = np.atleast_1d(np.asarray(candidate, dtype=float))
    if x.shape != (len(problem.free_params),):
        raise ArityError(f"expected {len(problem.free_params)} values, got {x.shape}")
    return x


def simulated_heading(series: ObservationSeries, values: Mapping[str, float]) -> np.ndarray:
    """Simulated heading (right-turn-positive degrees) at each observation time."""
    scenario = replace(series.scenario, params=replace(series.scenario.params, **values))
    traj = run(scenario)
    heading = np.unwrap(traj.heading_deg, period=360.0)
    times = np.array([t for t, _ in series.points])
    return np.interp(times, traj.times, heading)


def loss(problem: FitProblem, candidate) -> float:
    x = _as_vector(problem, candidate)
    inside = np.clip(x, problem.lower, problem.upper)
    values = {n: float(v) for n, v in zip(problem.free_params, inside)}
    sse = 0.0
    for series in problem.series:
        if not series.points:
            continue
        observed = np.array([h for _, h in series.points])
        err = (simulated_heading(series, values) - observed + 180.0) % 360.0 - 180.0
        sse += float(np.dot(err, err))
    return sse + PENALTY * float(np.sum((x - inside) ** 2))


def golden_section(f: Callable[[float], float], lo: float, hi: float,
                   tol: float = GOLDEN_TOL, max_evals: int = GOLDEN_MAX_EVALS):
    """Minimise a unimodal ``f`` on [lo, hi].

    Returns ``(x, fx, evaluations, converged)`` where ``x`` is the best
    point evaluated, bracket end points included.
    """
    evals = []

    def call(x):
        fx = f(x)
        evals.append((x, fx))
        return fx

    a, b = float(lo), float(hi)
    call(a)
    if b > a:
        call(b)
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = call(c), call(d)
    while b - a >= tol and len(evals) < max_evals:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = call(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = call(d)
    x, fx = min(evals, key=lambda e: e[1])
    return x, fx, len(evals), b - a < tol


def nelder_mead(f: Callable[[np.ndarray], float], simplex: Sequence[Sequence[float]],
                diameter_tol: float = NM_DIAMETER_TOL, spread_tol: float = NM_SPREAD_TOL,
                max_evals: int = NM_MAX_EVALS, history: list | None = None):
    """Nelder-Mead downhill simplex from an explicit starting simplex.

    Returns ``(x, fx, evaluations, converged)``.  When ``history`` is a list,
    the best value after every iteration is appended to it.
    """
    pts = np.array(simplex, dtype=float)
    vals = np.array([f(p) for p in pts])
    n_evals = len(pts)
    converged = False

    while True:
        order = np.argsort(vals, kind="stable")
        pts, vals = pts[order], vals[order]
        if history is not None:
            history.append(float(vals[0]))
        diameter = max(np.linalg.norm(p - q) for p in pts for q in pts)
        if diameter < diameter_tol or vals[-1] - vals[0] < spread_tol:
            converged = True
            break
        if n_evals >= max_evals:
            break

        centroid = pts[:-1].mean(axis=0)
        worst = pts[-1]
        xr = centroid + NM_REFLECT * (centroid - worst)
        fr = f(xr)
        n_evals += 1
        if vals[0] <= fr < vals[-2]:
            pts[-1], vals[-1] = xr, fr
            continue
        if fr < vals[0]:
            xe = centroid + NM_EXPAND * (xr - centroid)
            fe = f(xe)
            n_evals += 1
            if fe < fr:
                pts[-1], vals[-1] = xe, fe
            else:
                pts[-1], vals[-1] = xr, fr
            continue
        if fr < vals[-1]:
            xc = centroid + NM_CONTRACT * (xr - centroid)
            fc = f(xc)
            n_evals += 1
            if fc <= fr:
                pts[-1], vals[-1] = xc, fc
                continue
        else:
            xc = centroid + NM_CONTRACT * (worst - centroid)
            fc = f(xc)
            n_evals += 1
            if fc < vals[-1]:
                pts[-1], vals[-1] = xc, fc
                continue
        for i in range(1, len(pts)):
            pts[i] = pts[0] + NM_SHRINK * (pts[i] - pts[0])
            vals[i] = f(pts[i])
            n_evals += 1

    return pts[0].copy(), float(vals[0]), n_evals, converged


def _finish(problem, x, evaluations, converged, method, objective):
    inside = np.clip(x, problem.lower, problem.upper)
    sse = objective(inside)
    values = {n: float(v) for n, v in zip(problem.free_params, inside)}
    notes = flat_directions(problem, inside, objective) if len(inside) > 1 else ()
    return FitResult(values, float(sse), evaluations, bool(converged), method, notes)


def fit_golden(problem: FitProblem, objective: Callable | None = None) -> FitResult:
    """Golden-section search over the single free parameter's bounds."""
    if len(problem.free_params) != 1:
        raise ArityError(f"golden-section search fits exactly one parameter, "
                         f"got {len(problem.free_params)}")
    objective = objective or (lambda v: loss(problem, v))
    lo, hi = problem.bounds[problem.free_params[0]]
    x, _, evals, converged = golden_section(lambda k: objective(np.array([k])), lo, hi)
    return _finish(problem, np.array([x]), evals, converged, "golden", objective)


def fit_nelder_mead(problem: FitProblem, objective: Callable | None = None,
                    history: list | None = None, **options) -> FitResult:
    """Nelder-Mead from the bound-box centre.

    ``options`` may override ``diameter_tol``, ``spread_tol`` and ``max_evals``.
    """
    n = len(problem.free_params)
    if not 1 <= n <= 3:
        raise ArityError(f"Nelder-Mead fits 1 to 3 parameters, got {n}")
    objective = objective or (lambda v: loss(problem, v))
    lo, hi = problem.lower, problem.upper
    centre = 0.5 * (lo + hi)
    simplex = [centre] + [centre + NM_INITIAL_STEP * (hi - lo) * np.eye(n)[i] for i in range(n)]
    x, _, evals, converged = nelder_mead(objective, simplex, history=history, **options)
    return _finish(problem, x, evals, converged, "nelder-mead", objective)


def flat_directions(problem: FitProblem, x: np.ndarray, objective: Callable) -> tuple[str, ...]:
    """Notes on parameter combinations the objective barely constrains.

    Uses a central-difference Hessian at ``x``; a direction is flagged when
    its curvature is below ``FLAT_RATIO`` times the largest curvature.
    """
    n = len(x)
    h = 1e-3 * np.maximum(problem.upper - problem.lower, 1e-6)
    # keep every probe inside the box so the penalty never enters the estimate
    x = np.clip(x, problem.lower + h, problem.upper - h)
    f0 = objective(x)
    hess = np.empty((n, n))
    for i in range(n):
        ei = np.eye(n)[i] * h[i]
        hess[i, i] = (objective(x + ei) - 2 * f0 + objective(x - ei)) / h[i] ** 2
        for j in range(i):
            ej = np.eye(n)[j] * h[j]
            hess[i, j] = hess[j, i] = (
                objective(x + ei + ej) - objective(x + ei - ej)
                - objective(x - ei + ej) + objective(x - ei - ej)) / (4 * h[i] * h[j])
    w, v = np.linalg.eigh(hess)
    top = max(abs(w[-1]), 1e-300)
    notes = []
    for value, vec in zip(w, v.T):
        if abs(value) < FLAT_RATIO * top:
            combo = " ".join(f"{c:+.3f}*{name}" for c, name in zip(vec, problem.free_params))
            notes.append(f"near-zero curvature along {combo}: "
                         "these parameters are not separately identifiable from the data")
    return tuple(notes)
