"""Parameter sweeps, transition location, and phase labeling.

The sweep machinery minimizes the mean-field energy point by point along
one axis (coupling strength, weak-bond strength, or qubit splitting) and
the classifiers condense the results into labels:

* field phase: ``normal`` vs ``superradiant`` by the condensate norm;
* transition order along the coupling axis: a jump test at the refined
  critical coupling, corroborated by a one-sided slope-ratio probe of
  the energy envelope and by a scan for coexisting minima (hysteresis);
* magnetic order of the qubit ring from a correlation report:
  paramagnetic ``P``, ferromagnetic ``F``, or the spatially alternating
  ``FP`` pattern that strong-bond windows imprint.

Labels compose as ``N``/``S`` prefix plus magnetic order, e.g. ``SFP``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .correlation import correlation_report
from .fermion import SolverError
from .meanfield import SearchSpec, minimize_phi, stationary_points
from .model import ChainSpec, IsingProfile, ModeSet

__all__ = [
    "NoTransitionError",
    "AlreadyCondensedError",
    "Thresholds",
    "SweepContext",
    "SweepRecord",
    "SweepResult",
    "TransitionClassification",
    "PhaseLabel",
    "PhaseCell",
    "PhaseColumn",
    "PhaseDiagram",
    "sweep",
    "critical_coupling",
    "classify_transition_order",
    "classify_magnetic_order",
    "phase_diagram",
]


class NoTransitionError(RuntimeError):
    """The sweep never crosses the condensation threshold."""


class AlreadyCondensedError(NoTransitionError):
    """The sweep starts on the condensed side; the onset lies below the grid."""


@dataclass(frozen=True)
class Thresholds:
    """Classifier knobs, shared by the transition and magnetic labels."""

    field: float = 1e-5
    critical_tol: float = 1e-4
    jump: float = 0.02
    slope_delta: float = 4e-3
    slope_ratio: float = 0.75
    hysteresis_offsets: tuple = (-0.02, -0.01, -0.005, 0.005, 0.01, 0.02)
    phi_separation: float = 0.02
    xi: float = 5.0
    sigma_z: float = 0.8
    oscillation: float = 0.3


@dataclass(frozen=True)
class SweepContext:
    """Everything held fixed during a sweep.

    ``lambda0`` is the coupling used when the swept axis is not the
    coupling itself.  ``delta_J`` (absolute) or ``delta_J_factor``
    (relative to ``E_z``) sets the strong/weak contrast when sweeping
    ``J_min``; the factor variant also rescales the contrast when
    sweeping ``E_z``.
    """

    chain: ChainSpec
    modes: tuple
    lambda0: float | None = None
    search: SearchSpec | None = None
    delta_J: float | None = None
    delta_J_factor: float | None = None


@dataclass(frozen=True)
class SweepRecord:
    value: float
    phi: tuple | None
    Sigma_x: tuple | None
    e_g: float | None
    degenerate: bool
    status: str
    message: str = ""


@dataclass(frozen=True)
class SweepResult:
    axis: str
    records: tuple
    context: SweepContext

    def values(self) -> np.ndarray:
        return np.array([r.value for r in self.records])


def _point(ctx: SweepContext, axis: str, value: float):
    """Chain and mode set at one sweep point."""
    chain = ctx.chain
    if axis == "lambda0":
        lam = value
    elif axis == "J_min":
        if chain.ising.kind != "rectangular":
            raise ValueError("J_min sweeps need a rectangular Ising profile")
        if ctx.delta_J is not None:
            dJ = ctx.delta_J
        elif ctx.delta_J_factor is not None:
            dJ = ctx.delta_J_factor * chain.E_z
        else:
            raise ValueError("J_min sweeps need delta_J or delta_J_factor")
        profile = IsingProfile.rectangular(value + dJ, value, chain.ising.period)
        chain = replace(chain, ising=profile)
        lam = ctx.lambda0
    elif axis == "E_z":
        chain = replace(chain, E_z=value)
        if ctx.delta_J_factor is not None:
            if chain.ising.kind != "rectangular":
                raise ValueError("delta_J_factor needs a rectangular Ising profile")
            profile = IsingProfile.rectangular(
                chain.ising.J_min + ctx.delta_J_factor * value, chain.ising.J_min,
                chain.ising.period,
            )
            chain = replace(chain, ising=profile)
        lam = ctx.lambda0
    else:
        raise ValueError(f"unknown sweep axis {axis!r}")
    if lam is None:
        raise ValueError(f"sweeping {axis!r} needs a fixed lambda0 in the context")
    return chain, ModeSet(modes=ctx.modes, lambda0=lam, N=chain.N, E_c=chain.E_c)


def _solve_record(ctx: SweepContext, axis: str, value: float) -> SweepRecord:
    try:
        chain, modeset = _point(ctx, axis, value)
        state = minimize_phi(chain, modeset, ctx.search)
    except (SolverError, ValueError) as exc:
        return SweepRecord(
            value=float(value), phi=None, Sigma_x=None, e_g=None, degenerate=False,
            status="error", message=str(exc),
        )
    return SweepRecord(
        value=float(value),
        phi=tuple(state.phi),
        Sigma_x=tuple(state.Sigma_x),
        e_g=state.e_g,
        degenerate=state.degenerate,
        status="ok",
    )


def sweep(ctx: SweepContext, axis: str, values: Sequence[float], threads: int = 1) -> SweepResult:
    """Minimize along one axis; failed points are recorded, not fatal."""
    values = [float(v) for v in values]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(lambda v: _solve_record(ctx, axis, v), values))
    else:
        records = [_solve_record(ctx, axis, v) for v in values]
    return SweepResult(axis=axis, records=tuple(records), context=ctx)


def _condensed(record: SweepRecord, thr: Thresholds) -> bool:
    if record.status != "ok":
        raise SolverError(f"sweep point {record.value} failed: {record.message}")
    return max(abs(p) for p in record.phi) > thr.field


class _PointCache:
    """Memoized minimize-at-lambda0 evaluations used by the refiners."""

    def __init__(self, ctx: SweepContext, axis: str):
        if axis != "lambda0":
            raise ValueError("transition refinement is defined along the lambda0 axis")
        self.ctx = ctx
        self._states: dict[float, object] = {}

    def state(self, lam: float):
        if lam not in self._states:
            chain, modeset = _point(self.ctx, "lambda0", lam)
            self._states[lam] = minimize_phi(chain, modeset, self.ctx.search)
        return self._states[lam]

    def phi_norm(self, lam: float) -> float:
        return float(np.max(np.abs(self.state(lam).phi)))

    def energy(self, lam: float) -> float:
        return float(self.state(lam).e_g)


def _onset_bracket(result: SweepResult, thr: Thresholds):
    flags = [_condensed(r, thr) for r in result.records]
    if not any(flags):
        raise NoTransitionError("no transition in the swept range")
    first = flags.index(True)
    if first == 0:
        raise AlreadyCondensedError("already condensed at the low end of the sweep")
    return result.records[first - 1].value, result.records[first].value


def _bisect_onset(cache: _PointCache, lo: float, hi: float, thr: Thresholds):
    while hi - lo > thr.critical_tol:
        mid = 0.5 * (lo + hi)
        if cache.phi_norm(mid) > thr.field:
            hi = mid
        else:
            lo = mid
    return lo, hi


def critical_coupling(result: SweepResult, thresholds: Thresholds | None = None) -> float:
    """Onset coupling of the condensate, refined by bisection.

    The sweep must run along ``lambda0`` and must straddle the onset:
    :class:`NoTransitionError` or :class:`AlreadyCondensedError` report
    the two ways a grid can miss it.
    """
    thr = thresholds or Thresholds()
    lo, hi = _onset_bracket(result, thr)
    cache = _PointCache(result.context, result.axis)
    lo, hi = _bisect_onset(cache, lo, hi, thr)
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class TransitionClassification:
    order: str  # "first" | "second" | "ambiguous" | "none"
    lambda_c: float | None = None
    jump: float | None = None
    slope_ratio: float | None = None
    hysteresis: bool | None = None


def classify_transition_order(
    result: SweepResult, thresholds: Thresholds | None = None
) -> TransitionClassification:
    """Order of the condensation transition along a ``lambda0`` sweep.

    Primary signal: the condensate amplitude at the upper edge of the
    bisection bracket; a second-order onset has barely left zero there
    while a first-order one arrives with a finite jump.  Two
    corroborating probes run on top:

    * the ratio of one-sided difference quotients of the energy envelope
      at shrinking offsets above the onset (a kink gives ratio ~1, a
      smooth quadratic departure gives ~1/2);
    * coexistence of well-separated stable minima at couplings near the
      onset (single-mode contexts only).

    When the probes contradict the jump verdict the label is
    ``ambiguous`` rather than a coin flip.
    """
    thr = thresholds or Thresholds()
    try:
        lo, hi = _onset_bracket(result, thr)
    except AlreadyCondensedError:
        raise
    except NoTransitionError:
        return TransitionClassification(order="none")

    cache = _PointCache(result.context, result.axis)
    lo, hi = _bisect_onset(cache, lo, hi, thr)
    lambda_c = 0.5 * (lo + hi)
    jump = cache.phi_norm(hi)
    jump_first = jump > thr.jump

    delta = thr.slope_delta
    e0 = cache.energy(hi)
    g_full = (cache.energy(hi + delta) - e0) / delta
    g_half = (cache.energy(hi + 0.5 * delta) - e0) / (0.5 * delta)
    ratio = 0.5 if abs(g_full) < 1e-15 else g_half / g_full
    slope_first = ratio > thr.slope_ratio

    hysteresis: bool | None = None
    if len(result.context.modes) == 1:
        hysteresis = False
        for off in thr.hysteresis_offsets:
            lam = lambda_c + off
            if lam <= 0:
                continue
            chain, modeset = _point(result.context, "lambda0", lam)
            minima = [
                p.phi for p in stationary_points(chain, modeset, result.context.search)
                if p.kind == "minimum"
            ]
            if len(minima) >= 2 and max(minima) - min(minima) > thr.phi_separation:
                hysteresis = True
                break

    corroborators = [slope_first] if hysteresis is None else [slope_first, hysteresis]
    if jump_first and any(corroborators):
        order = "first"
    elif not jump_first and not any(corroborators):
        order = "second"
    else:
        order = "ambiguous"
    return TransitionClassification(
        order=order, lambda_c=lambda_c, jump=jump, slope_ratio=ratio, hysteresis=hysteresis
    )


def classify_magnetic_order(
    report, chain: ChainSpec, thresholds: Thresholds | None = None
) -> str:
    """Label the qubit ring from its correlation report.

    ``P``: short-ranged everywhere and strongly polarized along the
    rotated field.  ``F``: the decay length clears the threshold on
    every site.  ``FP``: both the length and the polarization oscillate
    strongly; for rectangular profiles the pattern must also align with
    the bond windows (longer lengths and weaker polarization on the
    strong bonds).  Anything else: ``undetermined``.
    """
    thr = thresholds or Thresholds()
    xi = np.asarray(report.xi_rl)
    sz = np.asarray(report.sigma_z_rot)
    if xi.max() <= thr.xi and sz.min() >= thr.sigma_z:
        return "P"
    if xi.min() >= thr.xi:
        return "F"
    osc_xi = (xi.max() - xi.min()) / max(xi.max(), 1e-300)
    osc_sz = (sz.max() - sz.min()) / max(abs(sz.max()), 1e-300)
    if osc_xi > thr.oscillation and osc_sz > thr.oscillation:
        if chain.ising.kind == "rectangular":
            bonds = chain.bonds()
            strong = bonds == bonds.max()
            if strong.any() and (~strong).any():
                aligned = (
                    xi[strong].mean() > xi[~strong].mean()
                    and sz[strong].mean() < sz[~strong].mean()
                )
                if not aligned:
                    return "undetermined"
        return "FP"
    return "undetermined"


@dataclass(frozen=True)
class PhaseLabel:
    field_phase: str
    transition_order: str
    magnetic_order: str

    @property
    def code(self) -> str:
        prefix = "S" if self.field_phase == "superradiant" else "N"
        magnetic = self.magnetic_order if self.magnetic_order != "undetermined" else "?"
        return prefix + magnetic


@dataclass(frozen=True)
class PhaseCell:
    E_z: float
    J_min: float
    J_max: float
    lambda0: float
    phi: tuple | None
    e_g: float | None
    label: PhaseLabel | None
    status: str
    message: str = ""


@dataclass(frozen=True)
class PhaseColumn:
    E_z: float
    J_min: float
    lambda_c: float | None
    transition_order: str


@dataclass(frozen=True)
class PhaseDiagram:
    cells: tuple
    columns: tuple
    crossover: tuple  # (E_z, J_min midpoint of the second->first change) pairs


def phase_diagram(
    chain: ChainSpec,
    modes,
    lambda0_values: Sequence[float],
    J_min_values: Sequence[float],
    *,
    delta_J: float | None = None,
    delta_J_factor: float | None = None,
    E_z_values: Sequence[float] | None = None,
    search: SearchSpec | None = None,
    thresholds: Thresholds | None = None,
    n_max: int | None = None,
    magnetic: bool = True,
    order: bool = True,
    threads: int = 1,
) -> PhaseDiagram:
    """Label a (J_min, lambda0) grid, optionally stacked over E_z.

    Each ``J_min`` column is swept in ``lambda0``; the column's onset is
    refined into a boundary point and, when ``order`` is set, classified
    for its transition order.  Cell labels combine the local field phase
    with (when ``magnetic`` is set) the magnetic order of the solved
    ground state.  The per-``E_z`` crossover is the midpoint between the
    largest ``J_min`` column labeled second order and the smallest
    labeled first order, provided the two groups do not interleave.
    """
    if chain.ising.kind != "rectangular":
        raise ValueError("phase diagrams are built over rectangular profiles")
    if (delta_J is None) == (delta_J_factor is None):
        raise ValueError("give exactly one of delta_J or delta_J_factor")
    thr = thresholds or Thresholds()
    modes = tuple(int(m) for m in modes)

    cells = []
    columns = []
    crossover = []
    for E_z in E_z_values if E_z_values is not None else (chain.E_z,):
        dJ = delta_J if delta_J is not None else delta_J_factor * E_z
        for J_min in J_min_values:
            profile = IsingProfile.rectangular(J_min + dJ, J_min, chain.ising.period)
            col_chain = replace(chain, E_z=float(E_z), ising=profile)
            ctx = SweepContext(chain=col_chain, modes=modes, search=search)
            result = sweep(ctx, "lambda0", lambda0_values, threads=threads)

            lambda_c = None
            t_order = "none"
            try:
                if order:
                    cls = classify_transition_order(result, thr)
                    lambda_c, t_order = cls.lambda_c, cls.order
                else:
                    lambda_c = critical_coupling(result, thr)
            except NoTransitionError:
                pass
            columns.append(
                PhaseColumn(
                    E_z=float(E_z), J_min=float(J_min), lambda_c=lambda_c,
                    transition_order=t_order,
                )
            )

            for rec in result.records:
                if rec.status != "ok":
                    cells.append(
                        PhaseCell(
                            E_z=float(E_z), J_min=float(J_min), J_max=float(J_min + dJ),
                            lambda0=rec.value, phi=None, e_g=None, label=None,
                            status="error", message=rec.message,
                        )
                    )
                    continue
                condensed = max(abs(p) for p in rec.phi) > thr.field
                field_phase = "superradiant" if condensed else "normal"
                mag = "undetermined"
                if magnetic:
                    modeset = ModeSet(
                        modes=modes, lambda0=rec.value, N=col_chain.N, E_c=col_chain.E_c
                    )
                    report = correlation_report(
                        col_chain, modeset, np.array(rec.phi), n_max=n_max
                    )
                    mag = classify_magnetic_order(report, col_chain, thr)
                cells.append(
                    PhaseCell(
                        E_z=float(E_z), J_min=float(J_min), J_max=float(J_min + dJ),
                        lambda0=rec.value, phi=rec.phi, e_g=rec.e_g,
                        label=PhaseLabel(field_phase, t_order, mag), status="ok",
                    )
                )

        col_group = [c for c in columns if c.E_z == float(E_z)]
        seconds = [c.J_min for c in col_group if c.transition_order == "second"]
        firsts = [c.J_min for c in col_group if c.transition_order == "first"]
        if seconds and firsts and max(seconds) < min(firsts):
            crossover.append((float(E_z), 0.5 * (max(seconds) + min(firsts))))
        else:
            crossover.append((float(E_z), None))

    return PhaseDiagram(cells=tuple(cells), columns=tuple(columns), crossover=tuple(crossover))
