"""Root sequences of Hankel quantisation conditions and the workflows built
on them: critical couplings, eigenvalue bounds, resonances and the
well-centred (non-symmetric) expansion.

Every workflow walks the determinant dimension ``D`` upward.  Roots at ``D``
are sought near the previous dimension's root (warm start), and precision is
carried along and escalated whenever two evaluations at ``bits`` and
``bits + 64`` disagree.
"""
from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import gmpy2
from gmpy2 import mpfr

from . import oracle
from .hankel import HankelEval, HankelSpec, assemble, determinant, determinant_with_gradient
from .numerics import PrecisionCtx, is_complex, table_decimal, truncate_decimal
from .riccati_series import (
    PotentialSpec,
    nonsym_coeffs,
    quartic_minimum,
    shift_potential,
    symmetric_coeffs,
)
from .rootfind import (
    Bracket,
    ConvergenceError,
    RootResult,
    newton_2d,
    newton_complex,
    refine_real,
    scan_real,
)

log = logging.getLogger(__name__)

__all__ = [
    "SolveConfig",
    "SequenceEntry",
    "RootSequence",
    "BoundReport",
    "TrustedEval",
    "escalate_precision",
    "critical_parameters",
    "critical_stream",
    "eigenvalue_bounds",
    "resonance",
    "nonsym_eigenvalue",
    "fit_convergence",
    "double_well",
    "CRITICAL_WINDOW",
    "RESONANCE_START",
    "PAIRINGS",
    "critical_evaluator",
    "energy_evaluator",
    "locate_real_root",
    "nonsym_system",
    "oracle_levels",
]

MODES = ("eigenvalue", "critical", "resonance", "nonsym")

# couplings searched unless the configuration says otherwise
CRITICAL_WINDOW = ("0.001", "1")


def double_well(g) -> PotentialSpec:
    """``V(x) = -x^2 + g x^4``."""
    return PotentialSpec(("-1", g))


@dataclass(frozen=True)
class SolveConfig:
    D_min: int = 2
    D_max: int = 30
    d_values: Tuple[int, ...] = (0, 1)
    initial_bits: int = 256
    scan_window: Optional[Tuple[object, object]] = None
    target_digits: int = 40
    potential: Optional[PotentialSpec] = None
    parity: int = 0
    mode: str = "eigenvalue"
    # nearest-neighbour tracking gate (relative)
    tracking_gate: float = 0.10
    # how far from the oracle estimate a sequence may open (relative)
    opening_gate: float = 0.25
    # escalation cap as a multiple of initial_bits
    precision_cap: int = 16
    # extra digits resolved beyond target_digits before truncation
    guard_digits: int = 12

    def __post_init__(self):
        if self.D_min < 2:
            raise ValueError("D_min must be >= 2")
        if self.D_max < self.D_min:
            raise ValueError("D_max must be >= D_min")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.parity not in (0, 1):
            raise ValueError("parity must be 0 or 1")
        if any(d < 0 for d in self.d_values):
            raise ValueError("d values must be >= 0")
        ctx = PrecisionCtx(self.initial_bits)
        if self.target_digits > ctx.decimal_digits - 10:
            raise ValueError("target digits must leave 10 guard digits at the initial precision")

    @property
    def tol(self) -> mpfr:
        with PrecisionCtx(max(self.initial_bits, 256)).active():
            return mpfr(10) ** -(self.target_digits + self.guard_digits)

    @property
    def max_bits(self) -> int:
        return self.initial_bits * self.precision_cap


@dataclass
class SequenceEntry:
    D: int
    d: int
    value: object
    precision_used: int
    residual: object = 0
    converged: bool = True
    trusted: bool = True
    oscillation: bool = False
    # second unknown of the well-centred problem (f0)
    extra: object = None


@dataclass
class RootSequence:
    d: int
    entries: Dict[int, SequenceEntry] = field(default_factory=dict)
    k: Optional[int] = None
    label: str = ""
    notes: List[str] = field(default_factory=list)

    @property
    def start(self) -> Optional[int]:
        return min(self.entries) if self.entries else None

    @property
    def dims(self) -> List[int]:
        return sorted(self.entries)

    def values(self) -> List[object]:
        return [self.entries[D].value for D in self.dims]

    def __getitem__(self, D):
        return self.entries[D].value

    def __contains__(self, D):
        return D in self.entries

    def last(self) -> Optional[SequenceEntry]:
        return self.entries[max(self.entries)] if self.entries else None

    def truncated(self, digits: int = 40, rounding: str = "round") -> Dict[int, str]:
        """Table strings of the real entries (see :func:`table_decimal`)."""
        return {D: table_decimal(e.value, digits, rounding) for D, e in sorted(self.entries.items())
                if not is_complex(e.value)}

    def converged_to(self, digits: int) -> Optional[str]:
        """The truncated value once three consecutive dimensions agree on it."""
        dims = self.dims
        for i in range(len(dims) - 2):
            trio = [truncate_decimal(_abs_real(self.entries[D].value), digits) for D in dims[i:i + 3]]
            if dims[i + 2] - dims[i] == 2 and trio[0] == trio[1] == trio[2]:
                return trio[0]
        return None


def _abs_real(v):
    return v.real if is_complex(v) else v


@dataclass
class BoundReport:
    k: int
    lower: RootSequence
    upper: RootSequence
    intervals: Dict[int, object] = field(default_factory=dict)
    fit: Optional[Tuple[float, float, float]] = None
    truncated_lower: Dict[int, str] = field(default_factory=dict)
    truncated_upper: Dict[int, str] = field(default_factory=dict)
    violations: List[int] = field(default_factory=list)

    @property
    def sequences(self) -> Dict[int, RootSequence]:
        return {self.lower.d: self.lower, self.upper.d: self.upper}

    @property
    def not_started(self) -> List[int]:
        return [seq.d for seq in (self.lower, self.upper) if not seq.entries]


def fit_convergence(widths: Dict[int, object], dims: Optional[Sequence[int]] = None):
    """Least-squares fit of ``log|width| = log A - alpha * D``.

    Returns ``(A, alpha, r_squared)``; ``None`` with fewer than 3 usable points.
    """
    pts = []
    for D in sorted(widths):
        if dims is not None and D not in dims:
            continue
        w = abs(widths[D])
        if w > 0:
            pts.append((D, float(gmpy2.log(mpfr(w)))))
    if len(pts) < 3:
        return None
    n = len(pts)
    mx = sum(p[0] for p in pts) / n
    my = sum(p[1] for p in pts) / n
    sxx = sum((p[0] - mx) ** 2 for p in pts)
    sxy = sum((p[0] - mx) * (p[1] - my) for p in pts)
    syy = sum((p[1] - my) ** 2 for p in pts)
    slope = sxy / sxx
    intercept = my - slope * mx
    r2 = (sxy * sxy) / (sxx * syy) if syy > 0 else 1.0
    return math.exp(intercept), -slope, r2


def _make_report(k: int, lower: RootSequence, upper: RootSequence, digits: int) -> BoundReport:
    rep = BoundReport(k=k, lower=lower, upper=upper)
    for D in sorted(set(lower.entries) & set(upper.entries)):
        lo, hi = lower[D], upper[D]
        rep.intervals[D] = hi - lo
        if hi < lo:
            rep.violations.append(D)
    rep.fit = fit_convergence(rep.intervals)
    rep.truncated_lower = lower.truncated(digits)
    rep.truncated_upper = upper.truncated(digits)
    return rep


# --------------------------------------------------------------------------
# precision control


@dataclass(frozen=True)
class TrustedEval:
    eval: HankelEval
    trusted: bool
    ctx: PrecisionCtx

    @property
    def value(self):
        return self.eval.value

    @property
    def sign(self):
        return self.eval.sign


def _agree(a, b) -> bool:
    va, vb = a.value, b.value
    if va == 0 and vb == 0:
        return True
    if va == 0 or vb == 0:
        return False
    if not is_complex(va) and (va > 0) != (vb > 0):
        return False
    with PrecisionCtx(max(a.precision_used, b.precision_used)).active():
        return abs(va - vb) <= abs(vb) * mpfr("1e-8")


def escalate_precision(evaluate: Callable[[object, PrecisionCtx], HankelEval], point,
                       ctx: PrecisionCtx, cap_bits: Optional[int] = None) -> TrustedEval:
    """Evaluate at ``bits`` and ``bits + 64``; double ``bits`` until they agree.

    Agreement means equal signs and relative difference below ``1e-8``.  The
    cap defaults to 16 times the starting precision; hitting it returns the
    last high-precision evaluation flagged untrusted.
    """
    cap_bits = cap_bits or ctx.bits * 16
    cur = ctx
    while True:
        lo = evaluate(point, cur)
        hi_ctx = cur.raised(64)
        hi = evaluate(point, hi_ctx)
        if _agree(lo, hi):
            return TrustedEval(hi, True, cur)
        if cur.bits * 2 > cap_bits:
            log.warning("precision cap %d reached without agreement", cap_bits)
            return TrustedEval(hi, False, cur)
        cur = cur.scaled(2)


# --------------------------------------------------------------------------
# determinant functions for each workflow


def _symmetric_eval(pot_for: Callable, s: int, energy_for: Callable, spec: HankelSpec,
                    param_index: Optional[int] = None):
    """Build ``evaluate(x, ctx[, grad])`` for a symmetric-series Hankel determinant."""

    def evaluate(x, ctx: PrecisionCtx, grad: bool = False):
        pot = pot_for(x, ctx)
        series = symmetric_coeffs(pot, s, energy_for(x, ctx), spec.max_index, ctx,
                                  param_index=param_index)
        mat = assemble(series, spec)
        if not grad:
            return determinant(mat, ctx)
        dsrc = series.dparam_coeffs if param_index is not None else series.dE_coeffs
        ev, (g,) = determinant_with_gradient(mat, [assemble(dsrc, spec)], ctx)
        return ev, g

    return evaluate


def critical_evaluator(D: int, d: int, s: int):
    """``g -> H_D^d(E=0, g)`` for ``V = -x^2 + g x^4``."""
    return _symmetric_eval(lambda g, ctx: double_well(ctx.real(g)), s,
                           lambda g, ctx: 0, HankelSpec(D, d), param_index=2)


def energy_evaluator(pot: PotentialSpec, D: int, d: int, s: int):
    """``E -> H_D^d(E)`` for a fixed potential."""
    return _symmetric_eval(lambda E, ctx: pot, s, lambda E, ctx: ctx.convert(E), HankelSpec(D, d))


# --------------------------------------------------------------------------
# real roots near a target


@dataclass
class _Found:
    result: RootResult
    ctx: PrecisionCtx
    trusted: bool


def _nearest(brackets: List[Bracket], target) -> Bracket:
    return min(brackets, key=lambda b: abs(b.mid - target))


def _multiplicity_scan(evaluate, lo, hi, target, ctx, steps=16):
    """Sign changes of ``H / H'`` (roots of any multiplicity), ignoring the poles
    that come from stationary points of ``H``."""

    def u(x):
        ev, g = evaluate(x, ctx, grad=True)
        if ev.value == 0:
            return mpfr(0)
        if g == 0:
            return mpfr("inf") if ev.value > 0 else mpfr("-inf")
        return ev.value / g

    with ctx.active():
        brs = scan_real(u, lo, hi, steps)
        good = []
        for b in brs:
            if b.f_lo_sign == 0 and b.f_hi_sign == 0:
                good.append(b)
                continue
            if abs(u(b.lo)) <= 2 * b.width and abs(u(b.hi)) <= 2 * b.width:
                good.append(b)
        return good, u


def locate_real_root(evaluate, target, w0, lo_limit, hi_limit, ctx: PrecisionCtx, tol,
                     cap_bits: int, allow_multiple: bool = True) -> Optional[_Found]:
    """Root of ``evaluate`` nearest ``target`` inside ``[lo_limit, hi_limit]``.

    Windows ``target +- w`` grow by 4x from ``w0``; the first window with a
    sign change wins and its bracket nearest the target is subdivided 16-fold
    before refinement.  The root is verified by trusted evaluations at
    ``root +- tol * |root|`` (or the refined bracket ends, if wider); on disagreement precision is doubled and the search
    repeats around the provisional root.
    """
    while True:
        with ctx.active():
            target = ctx.real(target)
            w = ctx.real(w0)
            chosen = None
            use_u = False
            f_scan = lambda x: evaluate(x, ctx)
            while True:
                lo = max(target - w, lo_limit)
                hi = min(target + w, hi_limit)
                brs = scan_real(f_scan, lo, hi, 16)
                if brs:
                    chosen = _nearest(brs, target)
                    break
                if lo <= lo_limit and hi >= hi_limit:
                    break
                w *= 4
            if chosen is None and allow_multiple:
                brs, _ = _multiplicity_scan(evaluate, max(target - w, lo_limit),
                                            min(target + w, hi_limit), target, ctx)
                if brs:
                    chosen = _nearest(brs, target)
                    use_u = True
            if chosen is None:
                return None
            if use_u:
                _, u = _multiplicity_scan(evaluate, chosen.lo, chosen.hi, target, ctx, steps=2)
                fval = u
            else:
                fval = lambda x: evaluate(x, ctx).value
                if not (chosen.f_lo_sign == 0 and chosen.f_hi_sign == 0):
                    sub = scan_real(f_scan, chosen.lo, chosen.hi, 16)
                    if sub:
                        chosen = _nearest(sub, target)
            res = refine_real(fval, chosen, tol, ctx)
        # verification at bits and bits + 64
        exact = chosen.f_lo_sign == 0 and chosen.f_hi_sign == 0
        if res.bracket is None or use_u or exact:
            return _Found(res, ctx, True)
        with ctx.active():
            # the refined bracket may be far narrower than tol; verify on a tol-wide one
            half = max(abs(res.value) * tol, res.bracket.width / 2)
            probe = (min(res.bracket.lo, res.value - half), max(res.bracket.hi, res.value + half))
        ends = [escalate_precision(evaluate, x, ctx, cap_bits) for x in probe]
        if all(e.trusted for e in ends) and ends[0].sign * ends[1].sign < 0:
            used = max(e.ctx.bits for e in ends)
            if used > ctx.bits:
                # the working precision was too low near the root; redo at the trusted level
                ctx = PrecisionCtx(used)
                target, w0 = res.value, abs(res.value) * tol * 1000
                continue
            return _Found(res, ctx, True)
        if ctx.bits * 2 > cap_bits:
            return _Found(res, ctx, False)
        ctx = ctx.scaled(2)
        target, w0 = res.value, abs(res.value) * tol * 1000


# --------------------------------------------------------------------------
# bound sequences tracked across D


@dataclass
class _Ladder:
    """Oracle estimates for the states sharing one parity stream."""
    target: float
    neighbours: Tuple[float, ...]
    # length that relative gates refer to; defaults to |target|
    scale: Optional[float] = None

    @property
    def size(self) -> float:
        return self.scale if self.scale is not None else abs(self.target)

    def voronoi(self) -> Tuple[float, float]:
        """Interval of points closer (in log distance for positive values,
        linear distance otherwise) to ``target`` than to any neighbour."""
        lo, hi = -math.inf, math.inf
        for n in self.neighbours:
            if self.target > 0 and n > 0:
                mid = math.sqrt(self.target * n)
            else:
                mid = (self.target + n) / 2
            if n > self.target:
                hi = min(hi, mid)
            elif n < self.target:
                lo = max(lo, mid)
        return lo, hi


# window (relative) in which both columns must show a root for a state to exist
_EXISTENCE_WINDOW = 0.40
# points of the existence scan
_EXISTENCE_POINTS = 200
# opposite-side slack (relative) allowing for the oracle's own error
_SIDE_SLACK = 1e-6


class _BoundTracker:
    """Tracks the ``d`` columns of one state through increasing ``D``.

    A state opens at the first ``D`` where every column has a root in the
    existence window around the oracle estimate, on its own side of the
    estimate and closer to it than to the neighbouring states' estimates.
    A column's first entry must in addition lie within ``opening_gate``.
    Afterwards each column follows the root nearest its previous value,
    within ``max(tracking_gate * |prev|, 1.5 * |prev - estimate|)``.
    """

    def __init__(self, evaluator_for: Callable[[int, int], Callable], ladder: _Ladder,
                 sides: Dict[int, int], cfg: SolveConfig, label: str = ""):
        self.evaluator_for = evaluator_for
        self.ladder = ladder
        self.sides = sides
        self.cfg = cfg
        self.label = label
        self.sequences = {d: RootSequence(d=d, label=label) for d in sides}
        self.ctx = {d: PrecisionCtx(cfg.initial_bits) for d in sides}
        self.exists = False
        self.tol = cfg.tol

    # side-restricted, Voronoi-restricted interval for column d
    def _allowed(self, d: int, rel: float) -> Tuple[float, float]:
        g = self.ladder.target
        a = self.ladder.size
        vlo, vhi = self.ladder.voronoi()
        slack = _SIDE_SLACK * a
        if self.sides[d] > 0:
            lo, hi = g - slack, g + rel * a
        else:
            lo, hi = g - rel * a, g + slack
        lo, hi = max(lo, vlo), min(hi, vhi)
        if self.cfg.scan_window is not None:
            w_lo, w_hi = (float(gmpy2.mpfr(str(w))) for w in self.cfg.scan_window)
            lo, hi = max(lo, w_lo), min(hi, w_hi)
        return lo, hi

    def _has_candidate(self, D: int, d: int) -> bool:
        lo, hi = self._allowed(d, _EXISTENCE_WINDOW)
        if not lo < hi:
            return False
        ev = self.evaluator_for(D, d)
        ctx = self.ctx[d]
        with ctx.active():
            brs = scan_real(lambda x: ev(x, ctx), ctx.real(lo), ctx.real(hi), _EXISTENCE_POINTS)
        if brs:
            return True
        # roots of even multiplicity show no sign change
        brs, _ = _multiplicity_scan(ev, ctx.real(lo), ctx.real(hi), self.ladder.target, ctx, steps=32)
        return bool(brs)

    def _record(self, D: int, d: int, found: _Found):
        res = found.result
        self.ctx[d] = found.ctx
        self.sequences[d].entries[D] = SequenceEntry(
            D=D, d=d, value=res.value, precision_used=found.ctx.bits, residual=res.residual,
            converged=res.converged, trusted=found.trusted)

    def _open_column(self, D: int, d: int) -> bool:
        lo, hi = self._allowed(d, self.cfg.opening_gate)
        if not lo < hi:
            return False
        g = self.ladder.target
        found = locate_real_root(self.evaluator_for(D, d), g, self.ladder.size * 1e-3, lo, hi,
                                 self.ctx[d], self.tol, self.cfg.max_bits)
        if found is None:
            return False
        self._record(D, d, found)
        return True

    def _track_column(self, D: int, d: int) -> bool:
        seq = self.sequences[d]
        dims = seq.dims
        prev = seq.entries[dims[-1]].value
        g = self.ladder.target
        gate = max(self.cfg.tracking_gate * abs(prev), 1.5 * abs(prev - g))
        if len(dims) >= 2:
            w0 = abs(prev - seq.entries[dims[-2]].value)
        else:
            w0 = abs(prev - g)
        w0 = min(max(w0, abs(prev) * self.tol * 1e6), gate)
        found = locate_real_root(self.evaluator_for(D, d), prev, w0, prev - gate, prev + gate,
                                 self.ctx[d], self.tol, self.cfg.max_bits)
        if found is None:
            seq.notes.append(f"lost at D={D}: no root within the tracking gate")
            return False
        self._record(D, d, found)
        return True

    def step(self, D: int):
        if not self.exists:
            if all(self._has_candidate(D, d) for d in self.sides):
                self.exists = True
            else:
                return
        for d in self.sides:
            seq = self.sequences[d]
            if seq.entries:
                if seq.last().D == D - 1:
                    self._track_column(D, d)
            else:
                self._open_column(D, d)

    def run(self, dims: Sequence[int]):
        for D in dims:
            self.step(D)
            log.info("%s D=%d %s", self.label, D,
                     {d: (truncate_decimal(s.entries[D].value, 12) if D in s else None)
                      for d, s in self.sequences.items()})
        return self.sequences


# --------------------------------------------------------------------------
# critical parameters


@functools.lru_cache(maxsize=None)
def _critical_estimate(k: int) -> float:
    return oracle.critical_estimate(k)


def critical_stream(k: int, cfg: SolveConfig, estimate: Optional[float] = None) -> BoundReport:
    """Upper (``d=0``) and lower (``d=1``) bounds for the critical coupling ``g_k``.

    ``g_k`` is the coupling of ``V = -x^2 + g x^4`` at which the ``k``-th level
    sits at ``E = 0``.  The oracle estimate seeds and labels the sequences;
    the values themselves come from the Hankel roots alone.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    s = k % 2
    if cfg.scan_window is None:
        cfg = replace(cfg, scan_window=CRITICAL_WINDOW)
    g = estimate if estimate is not None else _critical_estimate(k)
    neighbours = tuple(_critical_estimate(j) for j in (k - 2, k + 2) if j >= 0)
    ladder = _Ladder(g, neighbours)
    tracker = _BoundTracker(lambda D, d: critical_evaluator(D, d, s), ladder,
                            {d: (1 if d % 2 == 0 else -1) for d in cfg.d_values}, cfg,
                            label=f"g_{k}")
    seqs = tracker.run(range(cfg.D_min, cfg.D_max + 1))
    for seq in seqs.values():
        seq.k = k
    d_lo, d_hi = _bound_pair(cfg.d_values)
    return _make_report(k, seqs[d_hi], seqs[d_lo], cfg.target_digits)


def _bound_pair(d_values):
    ds = sorted(d_values)
    if len(ds) < 2:
        return ds[0], ds[0]
    return ds[0], ds[1]


def critical_parameters(ks: Sequence[int], cfg: SolveConfig) -> Dict[int, BoundReport]:
    """:func:`critical_stream` for every ``k`` in ``ks``."""
    return {k: critical_stream(k, cfg) for k in ks}


# --------------------------------------------------------------------------
# eigenvalue bounds


def oracle_levels(pot: PotentialSpec, count: int) -> List[float]:
    """Lowest ``count`` grid-oracle levels of ``pot`` (hardware floats)."""
    coeffs = [float(gmpy2.mpfr(str(c))) for c in pot.even_coeffs]
    V = oracle.polynomial_potential(coeffs)
    grid = oracle.default_grid(V, count)
    return [float(e) for e in oracle.grid_eigenvalues(V, grid, count)]


def eigenvalue_bounds(pot: PotentialSpec, k: int, cfg: SolveConfig,
                      estimate: Optional[float] = None,
                      sides: Optional[Dict[int, int]] = None) -> BoundReport:
    """Bounds on the ``k``-th level of ``pot`` from the ``d`` columns.

    Sequences are seeded by the grid oracle (or ``estimate``).  By default
    the first column (``d=0``) is expected below the level and the second
    above it; that expectation is only used to open the sequences.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    s = k % 2
    levels = oracle_levels(pot, k + 3)
    E = estimate if estimate is not None else levels[k]
    same = tuple(levels[j] for j in range(s, len(levels), 2) if j != k)
    gaps = [abs(levels[j] - levels[k]) for j in range(len(levels)) if j != k]
    scale = max(abs(E), min(gaps)) if gaps else abs(E) or 1.0
    ladder = _Ladder(E, same, scale)
    d_lo, d_hi = _bound_pair(cfg.d_values)
    if sides is None:
        sides = {d: (-1 if d == d_lo else 1) for d in cfg.d_values}
    tracker = _BoundTracker(lambda D, d: energy_evaluator(pot, D, d, s), ladder, sides, cfg,
                            label=f"E_{k}")
    seqs = tracker.run(range(cfg.D_min, cfg.D_max + 1))
    for seq in seqs.values():
        seq.k = k
    return _make_report(k, seqs[d_lo], seqs[d_hi], cfg.target_digits)


# --------------------------------------------------------------------------
# resonances


RESONANCE_START = complex(0.9, -0.007)


def _energy_newton_fn(pot: PotentialSpec, D: int, d: int, s: int, ctx: PrecisionCtx):
    ev = energy_evaluator(pot, D, d, s)

    def fn(z):
        h, g = ev(z, ctx, grad=True)
        return h.value, g

    return fn


def _complex_close(a, b, tol) -> bool:
    return abs(a - b) <= tol * abs(b)


def resonance(pot: PotentialSpec, s: int, start, cfg: SolveConfig) -> Dict[int, RootSequence]:
    """Complex roots of ``H_D^d(E)`` for each ``d``, warm-started across ``D``.

    Each root is found by damped Newton with the analytic ``dH/dE`` and then
    repeated from the result at ``bits + 64``; disagreement doubles the
    precision.  No bound ordering is implied for complex roots.
    """
    out = {}
    tol = cfg.tol
    for d in cfg.d_values:
        seq = RootSequence(d=d, label=f"resonance s={s}")
        ctx = PrecisionCtx(cfg.initial_bits)
        z0 = ctx.convert(start)
        for D in range(cfg.D_min, cfg.D_max + 1):
            trusted = False
            res = None
            while True:
                try:
                    res = newton_complex(_energy_newton_fn(pot, D, d, s, ctx), "joint",
                                         ctx.convert(z0), tol, ctx)
                    hi_ctx = ctx.raised(64)
                    chk = newton_complex(_energy_newton_fn(pot, D, d, s, hi_ctx), "joint",
                                         hi_ctx.convert(res.value), tol, hi_ctx)
                except ConvergenceError as exc:
                    seq.notes.append(f"D={D}: {exc}")
                    res = None
                    break
                with hi_ctx.active():
                    ok = _complex_close(res.value, chk.value, tol * 100)
                if ok:
                    trusted = True
                    res = chk
                    break
                if ctx.bits * 2 > cfg.max_bits:
                    res = chk
                    break
                ctx = ctx.scaled(2)
            if res is None:
                continue
            seq.entries[D] = SequenceEntry(D=D, d=d, value=res.value, precision_used=ctx.bits,
                                           residual=res.residual, converged=res.converged,
                                           trusted=trusted)
            z0 = res.value
        out[d] = seq
    return out


# --------------------------------------------------------------------------
# well-centred (non-symmetric) expansion

PAIRINGS = ("offset", "dimension")
_NONSYM_ITER = 60


def _pair_specs(D: int, d: int, pairing: str) -> Tuple[HankelSpec, HankelSpec]:
    if pairing == "offset":
        return HankelSpec(D, d), HankelSpec(D, d + 1)
    if pairing == "dimension":
        return HankelSpec(D, d), HankelSpec(D + 1, d)
    raise ValueError(f"pairing must be one of {PAIRINGS}")


def nonsym_system(shifted, D: int, d: int, pairing: str, ctx: PrecisionCtx):
    """``(E, f0) -> ((H_a, H_b), jacobian)`` for the two Hankel conditions."""
    spec_a, spec_b = _pair_specs(D, d, pairing)
    nmax = max(spec_a.max_index, spec_b.max_index)

    def F(E, f0):
        series = nonsym_coeffs(shifted, E, f0, nmax, ctx)
        rows = []
        vals = []
        for spec in (spec_a, spec_b):
            ev, (gE, gf) = determinant_with_gradient(
                assemble(series.coeffs, spec),
                [assemble(series.dE_coeffs, spec), assemble(series.df0_coeffs, spec)], ctx)
            vals.append(ev.value)
            rows.append((gE, gf))
        return (vals[0], vals[1]), (rows[0], rows[1])

    return F


def _nonsym_seed_f0(shifted, D: int, d: int, E, ctx: PrecisionCtx):
    """Root in ``f0`` of the first condition at fixed ``E``, nearest zero."""
    spec = HankelSpec(D, d)

    def h(f0):
        return determinant(assemble(nonsym_coeffs(shifted, E, f0, spec.max_index, ctx).coeffs, spec),
                           ctx)

    with ctx.active():
        for w in (0.5, 2, 8):
            brs = scan_real(h, ctx.real(-w), ctx.real(w), 400)
            if brs:
                b = min(brs, key=lambda b: abs(b.mid))
                return refine_real(lambda x: h(x).value, b, mpfr("1e-20"), ctx).value
    return ctx.real(0)


def nonsym_eigenvalue(pot: PotentialSpec, cfg: SolveConfig, pairing: str = "offset",
                      x_m=None, start: Optional[Tuple[object, object]] = None) -> Dict[int, RootSequence]:
    """``(E, f0)`` sequences from the expansion about a minimum ``x_m`` of ``pot``.

    Two Hankel conditions fix the energy and ``f0 = f(x_m)``: ``H_D^d`` with
    ``H_D^{d+1}`` (``pairing="offset"``) or with ``H_{D+1}^d``
    (``pairing="dimension"``).  Each dimension is solved by two-dimensional
    Newton warm-started from the previous one and repeated at ``bits + 64``
    to confirm the digits.  Iterations that cycle are kept, flagged with
    ``oscillation=True``.
    """
    if pairing not in PAIRINGS:
        raise ValueError(f"pairing must be one of {PAIRINGS}")
    ctx0 = PrecisionCtx(cfg.initial_bits)
    if x_m is None:
        x_m = quartic_minimum(pot, ctx0)
    tol = cfg.tol
    out = {}
    # later streams start where the first one started
    shared = None
    for d in cfg.d_values:
        seq = RootSequence(d=d, label=f"nonsym {pairing}")
        ctx = ctx0
        if start is not None:
            guess = (ctx.real(start[0]), ctx.real(start[1]))
        elif shared is not None:
            guess = shared
        else:
            levels = oracle_levels(pot, 2)
            E0 = ctx.real((levels[0] + levels[1]) / 2)
            shifted = shift_potential(pot, x_m, ctx)
            guess = (E0, _nonsym_seed_f0(shifted, cfg.D_min, d, E0, ctx))
        for D in range(cfg.D_min, cfg.D_max + 1):
            res = chk = None
            trusted = False
            while True:
                shifted = shift_potential(pot, x_m, ctx)
                hi_ctx = ctx.raised(64)
                try:
                    res = newton_2d(nonsym_system(shifted, D, d, pairing, ctx),
                                    (ctx.real(guess[0]), ctx.real(guess[1])), tol, ctx,
                                    jacobian="joint", max_iter=_NONSYM_ITER)
                    chk = newton_2d(nonsym_system(shift_potential(pot, x_m, hi_ctx), D, d, pairing, hi_ctx),
                                    (hi_ctx.real(res.value[0]), hi_ctx.real(res.value[1])), tol,
                                    hi_ctx, jacobian="joint", max_iter=_NONSYM_ITER)
                except ConvergenceError as exc:
                    seq.notes.append(f"D={D}: {exc}")
                    res = None
                    break
                # more bits do not help a run that cycles or stalls
                if res.oscillation or not res.converged:
                    break
                with hi_ctx.active():
                    ok = all(abs(a - b) <= 100 * tol * max(abs(b), 1)
                             for a, b in zip(res.value, chk.value))
                if ok:
                    trusted = True
                    break
                if ctx.bits * 2 > cfg.max_bits:
                    break
                ctx = ctx.scaled(2)
            if res is None:
                continue
            if not res.converged:
                seq.notes.append(f"D={D}: " + "; ".join(res.notes))
            final = chk if (trusted and chk is not None) else res
            E, f0 = final.value
            seq.entries[D] = SequenceEntry(D=D, d=d, value=E, extra=f0, precision_used=ctx.bits,
                                           residual=final.residual, converged=final.converged,
                                           trusted=trusted, oscillation=res.oscillation)
            if not res.oscillation:
                guess = (E, f0)
                if shared is None:
                    shared = guess
        out[d] = seq
    return out
