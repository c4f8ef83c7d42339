"""Executable checks of flow identities.

Every check pulls coordinates through both sides of an identity and reports
the worst discrepancy.  Symbolic comparisons (nonzero-degree flows) hold when
all coefficients agree pointwise within ``zero_tol``.  Numeric comparisons
(degree-zero flows) use relative discrepancies |a-b| / (1 + max(|a|, |b|))
and a two-threshold verdict: below ``pass_threshold`` holds, above
``fail_threshold`` fails, anything between is indeterminate.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .config import DEFAULT
from .errors import DegreeMismatch, SignatureMismatch
from .flow_nonzero import NonzeroFlow, flow_nonzero, time_coordinate
from .flow_zero import (
    FlowJet,
    integrate_underlying,
    reseed,
    solve_pivotal,
)
from .graded import GradedFunction, embed
from .gradedmap import GradedMap, related_deviation, section_at, times_identity
from .jets import PullbackEvaluator
from .sampling import box_samples, unit_samples
from .vectorfield import apply, apply_power, bracket, partial, underlying_vector_field

HOLDS, FAILS, INDETERMINATE = "holds", "fails", "indeterminate"


@dataclass
class CheckResult:
    name: str
    mode: str  # "symbolic" or "numeric"
    deviation: float
    verdict: str
    location: dict = None

    @property
    def holds(self):
        return self.verdict == HOLDS

    def to_dict(self):
        return asdict(self)


def numeric_verdict(dev, config):
    if dev < config.pass_threshold:
        return HOLDS
    if dev > config.fail_threshold:
        return FAILS
    return INDETERMINATE


def symbolic_verdict(dev, config):
    return HOLDS if dev <= config.zero_tol else FAILS


def relative_discrepancy(a, b):
    return abs(a - b) / (1.0 + max(abs(a), abs(b)))


def _plain(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_plain(x) for x in v]
    return v


class _Worst:
    """Running maximum with the location where it occurred."""

    def __init__(self):
        self.value = 0.0
        self.where = None

    def update(self, value, **where):
        if self.where is None or value > self.value:
            self.value = float(value)
            self.where = {k: _plain(v) for k, v in where.items()}

    def merge(self, other):
        if other.where is not None:
            self.update(other.value, **other.where)


def _symbolic_compare(worst, lhs, rhs, max_weight, config, **where):
    from .sampling import base_points

    pts = base_points(lhs.sample_names(rhs), config)
    keys = sorted(set(lhs.terms) | set(rhs.terms))
    for p in keys:
        if lhs.sig.cap_weight(p) > max_weight:
            continue
        a = GradedFunction(lhs.sig, lhs.degree, {p: lhs.coefficient(p)}, lhs.cap, check=False)
        b = GradedFunction(rhs.sig, rhs.degree, {p: rhs.coefficient(p)}, rhs.cap, check=False)
        d = a.max_deviation(b, pts)
        worst.update(d, multiindex=lhs.sig.format_index(p), **where)
    if worst.where is None:
        worst.update(0.0, **where)


def _numeric_compare(worst, sig, a, b, max_weight, **where):
    """Compare ``{p: value}`` maps over weights <= max_weight."""
    for p in sorted(set(a) | set(b)):
        if sum(p) > max_weight:
            continue
        d = relative_discrepancy(a.get(p, 0.0), b.get(p, 0.0))
        worst.update(d, multiindex=sig.format_index(p), **where)
    if worst.where is None:
        worst.update(0.0, **where)


def sample_base_points(sig, config, n=None):
    """Configured base points, or low-discrepancy points in the sampling box."""
    if config.base_points:
        return [np.atleast_1d(np.asarray(p, dtype=float)) for p in config.base_points]
    n = config.samples if n is None else n
    if sig.n0 == 0:
        return [np.zeros(0)]
    return list(box_samples(sig.n0, n, config.sample_low, config.sample_high, config.seed + 1))


def _sample_times(lo, hi, n, config, salt=0):
    u = unit_samples(1, n, config.seed + 7 + salt)[:, 0]
    a, b = config.t_range * lo, config.t_range * hi
    return [float(a + (b - a) * x) for x in u]


# ---------------------------------------------------------------------------
# numeric helpers on jets


def numeric_apply(alg, Y, g, m, cache=None):
    """(Y⊗1)(g) for a jet g at base point m; valid to one δ-order less than g."""
    if Y.sig != alg.sig:
        raise SignatureMismatch("field does not live on the jet signature")
    cache = {} if cache is None else cache
    sig = alg.sig
    out = alg.zero(Y.degree + g.degree)
    for name, comp in Y.components.items():
        if comp.is_literal_zero:
            continue
        key = name
        if key not in cache:
            cache[key] = alg.from_function(comp.with_cap(alg.cap), m)
        if sig.is_base(name):
            d = alg.delta_partial(sig.base.index(name), g)
        else:
            d = alg.graded_partial(name, g)
        prod = alg.mul(cache[key], d)
        out = alg.add(out, prod)
    return out


def _flow_pullback(fj, functions, t):
    ev = PullbackEvaluator(fj.alg, fj.target, [f.with_cap(fj.alg.cap) for f in functions])
    return ev(fj.jets(t))


def _tight_solve(X, m, config, order=0, span=None, initial=None):
    span = (-config.t_max, config.t_max) if span is None else span
    return solve_pivotal(X, m, span, config.tight(), order=order, initial=initial, allow_partial=True)


# ---------------------------------------------------------------------------
# flow axioms


@dataclass
class AxiomsReport:
    checks: list

    @property
    def passed(self):
        return all(c.holds for c in self.checks)

    @property
    def failures(self):
        return [c for c in self.checks if not c.holds]

    def verdict(self):
        vs = {c.verdict for c in self.checks}
        if FAILS in vs:
            return FAILS
        if INDETERMINATE in vs:
            return INDETERMINATE
        return HOLDS

    def to_dict(self):
        return {"verdict": self.verdict(), "checks": [c.to_dict() for c in self.checks]}


def group_law_maps(flow, rho="rho", sigma="sigma"):
    """Both sides of θ(m, ρ + σ) = θ(θ(m, ρ), σ) as pullbacks on M × R[-k]²."""
    M = flow.base_sig
    k = flow.degree
    cap = flow.cap
    P2 = M.extend(time_coordinate(k, rho), time_coordinate(k, sigma))
    Ms = M.extend(time_coordinate(k, sigma))
    # τ ↦ ρ + σ
    pb = {n: GradedFunction.coordinate(P2, n, cap) for n in M.names}
    pb[flow.tau] = GradedFunction.coordinate(P2, rho, cap).add(GradedFunction.coordinate(P2, sigma, cap))
    add = GradedMap(P2, flow.sig, pb, cap)
    # (m, ρ, σ) ↦ (θ(m, ρ), σ)
    theta_rho = flow.on(P2, rho)
    pb = dict(theta_rho.pullbacks)
    pb[sigma] = GradedFunction.coordinate(P2, sigma, cap)
    step = GradedMap(P2, Ms, pb, cap)
    theta_sigma = flow.on(Ms, sigma)
    lhs = {n: add.pullback(flow.pullbacks[n]) for n in M.names}
    rhs = {n: step.pullback(theta_sigma.pullbacks[n]) for n in M.names}
    return lhs, rhs


def _axioms_symbolic(flow, config):
    M = flow.base_sig
    w = flow.reliable_weight
    checks = []
    # zero section
    s0 = section_at(flow.sig, M, flow.tau, 0.0, flow.cap)
    worst = _Worst()
    for n in M.names:
        lhs = s0.pullback(flow.pullbacks[n])
        rhs = GradedFunction.coordinate(M, n, flow.cap)
        _symbolic_compare(worst, lhs, rhs, w, config, coordinate=n)
    checks.append(CheckResult("zero-section", "symbolic", worst.value, symbolic_verdict(worst.value, config), worst.where))
    # group law
    lhs, rhs = group_law_maps(flow)
    worst = _Worst()
    for n in M.names:
        _symbolic_compare(worst, lhs[n], rhs[n], w - flow.X.weight_drop(), config, coordinate=n)
    checks.append(CheckResult("group-law", "symbolic", worst.value, symbolic_verdict(worst.value, config), worst.where))
    # generator relation
    worst = _Worst()
    for n in M.names:
        lhs = partial(flow.tau, flow.pullbacks[n])
        rhs = flow.pullback(flow.X.components[n])
        _symbolic_compare(worst, lhs, rhs, w, config, coordinate=n)
    checks.append(CheckResult("generator", "symbolic", worst.value, symbolic_verdict(worst.value, config), worst.where))
    return AxiomsReport(checks)


def _jet_values(fj, jets):
    return {n: fj.alg.at_base(j) for n, j in jets.items()}


def _compare_jet_dicts(worst, fj, a, b, **where):
    for n in fj.target.names:
        _numeric_compare(worst, fj.source, a[n], b[n], fj.alg.cap, coordinate=n, **where)


def _axioms_numeric(fj, config):
    X = fj.X
    cfg = config.tight()
    base = solve_pivotal(X, fj.x0, fj.t_range, cfg, fj.order, fj.initial, fj.source, True, fj.alg.cap)
    lo, hi = base.t_range
    checks = []
    init = _jet_values(base, {n: j for n, j in base.split(base.state(0.0)).items()})
    # zero section: the jet at t = 0 is the initial map
    from .flow_zero import initial_jets

    seed = initial_jets(base.alg, base.target, np.array(base.x0), base.initial)
    worst = _Worst()
    _compare_jet_dicts(worst, base, init, _jet_values(base, seed), t=0.0)
    checks.append(CheckResult("zero-section", "numeric", worst.value, numeric_verdict(worst.value, config), worst.where))
    # group law: jet at s + t against reseeding at s and flowing for t
    worst = _Worst()
    u = unit_samples(2, config.samples, config.seed + 3)
    for a, b in u:
        s = config.t_range * (lo + (hi - lo) * a) / 2
        t = config.t_range * (lo + (hi - lo) * b) / 2
        if not (lo <= s + t <= hi):
            continue
        re = reseed(base, s, t_span=(min(0.0, t), max(0.0, t)), config=cfg, allow_partial=True)
        if not (re.t_range[0] <= t <= re.t_range[1]):
            continue
        _compare_jet_dicts(worst, base, _jet_values(base, base.jets(s + t)), _jet_values(base, re.jets(t)), s=s, t=t)
    checks.append(CheckResult("group-law", "numeric", worst.value, numeric_verdict(worst.value, config), worst.where))
    # generator relation: finite-difference rate against θ*(X^λ)
    worst = _Worst()
    h = config.fd_step
    for t in _sample_times(lo + 2 * h, hi - 2 * h, config.samples, config):
        fd = (-base.state(t + 2 * h) + 8 * base.state(t + h) - 8 * base.state(t - h) + base.state(t - 2 * h)) / (12 * h)
        rate = base.rate(base.state(t))
        a = _jet_values(base, base.split(fd))
        b = _jet_values(base, base.split(rate))
        _compare_jet_dicts(worst, base, a, b, t=t)
    checks.append(CheckResult("generator", "numeric", worst.value, numeric_verdict(worst.value, config), worst.where))
    # inverse: θ_(-t) after θ_(t) returns the initial map
    worst = _Worst()
    for t in _sample_times(lo, hi, config.samples, config, salt=1):
        re = reseed(base, t, t_span=(min(0.0, -t), max(0.0, -t)), config=cfg, allow_partial=True)
        if not (re.t_range[0] <= -t <= re.t_range[1]):
            continue
        _compare_jet_dicts(worst, base, _jet_values(base, re.jets(-t)), init, t=t)
    checks.append(CheckResult("inverse", "numeric", worst.value, numeric_verdict(worst.value, config), worst.where))
    return AxiomsReport(checks)


def check_flow_axioms(flow, config=DEFAULT):
    """Zero-section law, group law and generator relation (plus the inverse for degree 0)."""
    if isinstance(flow, NonzeroFlow):
        return _axioms_symbolic(flow, config)
    if isinstance(flow, FlowJet):
        return _axioms_numeric(flow, config)
    raise TypeError("expected a NonzeroFlow or a FlowJet")


# ---------------------------------------------------------------------------
# invariance


@dataclass
class InvarianceReport:
    check: CheckResult
    bracket_zero: bool

    @property
    def invariant(self):
        return self.check.holds

    @property
    def consistent(self):
        return self.check.verdict != INDETERMINATE and self.invariant == self.bracket_zero

    def to_dict(self):
        return {
            "invariant": self.invariant,
            "verdict": self.check.verdict,
            "bracket_zero": self.bracket_zero,
            "consistent": self.consistent,
            "check": self.check.to_dict(),
        }


def _bracket_zero(X, Y, config):
    return bracket(X, Y).is_zero(config)


def check_invariance(X, Y, config=DEFAULT):
    """Is Y invariant under the flow of X, i.e. (Y⊗1)∘θ* = θ*∘Y?"""
    if X.sig != Y.sig:
        raise SignatureMismatch("fields live on different signatures")
    bz = _bracket_zero(X, Y, config)
    if X.degree != 0:
        flow = flow_nonzero(X, config)
        Yx = Y.extended(flow.sig)
        w = flow.reliable_weight - Y.weight_drop()
        worst = _Worst()
        for n in X.sig.names:
            lhs = apply(Yx, flow.pullbacks[n])
            rhs = flow.pullback(Y.components[n])
            _symbolic_compare(worst, lhs, rhs, w, config, coordinate=n)
        chk = CheckResult("invariance", "symbolic", worst.value, symbolic_verdict(worst.value, config), worst.where)
        return InvarianceReport(chk, bz)
    worst = _Worst()
    w = config.weight_cap - Y.weight_drop()
    for m in sample_base_points(X.sig, config):
        fj = _tight_solve(X, m, config, order=1)
        lo, hi = fj.t_range
        cache = {}
        for t in _sample_times(lo, hi, config.samples, config):
            jets = fj.jets(t)
            ys = _flow_pullback(fj, [Y.components[n] for n in X.sig.names], t)
            for n, rhs in zip(X.sig.names, ys):
                lhs = numeric_apply(fj.alg, Y, jets[n], m, cache)
                _numeric_compare(
                    worst, X.sig, fj.alg.at_base(lhs), fj.alg.at_base(rhs), w,
                    coordinate=n, point=[float(v) for v in m], t=t,
                )
    chk = CheckResult("invariance", "numeric", worst.value, numeric_verdict(worst.value, config), worst.where)
    return InvarianceReport(chk, bz)


# ---------------------------------------------------------------------------
# commuting domains


@dataclass
class CommutingDomainEstimate:
    """Membership grids over (s, t) for one base point."""

    point: tuple
    s_grid: np.ndarray
    t_grid: np.ndarray
    d1: np.ndarray  # D'_1
    d2: np.ndarray  # σ^{-1}(D'_2)
    maximal: np.ndarray

    def member(self, i, j):
        return bool(self.maximal[i, j])

    def flipped(self):
        return CommutingDomainEstimate(
            self.point, self.t_grid, self.s_grid, self.d2.T.copy(), self.d1.T.copy(), self.maximal.T.copy()
        )

    @property
    def origin(self):
        return int(np.argmin(np.abs(self.s_grid))), int(np.argmin(np.abs(self.t_grid)))

    def is_rectangle_closed(self, mask=None):
        mask = self.maximal if mask is None else mask
        return np.array_equal(rectangle_hull(mask, *self.origin), mask)

    def union(self, other):
        return rectangle_hull(self.maximal | other.maximal, *self.origin)

    def intersection(self, other):
        return rectangle_hull(self.maximal & other.maximal, *self.origin)

    def is_proper(self):
        return not bool(self.maximal.all())

    def to_dict(self):
        return {
            "point": list(self.point),
            "s_grid": self.s_grid.tolist(),
            "t_grid": self.t_grid.tolist(),
            "maximal": self.maximal.astype(int).tolist(),
        }


def rectangle_hull(mask, i0, j0):
    """Largest subset of ``mask`` containing, with each member, its rectangle to (i0, j0)."""
    mask = np.asarray(mask, dtype=bool)
    out = np.zeros_like(mask)
    if not mask[i0, j0]:
        return out
    ns, nt = mask.shape
    for di in (1, -1):
        for dj in (1, -1):
            irange = range(i0, ns) if di > 0 else range(i0, -1, -1)
            for i in irange:
                jrange = range(j0, nt) if dj > 0 else range(j0, -1, -1)
                for j in jrange:
                    ok = mask[i, j]
                    if i != i0:
                        ok = ok and out[i - di, j]
                    if j != j0:
                        ok = ok and out[i, j - dj]
                    out[i, j] = ok
    return out


def _underlying(F):
    if F.degree != 0:
        raise ValueError("commuting domains are defined for degree-0 fields")
    return underlying_vector_field(F)


def _domain_interval(F0, names, x, span, config):
    try:
        traj, est = integrate_underlying(F0, x, span, config, names=names)
    except Exception:
        return None, None
    return traj, est


def estimate_commuting_domain(X, Y, m, s_grid=None, t_grid=None, config=DEFAULT, n=21):
    """Grid estimate of D'_1 ∩ σ^{-1}(D'_2) and of the maximal commuting domain at m."""
    names = list(X.sig.base)
    X0, Y0 = _underlying(X), _underlying(Y)
    T = config.t_max
    s_grid = np.linspace(-T, T, n) if s_grid is None else np.asarray(s_grid, float)
    t_grid = np.linspace(-T, T, n) if t_grid is None else np.asarray(t_grid, float)
    if not (np.any(s_grid == 0.0) and np.any(t_grid == 0.0)):
        raise ValueError("grids must contain 0")
    m = np.atleast_1d(np.asarray(m, dtype=float))
    s_span = (min(0.0, s_grid.min()), max(0.0, s_grid.max()))
    t_span = (min(0.0, t_grid.min()), max(0.0, t_grid.max()))

    def side(F0, G0, m, a_grid, b_grid, a_span, b_span):
        out = np.zeros((len(a_grid), len(b_grid)), dtype=bool)
        traj, est = _domain_interval(F0, names, m, a_span, config)
        if traj is None:
            return out
        for i, a in enumerate(a_grid):
            if not est.contains(a) or not (traj.t_lo <= a <= traj.t_hi):
                continue
            x = traj(a)
            _, est2 = _domain_interval(G0, names, x, b_span, config)
            if est2 is None:
                continue
            for j, b in enumerate(b_grid):
                out[i, j] = est2.contains(b)
        return out

    d1 = side(X0, Y0, m, s_grid, t_grid, s_span, t_span)
    d2 = side(Y0, X0, m, t_grid, s_grid, t_span, s_span).T
    i0 = int(np.argmin(np.abs(s_grid)))
    j0 = int(np.argmin(np.abs(t_grid)))
    maximal = rectangle_hull(d1 & d2, i0, j0)
    return CommutingDomainEstimate(tuple(map(float, m)), s_grid, t_grid, d1, d2, maximal)


# ---------------------------------------------------------------------------
# commuting flows


@dataclass
class CommutingReport:
    check: CheckResult
    bracket_zero: bool
    domains: list = field(default_factory=list)

    @property
    def commute(self):
        return self.check.holds

    @property
    def consistent(self):
        return self.check.verdict != INDETERMINATE and self.commute == self.bracket_zero

    def to_dict(self):
        return {
            "commute": self.commute,
            "verdict": self.check.verdict,
            "bracket_zero": self.bracket_zero,
            "consistent": self.consistent,
            "check": self.check.to_dict(),
            "domains": [d.to_dict() for d in self.domains],
        }


def commuting_maps(fx, fy, rho="rho", sigma="sigma"):
    """Pullbacks along θ^X(θ^Y(m, σ), ρ) and θ^Y(θ^X(m, ρ), σ) on M × R_ρ × R_σ."""
    M = fx.base_sig
    P = M.extend(time_coordinate(fx.degree, rho), time_coordinate(fy.degree, sigma))
    cap = min(fx.cap, fy.cap)
    Mr = M.extend(time_coordinate(fx.degree, rho))
    Ms = M.extend(time_coordinate(fy.degree, sigma))
    thx = fx.on(Mr, rho)
    thy = fy.on(Ms, sigma)
    # (m, ρ, σ) ↦ (θ^Y(m, σ), ρ)
    pb = {n: embed(thy.pullbacks[n], P) for n in M.names}
    pb[rho] = GradedFunction.coordinate(P, rho, cap)
    y_then = GradedMap(P, Mr, pb, cap)
    # (m, ρ, σ) ↦ (θ^X(m, ρ), σ)
    pb = {n: embed(thx.pullbacks[n], P) for n in M.names}
    pb[sigma] = GradedFunction.coordinate(P, sigma, cap)
    x_then = GradedMap(P, Ms, pb, cap)
    a = {n: y_then.pullback(thx.pullbacks[n]) for n in M.names}
    b = {n: x_then.pullback(thy.pullbacks[n]) for n in M.names}
    return a, b


def _commuting_symbolic(X, Y, config):
    fx, fy = flow_nonzero(X, config), flow_nonzero(Y, config)
    a, b = commuting_maps(fx, fy)
    w = min(fx.reliable_weight, fy.reliable_weight) - max(X.weight_drop(), Y.weight_drop())
    worst = _Worst()
    for n in X.sig.names:
        _symbolic_compare(worst, a[n], b[n], w, config, coordinate=n)
    return CheckResult("commuting", "symbolic", worst.value, symbolic_verdict(worst.value, config), worst.where)


def _commuting_mixed(X, Y, config):
    """X of degree 0, Y of nonzero degree: (Y⊗1)^r∘θ^X* = θ^X*∘Y^r for every r."""
    fy = flow_nonzero(Y, config)
    R = max(1, fy.max_power)
    worst = _Worst()
    for m in sample_base_points(X.sig, config):
        fj = _tight_solve(X, m, config, order=R)
        lo, hi = fj.t_range
        cache = {}
        for t in _sample_times(lo, hi, config.samples, config):
            jets = fj.jets(t)
            for r in range(1, R + 1):
                w = config.weight_cap - r * Y.weight_drop()
                rhs_fns = [apply_power(Y, GradedFunction.coordinate(X.sig, n, Y.cap), r) for n in X.sig.names]
                rhs = _flow_pullback(fj, rhs_fns, t)
                for n, g, b in zip(X.sig.names, [jets[n] for n in X.sig.names], rhs):
                    for _ in range(r):
                        g = numeric_apply(fj.alg, Y, g, m, cache)
                    _numeric_compare(
                        worst, X.sig, fj.alg.at_base(g), fj.alg.at_base(b), w,
                        coordinate=n, power=r, point=[float(v) for v in m], t=t,
                    )
    return CheckResult("commuting", "numeric", worst.value, numeric_verdict(worst.value, config), worst.where)


def _commuting_numeric(X, Y, config, domain_grid=None):
    worst = _Worst()
    domains = []
    cfg = config.tight()
    for m in sample_base_points(X.sig, config):
        est = estimate_commuting_domain(X, Y, m, config=config, **(domain_grid or {}))
        domains.append(est)
        cells = np.argwhere(est.maximal)
        if len(cells) == 0:
            continue
        u = unit_samples(1, config.samples, config.seed + 11)[:, 0]
        picks = [cells[int(x * len(cells)) % len(cells)] for x in u]
        for i, j in picks:
            s = config.t_range * float(est.s_grid[i])
            t = config.t_range * float(est.t_grid[j])
            fx = solve_pivotal(X, m, (min(0.0, s), max(0.0, s)), cfg)
            fy = solve_pivotal(Y, m, (min(0.0, t), max(0.0, t)), cfg)
            # θ^X_s followed by θ^Y_t, and the other order
            a = reseed(fx, s, Y, (min(0.0, t), max(0.0, t)), cfg).jets(t)
            b = reseed(fy, t, X, (min(0.0, s), max(0.0, s)), cfg).jets(s)
            for n in X.sig.names:
                _numeric_compare(
                    worst, X.sig, fx.alg.at_base(a[n]), fx.alg.at_base(b[n]), config.weight_cap,
                    coordinate=n, point=[float(v) for v in m], s=s, t=t,
                )
    chk = CheckResult("commuting", "numeric", worst.value, numeric_verdict(worst.value, config), worst.where)
    return chk, domains


def check_commuting_flows(X, Y, config=DEFAULT, domain_grid=None):
    """Do the flows of X and Y commute on their commuting domain?"""
    if X.sig != Y.sig:
        raise SignatureMismatch("fields live on different signatures")
    bz = _bracket_zero(X, Y, config)
    if X.degree != 0 and Y.degree != 0:
        return CommutingReport(_commuting_symbolic(X, Y, config), bz)
    if X.degree == 0 and Y.degree == 0:
        chk, domains = _commuting_numeric(X, Y, config, domain_grid)
        return CommutingReport(chk, bz, domains)
    if X.degree == 0:
        return CommutingReport(_commuting_mixed(X, Y, config), bz)
    return CommutingReport(_commuting_mixed(Y, X, config), bz)


# ---------------------------------------------------------------------------
# related fields


@dataclass
class EquivarianceReport:
    check: CheckResult
    related: bool
    related_deviation: float
    related_location: str = None

    @property
    def equivariant(self):
        return self.check.holds

    @property
    def consistent(self):
        return self.check.verdict != INDETERMINATE and self.equivariant == self.related

    def to_dict(self):
        return {
            "equivariant": self.equivariant,
            "verdict": self.check.verdict,
            "related": self.related,
            "consistent": self.consistent,
            "related_deviation": self.related_deviation,
            "related_location": self.related_location,
            "check": self.check.to_dict(),
        }


def check_related_equivariance(phi, X, Y, config=DEFAULT):
    """Is θ^Y∘(φ×1) = φ∘θ^X?  Compared with X being φ-related to Y."""
    if X.degree != Y.degree:
        raise DegreeMismatch(f"fields have degrees {X.degree} and {Y.degree}")
    dev, where = related_deviation(phi, X, Y, config=config)
    rel = dev <= config.zero_tol
    if X.degree != 0:
        fx, fy = flow_nonzero(X, config), flow_nonzero(Y, config)
        tau = time_coordinate(X.degree, fx.tau)
        lift = times_identity(phi, [tau])
        w = min(fx.reliable_weight, fy.reliable_weight) - phi.weight_drop()
        worst = _Worst()
        for n in phi.target.names:
            lhs = lift.pullback(fy.on(lift.target, fx.tau).pullbacks[n])
            rhs = fx.pullback(phi.pullbacks[n])
            _symbolic_compare(worst, lhs, rhs, w, config, coordinate=n)
        chk = CheckResult("equivariance", "symbolic", worst.value, symbolic_verdict(worst.value, config), worst.where)
        return EquivarianceReport(chk, rel, dev, where)
    worst = _Worst()
    cfg = config.tight()
    for m in sample_base_points(phi.source, config):
        fx = solve_pivotal(X, m, (-config.t_max, config.t_max), cfg, allow_partial=True)
        fy = solve_pivotal(Y, m, fx.t_range, cfg, initial=phi, allow_partial=True)
        lo = max(fx.t_range[0], fy.t_range[0])
        hi = min(fx.t_range[1], fy.t_range[1])
        for t in _sample_times(lo, hi, config.samples, config):
            rhs = _flow_pullback(fx, [phi.pullbacks[n] for n in phi.target.names], t)
            lhs = fy.jets(t)
            for n, b in zip(phi.target.names, rhs):
                _numeric_compare(
                    worst, phi.source, fy.alg.at_base(lhs[n]), fx.alg.at_base(b), config.weight_cap,
                    coordinate=n, point=[float(v) for v in m], t=t,
                )
    chk = CheckResult("equivariance", "numeric", worst.value, numeric_verdict(worst.value, config), worst.where)
    return EquivarianceReport(chk, rel, dev, where)
