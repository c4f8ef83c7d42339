"""Numerical flows of degree-zero vector fields.

For a degree-zero field X the flow coefficients at a fixed base point x₀
satisfy ``d/dt θ^λ_p = [θ*(X^λ)]_p``: a nonlinear system at weight zero (the
underlying ODE) and linear systems above it, each weight driven only by lower
weights.  The whole system is integrated jointly with an adaptive RK45 pair;
the right-hand side is the numeric pullback of the components through the
current jet.  :func:`crosscheck_weight_one` re-derives the weight-one and
weight-two coefficients from fundamental matrices as an independent check.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import OdeSolution, RK45, quad_vec

from . import expr as E
from .config import DEFAULT
from .errors import (
    BlowUp,
    DegreeError,
    IllConditioned,
    MismatchBeyondTolerance,
    OutOfIntegratedRange,
    SignatureMismatch,
    TriangularityViolation,
)
from .gradedmap import GradedMap
from .jets import Jet, JetAlgebra, PullbackEvaluator
from .vectorfield import VectorField, underlying_vector_field


# ---------------------------------------------------------------------------
# integration engine


@dataclass
class Segment:
    """One-directional integration from t = 0."""

    ts: np.ndarray
    ys: np.ndarray
    sol: object
    status: str  # "complete", "blow-up" or "step-underflow"
    t_stop: float
    nfev: int = 0

    @property
    def t_end(self):
        return float(self.ts[-1])


def integrate(fun, y0, t_end, config, bound=None):
    """Integrate ``y' = fun(t, y)`` from 0 to ``t_end`` with blow-up detection."""
    bound = config.state_bound if bound is None else bound
    y0 = np.asarray(y0, dtype=float)
    if t_end == 0.0:
        return Segment(np.array([0.0]), y0[None, :].copy(), None, "complete", 0.0)
    solver = RK45(fun, 0.0, y0, t_end, rtol=config.rtol, atol=config.atol)
    ts, ys, interps = [0.0], [y0.copy()], []
    status, t_stop = "complete", float(t_end)
    while solver.status == "running":
        solver.step()
        if solver.status == "failed":
            status, t_stop = "step-underflow", float(solver.t)
            break
        y = solver.y
        if not np.all(np.isfinite(y)) or np.max(np.abs(y)) > bound:
            status, t_stop = "blow-up", float(solver.t)
            break
        ts.append(float(solver.t))
        ys.append(y.copy())
        interps.append(solver.dense_output())
        if abs(solver.t - solver.t_old) < config.min_step and solver.status == "running":
            status, t_stop = "step-underflow", float(solver.t)
            break
    sol = OdeSolution(np.array(ts), interps) if interps else None
    return Segment(np.array(ts), np.array(ys), sol, status, t_stop, solver.nfev)


class Trajectory:
    """Forward and backward segments glued at t = 0, with dense evaluation."""

    def __init__(self, forward, backward):
        self.forward = forward
        self.backward = backward

    @property
    def t_lo(self):
        return self.backward.t_end

    @property
    def t_hi(self):
        return self.forward.t_end

    @property
    def nfev(self):
        return self.forward.nfev + self.backward.nfev

    @property
    def nsteps(self):
        return len(self.forward.ts) + len(self.backward.ts) - 2

    def __call__(self, t):
        t = float(t)
        if t > self.t_hi or t < self.t_lo:
            raise OutOfIntegratedRange(f"t = {t} outside integrated range [{self.t_lo}, {self.t_hi}]")
        seg = self.forward if t >= 0 else self.backward
        if seg.sol is None:
            return seg.ys[0].copy()
        return np.asarray(seg.sol(t), dtype=float)

    def grid(self):
        ts = np.concatenate([self.backward.ts[::-1], self.forward.ts[1:]])
        ys = np.concatenate([self.backward.ys[::-1], self.forward.ys[1:]])
        return ts, ys


def _integrate_both(fun, y0, t_span, config):
    lo, hi = t_span
    if lo > 0 or hi < 0:
        raise ValueError("time span must contain 0")
    fwd = integrate(fun, y0, float(hi), config)
    bwd = integrate(fun, y0, float(lo), config)
    return Trajectory(fwd, bwd)


@dataclass(frozen=True)
class FlowDomainEstimate:
    """Estimated maximal existence interval through one initial point."""

    x0: tuple
    t_minus: float
    t_plus: float
    escaped_minus: bool
    escaped_plus: bool

    def contains(self, t):
        lo_ok = t > self.t_minus if self.escaped_minus else t >= self.t_minus
        hi_ok = t < self.t_plus if self.escaped_plus else t <= self.t_plus
        return lo_ok and hi_ok


def _span(t_span, config):
    if t_span is None:
        return (-config.t_max, config.t_max)
    if np.isscalar(t_span):
        t = float(t_span)
        return (min(0.0, t), max(0.0, t))
    return (float(t_span[0]), float(t_span[1]))


def _as_point(x0, names):
    if isinstance(x0, dict):
        return np.array([float(x0[n]) for n in names])
    arr = np.atleast_1d(np.asarray(x0, dtype=float))
    if arr.shape != (len(names),):
        raise ValueError(f"base point needs {len(names)} entries, got {arr.shape}")
    return arr


def integrate_underlying(X0, x0, t_span=None, config=DEFAULT, names=None):
    """Integrate an ordinary field (``{coordinate: expr}`` or a degree-0 VectorField).

    Returns the trajectory and an estimate of the maximal interval through x0.
    """
    if isinstance(X0, VectorField):
        names = list(X0.sig.base)
        X0 = underlying_vector_field(X0)
    names = list(X0) if names is None else list(names)
    comps = [E.as_expr(X0.get(n, E.ZERO)) for n in names]
    f = E.compile_exprs(comps, names)
    x0 = _as_point(x0, names)

    def fun(t, y):
        return np.array(f(*y), dtype=float)

    traj = _integrate_both(fun, x0, _span(t_span, config), config)
    est = FlowDomainEstimate(
        tuple(map(float, x0)),
        traj.backward.t_stop,
        traj.forward.t_stop,
        traj.backward.status != "complete",
        traj.forward.status != "complete",
    )
    return traj, est


# ---------------------------------------------------------------------------
# pivotal system


def _check_triangular(rate, y, weights, cap):
    full = rate(y)
    for w in range(1, cap + 1):
        low = weights < w
        y_w = np.where(low, y, 0.0)
        r_w = rate(y_w)
        if not np.array_equal(full[low], r_w[low]):
            bad = int(np.argmax(np.abs(full - r_w) * low))
            raise TriangularityViolation(f"rate of entry {bad} changed when weights >= {w} were zeroed")


class FlowJet:
    """Flow coefficients of a degree-zero field along one base trajectory."""

    def __init__(self, X, alg, x0, initial, traj, config, evaluator, layout):
        self.X = X
        self.alg = alg
        self.source = alg.sig
        self.target = X.sig
        self.x0 = tuple(map(float, x0))
        self.initial = initial
        self.traj = traj
        self.config = config
        self._evaluator = evaluator
        self.layout = layout  # list of (name, degree, start, stop)

    @property
    def t_range(self):
        return (self.traj.t_lo, self.traj.t_hi)

    @property
    def order(self):
        return self.alg.order

    def domain(self):
        return FlowDomainEstimate(
            self.x0,
            self.traj.backward.t_stop,
            self.traj.forward.t_stop,
            self.traj.backward.status != "complete",
            self.traj.forward.status != "complete",
        )

    def state(self, t):
        return self.traj(t)

    def split(self, y):
        return {name: Jet(deg, y[a:b]) for name, deg, a, b in self.layout}

    def join(self, jets):
        return np.concatenate([jets[name].coeffs for name, _, _, _ in self.layout])

    def jets(self, t):
        return self.split(self.state(t))

    def rate(self, y):
        """Right-hand side of the pivotal system at a state vector."""
        return self.join(
            dict(zip([n for n, *_ in self.layout], self._evaluator(self.split(y))))
        )

    def coefficient(self, name, p, t, J=None):
        deg = self.target.degree(name)
        k = self.alg.position(deg, p, J)
        if k is None:
            return 0.0
        _, _, a, _ = next(item for item in self.layout if item[0] == name)
        return float(self.state(t)[a + k])

    def base_values(self, t):
        y = self.state(t)
        return np.array([y[a] for name, _, a, _ in self.layout if self.target.degree(name) == 0])

    def weights(self):
        return np.concatenate([self.alg.weights(deg) for _, deg, _, _ in self.layout])

    def labels(self):
        out = []
        z = (0,) * self.alg.n0
        for name, deg, _, _ in self.layout:
            for p, J in self.alg.basis(deg):
                lab = f"{name}[{self.source.format_index(p)}]"
                if J != z:
                    lab += "[d" + ",".join(map(str, J)) + "]"
                out.append(lab)
        return out

    def grid(self):
        return self.traj.grid()


def _layout(alg, target):
    layout, start = [], 0
    for c in target.coords:
        n = alg.size(c.degree)
        layout.append((c.name, c.degree, start, start + n))
        start += n
    return layout


def initial_jets(alg, target, x0=None, initial=None):
    """Initial jets: identity at x0, a symbolic map, or given jets."""
    if initial is None:
        if alg.sig != target:
            raise SignatureMismatch("identity initial condition needs source == target")
        return {n: alg.coordinate(n, x0) for n in target.names}
    if isinstance(initial, GradedMap):
        if initial.source != alg.sig or initial.target != target:
            raise SignatureMismatch("initial map must go from the jet signature to the field's")
        return {n: alg.from_function(initial.pullbacks[n], x0) for n in target.names}
    return {n: initial[n].copy() for n in target.names}


def solve_pivotal(
    X, x0, t_span=None, config=DEFAULT, order=0, initial=None, source=None, allow_partial=False, cap=None
):
    """Integrate the flow coefficients of a degree-zero field from base point x0.

    ``initial`` may be a GradedMap from ``source`` to the field's signature,
    or a dict of Jets (for reseeding from another solve); ``order`` is the
    order of base sensitivities carried along.
    """
    if X.degree != 0:
        raise DegreeError(f"pivotal system needs a degree-0 field, got degree {X.degree}")
    cap = config.weight_cap if cap is None else cap
    if isinstance(initial, GradedMap):
        source = initial.source
    source = X.sig if source is None else source
    alg = JetAlgebra(source, cap, order)
    x0 = _as_point(x0, source.base)
    jets0 = initial_jets(alg, X.sig, x0, initial)
    layout = _layout(alg, X.sig)
    comps = [X.components[n].with_cap(cap) for n in X.sig.names]
    evaluator = PullbackEvaluator(alg, X.sig, comps)
    fj = FlowJet(X, alg, x0, initial, None, config, evaluator, layout)
    y0 = fj.join(jets0)

    def fun(t, y):
        return fj.rate(y)

    weights = fj.weights()
    _check_triangular(fj.rate, y0, weights, cap)
    span = _span(t_span, config)
    traj = _integrate_both(fun, y0, span, config)
    fj.traj = traj
    for seg in (traj.forward, traj.backward):
        _check_triangular(fj.rate, seg.ys[-1], weights, cap)
        if seg.status != "complete" and not allow_partial:
            raise BlowUp(
                f"integration stopped ({seg.status}) at t = {seg.t_stop:.6g} before reaching "
                f"{span[1] if seg is traj.forward else span[0]}",
                seg.t_stop,
            )
    return fj


def reseed(fj, s, X=None, t_span=None, config=None, allow_partial=False):
    """Solve again for X (default: the same field) starting from the jet at time s."""
    X = fj.X if X is None else X
    config = fj.config if config is None else config
    jets = fj.jets(s)
    return solve_pivotal(
        X, fj.x0, t_span, config, fj.order, jets, fj.source, allow_partial, fj.alg.cap
    )


def flow_pullback_jet(fj, f, t):
    """θ_t*(f) at the base point as a Jet (including base sensitivities)."""
    if f.sig != fj.target:
        raise SignatureMismatch("function does not live on the field's signature")
    ev = PullbackEvaluator(fj.alg, fj.target, [f.with_cap(fj.alg.cap)])
    return ev(fj.jets(t))[0]


def flow_pullback_at(fj, f, t):
    """Coefficients ``{p: value}`` of θ_t*(f) at the base point."""
    return fj.alg.at_base(flow_pullback_jet(fj, f, t))


# ---------------------------------------------------------------------------
# fundamental matrices


class FundamentalMatrix:
    def __init__(self, degree, names, traj, config):
        self.degree = degree
        self.names = names
        self.traj = traj
        self.n = len(names)

    def __call__(self, t):
        return self.traj(t).reshape(self.n, self.n)


def coefficient_matrix(X, j):
    """Symbolic A_j: entries X^μ_{p(λ)} for degree j ≠ 0, the Jacobian of X₀ for j = 0."""
    sig = X.sig
    names = [c.name for c in sig.coords if c.degree == j]
    if not names:
        raise ValueError(f"no coordinates of degree {j}")
    if j == 0:
        X0 = underlying_vector_field(X)
        return names, [[E.diff(X0[k], i) for i in names] for k in names]
    rows = []
    for mu in names:
        comp = X.components[mu]
        rows.append([comp.coefficient(sig.unit(lam)) for lam in names])
    return names, rows


def fundamental_matrix(X, j, trajectory, config=None):
    """Integrate Φ' = A_j(θ₀(t)) Φ, Φ(0) = 1 along a FlowJet's base trajectory."""
    if not isinstance(trajectory, FlowJet):
        raise TypeError("fundamental_matrix needs a FlowJet")
    fj = trajectory
    config = fj.config if config is None else config
    names, A = coefficient_matrix(X, j)
    n = len(names)
    base = list(X.sig.base)
    flat = [e for row in A for e in row]
    fA = E.compile_exprs(flat, base)

    def fun(t, y):
        xb = fj.base_values(t)
        a = np.array(fA(*xb), dtype=float).reshape(n, n)
        return (a @ y.reshape(n, n)).ravel()

    lo, hi = fj.t_range
    traj = _integrate_both(fun, np.eye(n).ravel(), (lo, hi), config)
    fm = FundamentalMatrix(j, names, traj, config)
    _, ys = traj.grid()
    for y in ys:
        c = np.linalg.cond(y.reshape(n, n))
        if not np.isfinite(c) or c > config.max_condition:
            raise IllConditioned(f"fundamental matrix of degree {j} has condition number {c:.3g}")
    return fm


@dataclass
class CrosscheckReport:
    weight_one: float
    weight_two: float
    threshold: float
    worst: tuple = None
    times: list = field(default_factory=list)

    @property
    def mismatch(self):
        return max(self.weight_one, self.weight_two)

    @property
    def passed(self):
        return self.mismatch <= self.threshold


def crosscheck_weight_one(fj, times=None, weight_two=True, raise_on_mismatch=True):
    """Compare the joint integration against fundamental-matrix closed forms.

    Weight one: θ^μ_{p(ν)}(t) = Σ_λ Φ_{|μ|}(t)^μ_λ θ^λ_{p(ν)}(0).  Weight two:
    θ_p(t) = Φ(t)(θ_p(0) + ∫_0^t Φ(s)^{-1} y_p(s) ds), where y_p is the rate of
    θ_p with every weight->=2 entry set to zero.
    """
    cfg = fj.config
    X = fj.X
    sig = fj.target
    src = fj.source
    alg = fj.alg
    lo, hi = fj.t_range
    if times is None:
        times = sorted(set(np.linspace(lo, hi, 9).tolist()) | {0.0})
    times = [float(t) for t in times]
    z = (0,) * alg.n0
    offsets = {name: a for name, _, a, _ in fj.layout}
    weights = fj.weights()
    degrees = sorted({d for d in (c.degree for c in sig.coords)})
    mats = {}
    for j in degrees:
        mats[j] = fundamental_matrix(X, j, fj)

    worst = (0.0, None)
    scale = 0.0
    w1 = 0.0
    y0 = fj.state(0.0)
    for j in degrees:
        if j == 0:
            continue
        names = mats[j].names
        nus = [c.name for c in src.coords if c.degree == j]
        for nu in nus:
            k = alg.position(j, src.unit(nu), z)
            init = np.array([y0[offsets[lam] + k] for lam in names])
            for t in times:
                pred = mats[j](t) @ init
                got = np.array([fj.state(t)[offsets[mu] + k] for mu in names])
                scale = max(scale, float(np.max(np.abs(got))))
                d = np.abs(pred - got)
                i = int(np.argmax(d))
                if d[i] > w1:
                    w1 = float(d[i])
                if d[i] > worst[0]:
                    worst = (float(d[i]), (names[i], src.format_index(src.unit(nu)), t))

    w2 = 0.0
    if weight_two:
        mask = weights >= 2
        for j in degrees:
            names = mats[j].names
            ps = [p for p, J in alg.basis(j) if sum(p) == 2 and J == z]
            for p in ps:
                k = alg.position(j, p, z)
                idx = [offsets[lam] + k for lam in names]
                init = np.array([y0[i] for i in idx])

                def integrand(s, idx=idx, j=j):
                    y = fj.state(s)
                    r = fj.rate(np.where(mask, 0.0, y))
                    return np.linalg.solve(mats[j](s), r[idx])

                for direction in (1, -1):
                    pts = sorted([t for t in times if t * direction > 0], key=abs)
                    acc = np.zeros(len(idx))
                    prev = 0.0
                    for t in pts:
                        part, _ = quad_vec(integrand, prev, t, epsabs=cfg.atol * 1e-2, epsrel=cfg.rtol * 1e-2)
                        acc = acc + part
                        prev = t
                        pred = mats[j](t) @ (init + acc)
                        got = fj.state(t)[idx]
                        scale = max(scale, float(np.max(np.abs(got))))
                        d = np.abs(pred - got)
                        i = int(np.argmax(d))
                        w2 = max(w2, float(d[i]))
                        if d[i] > worst[0]:
                            worst = (float(d[i]), (names[i], src.format_index(p), t))

    threshold = 10.0 * (cfg.atol + cfg.rtol * max(1.0, scale))
    rep = CrosscheckReport(w1, w2, threshold, worst[1], times)
    if raise_on_mismatch and not rep.passed:
        raise MismatchBeyondTolerance(
            f"crosscheck mismatch {rep.mismatch:.3g} exceeds {threshold:.3g} at {worst[1]}", worst
        )
    return rep
