"""Oscillatory surface integrals, Weyl defects and decay-slope fits.

The central object is int_S f(x/eps) phi(x) dsigma evaluated with a node
density that resolves the oscillation (>= 16 nodes per wavelength), with an
a-posteriori error estimate from density doubling.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from homolab.fields import PeriodicField

DEFAULT_NODE_BUDGET = 10**7


class OscillationBudgetError(RuntimeError):
    def __init__(self, required, budget):
        super().__init__(
            f"resolving the oscillation needs ~{required:.0f} nodes, budget is {budget:.0f}"
        )
        self.required = required
        self.budget = budget


@dataclass(frozen=True)
class OscValue:
    """One oscillatory integral: value, doubling error estimate, node count."""

    value: complex
    est_error: float
    nodes: int

    @property
    def real(self):
        return self.value.real if np.iscomplexobj(self.value) else float(np.real(self.value))


@dataclass(frozen=True)
class OscillatorySeries:
    """Weyl defect series over a strictly decreasing eps list."""

    entries: list  # of (eps, value, defect, est_error)
    limit: float
    f_descriptor: str = ""
    surface_descriptor: str = ""

    def __post_init__(self):
        eps = [e[0] for e in self.entries]
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ValueError("eps must be strictly decreasing")

    @property
    def eps(self):
        return np.array([e[0] for e in self.entries])

    @property
    def defects(self):
        return np.array([e[2] for e in self.entries])


def _f_eval(f, pts, eps):
    if isinstance(f, PeriodicField):
        return f.evaluate(pts / eps)
    return f(pts / eps)


def _max_mode(f):
    if isinstance(f, PeriodicField):
        return max(f.max_mode(), 1.0)
    return 1.0


def oscillatory_integral(
    surface,
    f,
    phi=None,
    eps=1.0,
    *,
    rel_tol=1e-3,
    abs_tol=1e-10,
    node_budget=DEFAULT_NODE_BUDGET,
    nodes_per_wavelength=16,
):
    """int_S f(x/eps) phi(x) dsigma with eps-resolving composite Gauss rule.

    phi is a (vectorized) smooth weight on points, or None for 1.  Returns
    an OscValue; est_error comes from comparing against a doubled density.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    kmax = _max_mode(f)
    density = max(nodes_per_wavelength * kmax / eps, 32.0 / max(surface.measure(), 1e-12))
    total = surface.measure()

    def run(dens):
        pts, _, w = surface.quadrature(dens)
        vals = _f_eval(f, pts, eps)
        if phi is not None:
            vals = vals * np.asarray(phi(pts))
        return complex(np.sum(w * vals)), len(w)

    if density * total > node_budget:
        raise OscillationBudgetError(density * total, node_budget)
    v1, n1 = run(density)
    while True:
        if 2 * density * total > node_budget:
            raise OscillationBudgetError(2 * density * total, node_budget)
        v2, n2 = run(2 * density)
        err = abs(v2 - v1)
        if err <= rel_tol * abs(v2) + abs_tol or 4 * density * total > node_budget:
            break
        density *= 2
        v1 = v2
    value = v2
    if np.max(np.abs(np.imag(value))) < 1e-30:
        value = value.real
    return OscValue(value=value, est_error=float(err), nodes=n2)


def surface_integral(surface, phi=None, density=256.0):
    """Plain (non-oscillatory) surface integral of phi."""
    pts, _, w = surface.quadrature(density)
    if phi is None:
        return float(np.sum(w))
    return float(np.sum(w * np.asarray(phi(pts))))


def weyl_defect_series(surface, f, phi=None, eps_list=(), **kwargs):
    """Defect |int f(x/eps) phi dsigma - <f> int phi dsigma| per eps."""
    eps_list = list(eps_list)
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be strictly decreasing")
    fbar = f.mean() if isinstance(f, PeriodicField) else _torus_mean(f)
    limit = float(fbar) * surface_integral(surface, phi)
    entries = []
    for eps in eps_list:
        r = oscillatory_integral(surface, f, phi, eps, **kwargs)
        defect = abs(r.value - limit)
        entries.append((eps, r.value, float(defect), r.est_error))
    return OscillatorySeries(
        entries=entries,
        limit=limit,
        f_descriptor=getattr(f, "kind", "callable"),
        surface_descriptor=type(surface).__name__,
    )


def _torus_mean(f, n=256):
    y = (np.arange(n) + 0.5) / n
    Y = np.stack(np.meshgrid(y, y, indexing="ij"), axis=-1).reshape(-1, 2)
    return float(np.mean(f(Y)))


def m_epsilon(surface, b, eps, **kwargs):
    """Boundary compatibility constant: surface average of b_bar - b(x/eps).

    b is a scalar or matrix PeriodicField; the result is a float or (m, m)
    array.  For strictly convex surfaces this decays like eps^{(d-1)/2}.
    """
    area = surface.measure()
    bbar = b.mean()
    if b.kind == "scalar":
        avg = oscillatory_integral(surface, b, None, eps, **kwargs).value / area
        return float(bbar - np.real(avg))
    if b.kind != "matrix":
        raise ValueError("m_epsilon needs a scalar or matrix field")
    m = b.m
    out = np.zeros((m, m))
    for a in range(m):
        for c in range(m):
            comp = _ComponentField(b, a, c)
            avg = oscillatory_integral(surface, comp, None, eps, **kwargs).value / area
            out[a, c] = np.asarray(bbar)[a, c] - np.real(avg)
    return out


class _ComponentField:
    """Callable view of one matrix component; keeps the mode count visible."""

    def __init__(self, base, i, j):
        self.base, self.i, self.j = base, i, j

    def __call__(self, y):
        return self.base.evaluate(y)[..., self.i, self.j]

    def max_mode(self):
        return self.base.max_mode()


def boundary_average(surface, f, eps, **kwargs):
    """Surface average of f(x/eps) (compatibility constant of the auxiliary
    Neumann problem)."""
    area = surface.measure()
    return oscillatory_integral(surface, f, None, eps, **kwargs).value / area


EXACT_SLOPE = float("inf")


def fit_decay_slope(series, drop_first=0, zero_threshold=1e-10):
    """Least-squares line through (log eps, log defect).

    series : OscillatorySeries or iterable of (eps, defect) pairs.  The
    first `drop_first` (pre-asymptotic) entries are ignored.  If every kept
    defect is below zero_threshold the decay is 'exact' and the slope is
    +inf.  Returns (slope, intercept, max_residual).
    """
    if isinstance(series, OscillatorySeries):
        pairs = list(zip(series.eps, series.defects))
    else:
        pairs = [(float(e), float(v)) for e, v in series]
    pairs = pairs[int(drop_first):]
    if len(pairs) < 2:
        raise ValueError("need at least 2 entries after drop_first")
    eps = np.array([p[0] for p in pairs])
    defect = np.array([p[1] for p in pairs])
    if np.all(defect <= zero_threshold):
        return EXACT_SLOPE, 0.0, 0.0
    keep = defect > zero_threshold
    if keep.sum() < 2:
        raise ValueError("fewer than 2 nonzero defects")
    x = np.log(eps[keep])
    y = np.log(defect[keep])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return float(slope), float(intercept), float(np.max(np.abs(resid)))
