"""Closed curves (d=2) and surfaces of revolution/ellipsoids (d=3).

A SurfaceChart is a list of parametrized pieces forming a closed,
consistently oriented boundary.  Pieces are either flat (segments, carrying
an exact normal direction whenever the construction allows it) or strictly
curved.  The non-resonance decision is structural: curved pieces contribute
zero measure to the rational-normal set, flat pieces are classified by
exact/continued-fraction rationality of their normal direction.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

import numpy as np

_GAUSS_N = 8
_GX, _GW = np.polynomial.legendre.leggauss(_GAUSS_N)


class GeometryError(ValueError):
    pass


class NonResonanceUndecidable(GeometryError):
    """Raised for pieces that are neither flat nor certified strictly curved."""


# -------------------------------------------------------------------------
# curve pieces (d = 2), parametrized on t in [0, 1]
# -------------------------------------------------------------------------


class CurvePiece:
    d = 2
    flat = False

    def position(self, t):
        raise NotImplementedError

    def velocity(self, t):
        raise NotImplementedError

    def acceleration(self, t):
        raise NotImplementedError

    def normal(self, t):
        """Outward unit normal for counterclockwise orientation."""
        v = self.velocity(np.asarray(t, dtype=float))
        n = np.stack([v[..., 1], -v[..., 0]], axis=-1)
        return n / np.linalg.norm(n, axis=-1, keepdims=True)

    def curvature(self, t):
        t = np.asarray(t, dtype=float)
        v = self.velocity(t)
        a = self.acceleration(t)
        cross = v[..., 0] * a[..., 1] - v[..., 1] * a[..., 0]
        return cross / np.linalg.norm(v, axis=-1) ** 3

    # arclength helpers ---------------------------------------------------

    def _dense(self, n=4096):
        if not hasattr(self, "_dense_cache") or self._dense_cache[0].size < n + 1:
            ts = np.linspace(0.0, 1.0, n + 1)
            pts = self.position(ts)
            seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
            cum = np.concatenate([[0.0], np.cumsum(seg)])
            self._dense_cache = (ts, pts, cum)
        return self._dense_cache

    def length(self):
        """Arc length by composite Gauss quadrature."""
        panels = 64
        edges = np.linspace(0.0, 1.0, panels + 1)
        t = (edges[:-1, None] + np.diff(edges)[:, None] * (0.5 + 0.5 * _GX[None, :])).ravel()
        w = (np.diff(edges)[:, None] * 0.5 * _GW[None, :]).ravel()
        return float(np.sum(w * np.linalg.norm(self.velocity(t), axis=-1)))

    def param_at_arclength(self, s):
        """Parameters t at prescribed arclengths s from the start."""
        ts, _, cum = self._dense()
        return np.interp(s, cum, ts)


class CirclePiece(CurvePiece):
    def __init__(self, r=1.0, center=(0.0, 0.0)):
        self.r = float(r)
        self.center = np.asarray(center, dtype=float)

    def position(self, t):
        t = np.asarray(t, dtype=float)
        th = 2 * np.pi * t
        return self.center + self.r * np.stack([np.cos(th), np.sin(th)], axis=-1)

    def velocity(self, t):
        th = 2 * np.pi * np.asarray(t, dtype=float)
        return 2 * np.pi * self.r * np.stack([-np.sin(th), np.cos(th)], axis=-1)

    def acceleration(self, t):
        th = 2 * np.pi * np.asarray(t, dtype=float)
        return -((2 * np.pi) ** 2) * self.r * np.stack([np.cos(th), np.sin(th)], axis=-1)

    def length(self):
        return 2 * np.pi * self.r


class EllipsePiece(CurvePiece):
    def __init__(self, a, b, center=(0.0, 0.0)):
        self.a, self.b = float(a), float(b)
        self.center = np.asarray(center, dtype=float)

    def position(self, t):
        th = 2 * np.pi * np.asarray(t, dtype=float)
        return self.center + np.stack([self.a * np.cos(th), self.b * np.sin(th)], axis=-1)

    def velocity(self, t):
        th = 2 * np.pi * np.asarray(t, dtype=float)
        return 2 * np.pi * np.stack([-self.a * np.sin(th), self.b * np.cos(th)], axis=-1)

    def acceleration(self, t):
        th = 2 * np.pi * np.asarray(t, dtype=float)
        return -((2 * np.pi) ** 2) * np.stack([self.a * np.cos(th), self.b * np.sin(th)], axis=-1)


class SuperellipsePiece(CurvePiece):
    """One quadrant of |x|^p + |y|^p = 1, theta in [q pi/2, (q+1) pi/2]."""

    def __init__(self, p, quadrant):
        if p <= 1:
            raise GeometryError("superellipse exponent must exceed 1")
        self.p = float(p)
        self.q = int(quadrant)

    def _theta(self, t):
        return (self.q + np.asarray(t, dtype=float)) * (np.pi / 2.0)

    def position(self, t):
        th = self._theta(t)
        e = 2.0 / self.p
        c, s = np.cos(th), np.sin(th)
        # snap roundoff at quadrant ends: |cos(pi/2)| ~ 1e-16 would blow
        # up to ~1e-8 under the fractional power and break chart closure
        c = np.where(np.abs(c) < 1e-14, 0.0, c)
        s = np.where(np.abs(s) < 1e-14, 0.0, s)
        x = np.sign(c) * np.abs(c) ** e
        y = np.sign(s) * np.abs(s) ** e
        return np.stack([x, y], axis=-1)

    def velocity(self, t, h=1e-6):
        # central differences: the closed form is unwieldy and 1e-6 step
        # keeps ~1e-9 accuracy, enough for quadrature weights/normals
        tp = np.asarray(t, dtype=float)
        return (self.position(tp + h) - self.position(tp - h)) / (2 * h)

    def acceleration(self, t, h=1e-4):
        tp = np.asarray(t, dtype=float)
        return (self.position(tp + h) - 2 * self.position(tp) + self.position(tp - h)) / h**2


class SegmentPiece(CurvePiece):
    flat = True

    def __init__(self, v0, v1, exact=None):
        """Straight segment from v0 to v1.

        exact : optional pair of exact coordinate tuples (Fraction, int, or
        sympy expressions); used for exact normal-direction arithmetic.
        """
        self.v0 = np.asarray(v0, dtype=float)
        self.v1 = np.asarray(v1, dtype=float)
        self.exact = exact

    def position(self, t):
        t = np.asarray(t, dtype=float)[..., None]
        return (1 - t) * self.v0 + t * self.v1

    def velocity(self, t):
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(self.v1 - self.v0, t.shape + (2,)).copy()

    def acceleration(self, t):
        t = np.asarray(t, dtype=float)
        return np.zeros(t.shape + (2,))

    def curvature(self, t):
        raise GeometryError("curvature undefined on a flat piece")

    def length(self):
        return float(np.linalg.norm(self.v1 - self.v0))

    def param_at_arclength(self, s):
        return np.asarray(s, dtype=float) / self.length()

    def constant_normal(self):
        """(float normal, exact direction or None); outward for CCW charts."""
        dv = self.v1 - self.v0
        n = np.array([dv[1], -dv[0]])
        n = n / np.linalg.norm(n)
        exact_dir = None
        if self.exact is not None:
            (x0, y0), (x1, y1) = self.exact
            exact_dir = (y1 - y0, -(x1 - x0))
        return n, exact_dir


# -------------------------------------------------------------------------
# surface patches (d = 3)
# -------------------------------------------------------------------------


class EllipsoidPatch:
    """Full ellipsoid surface, parameters (u, v) = (theta, phi) in [0,1]^2."""

    d = 3
    flat = False

    def __init__(self, a, b, c):
        self.abc = np.array([float(a), float(b), float(c)])

    def position(self, u, v):
        th = np.pi * np.asarray(u, dtype=float)
        ph = 2 * np.pi * np.asarray(v, dtype=float)
        a, b, c = self.abc
        return np.stack(
            [a * np.sin(th) * np.cos(ph), b * np.sin(th) * np.sin(ph), c * np.cos(th)],
            axis=-1,
        )

    def jacobians(self, u, v):
        th = np.pi * np.asarray(u, dtype=float)
        ph = 2 * np.pi * np.asarray(v, dtype=float)
        a, b, c = self.abc
        Xu = np.stack(
            [a * np.cos(th) * np.cos(ph), b * np.cos(th) * np.sin(ph), -c * np.sin(th)],
            axis=-1,
        ) * np.pi
        Xv = np.stack(
            [-a * np.sin(th) * np.sin(ph), b * np.sin(th) * np.cos(ph), np.zeros_like(th)],
            axis=-1,
        ) * (2 * np.pi)
        return Xu, Xv

    def principal_curvatures(self, u, v):
        """Principal curvatures, positive for the (convex) ellipsoid."""
        h = 1e-5
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        Xu, Xv = self.jacobians(u, v)
        Xuu = (self.position(u + h, v) - 2 * self.position(u, v) + self.position(u - h, v)) / h**2
        Xvv = (self.position(u, v + h) - 2 * self.position(u, v) + self.position(u, v - h)) / h**2
        Xuv = (
            self.position(u + h, v + h)
            - self.position(u + h, v - h)
            - self.position(u - h, v + h)
            + self.position(u - h, v - h)
        ) / (4 * h**2)
        n = np.cross(Xu, Xv)
        n = n / np.linalg.norm(n, axis=-1, keepdims=True)
        E = np.sum(Xu * Xu, -1)
        F = np.sum(Xu * Xv, -1)
        G = np.sum(Xv * Xv, -1)
        L = np.sum(Xuu * n, -1)
        M = np.sum(Xuv * n, -1)
        Nn = np.sum(Xvv * n, -1)
        # shape operator w.r.t. outward normal; sign fixed so sphere -> +1/r
        I = np.stack([np.stack([E, F], -1), np.stack([F, G], -1)], -2)
        II = -np.stack([np.stack([L, M], -1), np.stack([M, Nn], -1)], -2)
        S = np.linalg.solve(I, II)
        return np.sort(np.linalg.eigvals(S).real, axis=-1)


# -------------------------------------------------------------------------
# chart
# -------------------------------------------------------------------------


@dataclass(frozen=True)
class NonResonanceVerdict:
    satisfies: bool
    rational_measure: float
    offending_pieces: list  # (piece index, normal tuple, integer vector k)

    def __post_init__(self):
        if self.satisfies != (self.rational_measure == 0.0):
            raise GeometryError("verdict inconsistent with rational measure")


class SurfaceChart:
    """Closed, consistently oriented piecewise-parametrized boundary."""

    def __init__(self, pieces, d=2, check_closure=True):
        if not pieces:
            raise GeometryError("chart needs at least one piece")
        self.pieces = list(pieces)
        self.d = d
        if d == 2 and check_closure:
            for i, pc in enumerate(self.pieces):
                nxt = self.pieces[(i + 1) % len(self.pieces)]
                gap = np.linalg.norm(pc.position(1.0) - nxt.position(0.0))
                if gap > 1e-12:
                    raise GeometryError(f"chart not closed at piece {i} (gap {gap:.2e})")
        self._poly_cache = None

    # builtins -------------------------------------------------------------

    @staticmethod
    def circle(r=1.0, center=(0.0, 0.0)):
        return SurfaceChart([CirclePiece(r, center)])

    @staticmethod
    def ellipse(a, b, center=(0.0, 0.0)):
        return SurfaceChart([EllipsePiece(a, b, center)])

    @staticmethod
    def polygon(vertices, exact=None):
        """Closed polygon from CCW vertices; exact coordinates optional.

        exact : list of (x, y) with Fraction/int/sympy entries, same length
        as vertices.
        """
        verts = [np.asarray(v, dtype=float) for v in vertices]
        n = len(verts)
        if n < 3:
            raise GeometryError("polygon needs >= 3 vertices")
        area2 = sum(
            verts[i][0] * verts[(i + 1) % n][1] - verts[(i + 1) % n][0] * verts[i][1]
            for i in range(n)
        )
        if area2 <= 0:
            raise GeometryError("polygon vertices must be counterclockwise")
        pieces = []
        for i in range(n):
            ex = None
            if exact is not None:
                ex = (tuple(exact[i]), tuple(exact[(i + 1) % n]))
            pieces.append(SegmentPiece(verts[i], verts[(i + 1) % n], exact=ex))
        return SurfaceChart(pieces)

    @staticmethod
    def square(side=1.0, corner=(0.0, 0.0)):
        x0, y0 = corner
        s = side
        verts = [(x0, y0), (x0 + s, y0), (x0 + s, y0 + s), (x0, y0 + s)]
        exact = [(Fraction(x).limit_denominator(10**12), Fraction(y).limit_denominator(10**12)) for x, y in verts]
        return SurfaceChart.polygon(verts, exact=exact)

    @staticmethod
    def superellipse(p):
        return SurfaceChart([SuperellipsePiece(p, q) for q in range(4)])

    @staticmethod
    def sphere(r=1.0):
        return SurfaceChart([EllipsoidPatch(r, r, r)], d=3, check_closure=False)

    @staticmethod
    def ellipsoid(a, b, c):
        return SurfaceChart([EllipsoidPatch(a, b, c)], d=3, check_closure=False)

    # measures ---------------------------------------------------------------

    def measure(self):
        """Total surface measure (perimeter for d=2)."""
        if self.d == 2:
            return float(sum(pc.length() for pc in self.pieces))
        pts, nrm, w = self.quadrature(32.0)
        return float(np.sum(w))

    def enclosed_volume(self, density=64.0):
        """|Omega| from the divergence theorem: (1/d) int x.n dsigma."""
        pts, nrm, w = self.quadrature(density)
        return float(np.sum(w * np.sum(pts * nrm, axis=-1)) / self.d)

    # quadrature ---------------------------------------------------------------

    def quadrature(self, nodes_per_unit):
        """Composite Gauss rule: (points, outward normals, weights).

        nodes_per_unit is the target node density per unit surface measure;
        weights sum to the surface measure.
        """
        if nodes_per_unit <= 0:
            raise GeometryError("density must be positive")
        if self.d == 2:
            pts_all, nrm_all, w_all = [], [], []
            for pc in self.pieces:
                L = pc.length()
                panels = max(1, int(np.ceil(L * nodes_per_unit / _GAUSS_N)))
                edges = np.linspace(0.0, 1.0, panels + 1)
                half = np.diff(edges) * 0.5
                t = (edges[:-1, None] + half[:, None] * (1.0 + _GX[None, :])).ravel()
                wt = (half[:, None] * _GW[None, :]).ravel()
                v = pc.velocity(t)
                speed = np.linalg.norm(v, axis=-1)
                pts_all.append(pc.position(t))
                nrm_all.append(pc.normal(t))
                w_all.append(wt * speed)
            return np.vstack(pts_all), np.vstack(nrm_all), np.concatenate(w_all)
        # d = 3: tensor Gauss on (u, v)
        pts_all, nrm_all, w_all = [], [], []
        for pc in self.pieces:
            scale = float(np.max(pc.abc))
            panels_u = max(2, int(np.ceil(np.pi * scale * nodes_per_unit / _GAUSS_N)))
            panels_v = max(2, int(np.ceil(2 * np.pi * scale * nodes_per_unit / _GAUSS_N)))
            eu = np.linspace(0.0, 1.0, panels_u + 1)
            ev = np.linspace(0.0, 1.0, panels_v + 1)
            hu, hv = np.diff(eu) * 0.5, np.diff(ev) * 0.5
            tu = (eu[:-1, None] + hu[:, None] * (1.0 + _GX[None, :])).ravel()
            wu = (hu[:, None] * _GW[None, :]).ravel()
            tv = (ev[:-1, None] + hv[:, None] * (1.0 + _GX[None, :])).ravel()
            wv = (hv[:, None] * _GW[None, :]).ravel()
            U, V = np.meshgrid(tu, tv, indexing="ij")
            W = np.outer(wu, wv)
            Xu, Xv = pc.jacobians(U, V)
            cr = np.cross(Xu, Xv)
            dA = np.linalg.norm(cr, axis=-1)
            nrm = cr / dA[..., None]
            pts_all.append(pc.position(U, V).reshape(-1, 3))
            nrm_all.append(nrm.reshape(-1, 3))
            w_all.append((W * dA).ravel())
        return np.vstack(pts_all), np.vstack(nrm_all), np.concatenate(w_all)

    # boundary sampling / distance ----------------------------------------

    def boundary_polyline(self, spacing):
        """Points on the exact boundary at approximately uniform arc spacing.

        Returns (points (n, 2), tags list of (piece index, t)).  Piece
        endpoints (corners) are always included.
        """
        if self.d != 2:
            raise GeometryError("boundary polyline is 2-D only")
        pts, tags = [], []
        for ip, pc in enumerate(self.pieces):
            L = pc.length()
            n = max(2, int(np.ceil(L / spacing)))
            s = np.linspace(0.0, L, n + 1)[:-1]  # drop endpoint: next piece starts there
            t = pc.param_at_arclength(s)
            t[0] = 0.0
            p = pc.position(t)
            pts.append(p)
            tags.extend((ip, float(ti)) for ti in t)
        return np.vstack(pts), tags

    def _dense_polyline(self, n_per_piece=4096):
        if self._poly_cache is None:
            pts = []
            for pc in self.pieces:
                ts = np.linspace(0.0, 1.0, n_per_piece, endpoint=False)
                pts.append(pc.position(ts))
            self._poly_cache = np.vstack(pts)
        return self._poly_cache

    def distance(self, points):
        """Unsigned distance from points to the boundary.

        Accurate to about (spacing)^2 * curvature/8 of the internal dense
        polyline; intended for boundary-layer cutoffs, not for root finding.
        """
        from scipy.spatial import cKDTree

        poly = self._dense_polyline()
        if not hasattr(self, "_tree"):
            self._tree = cKDTree(poly)
        dist, _ = self._tree.query(np.asarray(points, dtype=float))
        return dist


# -------------------------------------------------------------------------
# non-resonance
# -------------------------------------------------------------------------


def _as_exact_ratio(num, den):
    """num/den as an exact rational if decidable, else None (= irrational/unknown)."""
    try:
        import sympy

        r = sympy.nsimplify(sympy.sympify(num) / sympy.sympify(den), rational=False)
        r = sympy.simplify(r)
        if r.is_rational is True:
            return Fraction(int(sympy.fraction(sympy.Rational(r))[0]), int(sympy.fraction(sympy.Rational(r))[1]))
        if r.is_rational is False:
            return None
    except Exception:
        pass
    return "unknown"


def _float_ratio_to_fraction(r, max_denominator, tol=1e-13):
    fr = Fraction(r).limit_denominator(int(max_denominator))
    if abs(float(fr) - r) <= tol * max(1.0, abs(r)):
        return fr
    return None


def _direction_integer_vector(direction, max_denominator):
    """Primitive integer vector parallel to `direction`, or None if irrational.

    direction entries may be exact (int/Fraction/sympy) or floats.  Floats
    cannot certify irrationality; they are classified by continued-fraction
    reconstruction with denominator bound max_denominator.
    """
    import sympy

    vals = list(direction)
    exact = all(not isinstance(v, float) and not isinstance(v, np.floating) for v in vals)
    floats = [float(sympy.N(v, 30)) if exact else float(v) for v in vals]
    scale = max(abs(f) for f in floats)
    if scale == 0:
        raise GeometryError("zero direction vector")
    j0 = int(np.argmax(np.abs(floats)))
    fracs = []
    for j, v in enumerate(vals):
        if j == j0:
            fracs.append(Fraction(1))
            continue
        if abs(floats[j]) <= 1e-14 * scale:
            fracs.append(Fraction(0))
            continue
        if exact:
            res = _as_exact_ratio(vals[j], vals[j0])
            if res is None:
                return None
            if res != "unknown":
                fracs.append(res)
                continue
        fr = _float_ratio_to_fraction(floats[j] / floats[j0], max_denominator)
        if fr is None:
            return None
        fracs.append(fr)
    lcm = 1
    for fr in fracs:
        lcm = lcm * fr.denominator // gcd(lcm, fr.denominator)
    ints = [int(fr * lcm) for fr in fracs]
    g = 0
    for v in ints:
        g = gcd(g, abs(v))
    ints = [v // g for v in ints]
    if max(abs(v) for v in ints) > max_denominator:
        return None
    return tuple(ints)


def check_non_resonance(surface, lattice=None, max_denominator=10**9):
    """Decide the zero-measure rational-normal condition for a chart.

    lattice : optional (d, d) integer basis matrix of a sublattice of Z^d
    (columns are generators); default is Z^d itself.  A flat piece resonates
    when its normal is parallel to a nonzero lattice vector.
    """
    d = surface.d
    B = np.eye(d, dtype=int) if lattice is None else np.asarray(lattice)
    if abs(np.linalg.det(B)) < 0.5:
        raise GeometryError("degenerate lattice basis")
    Binv = np.linalg.inv(B.astype(float))
    offending = []
    measure = 0.0
    for ip, pc in enumerate(surface.pieces):
        if not pc.flat:
            _certify_curved(pc, ip)
            continue
        n_float, n_exact = pc.constant_normal()
        if lattice is None and n_exact is not None:
            direction = n_exact
        else:
            # transform into lattice coordinates: n || B z  <=>  B^-1 n rational
            direction = tuple(Binv @ n_float) if lattice is not None else tuple(n_float)
            if lattice is not None and n_exact is not None:
                import sympy

                Bs = sympy.Matrix(B.tolist())
                ns = sympy.Matrix([sympy.sympify(c) for c in n_exact])
                direction = tuple(Bs.inv() * ns)
        z = _direction_integer_vector(direction, max_denominator)
        if z is not None:
            k = tuple(int(v) for v in (np.asarray(B) @ np.array(z)))
            offending.append((ip, tuple(float(c) for c in n_float), k))
            measure += pc.length()
    return NonResonanceVerdict(
        satisfies=(measure == 0.0),
        rational_measure=measure,
        offending_pieces=offending,
    )


def _certify_curved(pc, ip, n_samples=128):
    """Reject curved pieces whose curvature vanishes on a sizable set."""
    if getattr(pc, "d", 2) == 3:
        return  # ellipsoid patches are strictly convex by construction
    t = (np.arange(n_samples) + 0.5) / n_samples
    kappa = pc.curvature(t)
    if np.mean(np.abs(kappa) < 1e-12) > 0.25:
        raise NonResonanceUndecidable(
            f"piece {ip}: curvature vanishes on a sizable parameter set; "
            "non-resonance undecidable for this piece type"
        )


def curvature_at(surface, piece_index, parameter):
    """Signed principal curvature(s) w.r.t. the outward normal.

    d=2 returns a scalar; d=3 returns the sorted pair.  Flat pieces raise.
    """
    pc = surface.pieces[piece_index]
    if pc.flat:
        raise GeometryError("curvature undefined on a flat piece")
    if surface.d == 2:
        return float(np.asarray(pc.curvature(parameter)))
    u, v = parameter
    return tuple(np.asarray(pc.principal_curvatures(u, v)).ravel())


# -------------------------------------------------------------------------
# surface spec files
# -------------------------------------------------------------------------


def surface_from_spec(spec):
    """Build a chart from a parsed spec dict {type, params...}.

    Polygon vertices may be floats or exact [numerator, denominator] pairs.
    """
    typ = spec["type"]
    if typ == "circle":
        return SurfaceChart.circle(spec.get("r", 1.0), tuple(spec.get("center", (0.0, 0.0))))
    if typ == "ellipse":
        return SurfaceChart.ellipse(spec["a"], spec["b"], tuple(spec.get("center", (0.0, 0.0))))
    if typ == "square":
        return SurfaceChart.square(spec.get("side", 1.0), tuple(spec.get("corner", (0.0, 0.0))))
    if typ == "polygon":
        raw = spec["vertices"]
        verts, exact = [], []
        has_exact = True
        for vx, vy in raw:
            ex = []
            for c in (vx, vy):
                if isinstance(c, (list, tuple)):
                    ex.append(Fraction(int(c[0]), int(c[1])))
                else:
                    ex.append(None)
                    has_exact = False
            verts.append((float(ex[0]) if ex[0] is not None else float(vx if not isinstance(vx, (list, tuple)) else Fraction(*vx)),
                          float(ex[1]) if ex[1] is not None else float(vy if not isinstance(vy, (list, tuple)) else Fraction(*vy))))
            exact.append(tuple(ex))
        return SurfaceChart.polygon(verts, exact=exact if has_exact else None)
    if typ == "superellipse":
        return SurfaceChart.superellipse(spec["p"])
    if typ == "sphere":
        return SurfaceChart.sphere(spec.get("r", 1.0))
    if typ == "ellipsoid":
        return SurfaceChart.ellipsoid(spec["a"], spec["b"], spec["c"])
    raise GeometryError(f"unknown surface type {typ!r}")


def load_surface(path):
    import json

    path = str(path)
    if path.endswith(".toml"):
        import tomllib

        with open(path, "rb") as fh:
            return surface_from_spec(tomllib.load(fh))
    with open(path) as fh:
        return surface_from_spec(json.load(fh))
