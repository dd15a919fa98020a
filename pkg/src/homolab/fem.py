"""P1 finite elements for Robin and Neumann problems on curved domains.

Scalar equations: -div(A(x/eps) grad u) = F in Omega with the Robin
condition n . A grad u + b(x/eps) u = g on the boundary, plus the
compatible pure-Neumann auxiliary problem driven by oscillating boundary
data.  Boundary integrals run over the exact chart arcs recorded in the
mesh tags, so oscillating data is integrated on the true curve rather
than on chords.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu, cg

from homolab.fields import PeriodicField

# 6-point order-4 triangle rule (barycentric points, weights sum to 1)
_TRI_B = np.array(
    [
        [0.108103018168070, 0.445948490915965, 0.445948490915965],
        [0.445948490915965, 0.108103018168070, 0.445948490915965],
        [0.445948490915965, 0.445948490915965, 0.108103018168070],
        [0.816847572980459, 0.091576213509771, 0.091576213509771],
        [0.091576213509771, 0.816847572980459, 0.091576213509771],
        [0.091576213509771, 0.091576213509771, 0.816847572980459],
    ]
)
_TRI_W = np.array(
    [
        0.223381589678011,
        0.223381589678011,
        0.223381589678011,
        0.109951743655322,
        0.109951743655322,
        0.109951743655322,
    ]
)

DIRECT_SOLVE_LIMIT = 200_000


class FemError(ValueError):
    pass


@dataclass
class RobinSystem:
    """Assembled P1 system K u + Mb u = load."""

    K: sparse.csr_matrix
    Mb: sparse.csr_matrix
    load: np.ndarray
    boundary_weights: np.ndarray  # w_i = int_boundary phi_i dsigma
    mesh: object


def _p1_gradients(vertices, triangles):
    """Constant P1 basis gradients (nt, 3, 2) and element areas (nt,)."""
    v0 = vertices[triangles[:, 0]]
    e1 = vertices[triangles[:, 1]] - v0
    e2 = vertices[triangles[:, 2]] - v0
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    g1 = np.stack([e2[:, 1], -e2[:, 0]], axis=1) / det[:, None]
    g2 = np.stack([-e1[:, 1], e1[:, 0]], axis=1) / det[:, None]
    g0 = -g1 - g2
    return np.stack([g0, g1, g2], axis=1), 0.5 * det


def _coeff_matrix_eval(A, d=2):
    """Normalize a diffusion coefficient to a map points -> (n, d, d)."""
    if A is None:
        return None
    if isinstance(A, np.ndarray):
        Ac = np.asarray(A, dtype=float)
        if Ac.shape == (d, d):
            return lambda y: np.broadcast_to(Ac, (len(y), d, d))
        raise FemError(f"constant coefficient must be ({d}, {d})")
    if isinstance(A, PeriodicField):
        if A.kind == "scalar":
            eye = np.eye(d)
            return lambda y: np.asarray(A.evaluate(y))[:, None, None] * eye
        if A.kind == "matrix":
            return lambda y: np.asarray(A.evaluate(y))
        if A.kind == "tensor4":
            if A.m != 1:
                raise FemError("vector systems are not supported by the P1 solver")
            return lambda y: np.asarray(A.evaluate(y))[:, 0, 0]
        raise FemError(f"unsupported field kind {A.kind!r}")
    return lambda y: np.asarray(A(y))


def _scalar_eval(b):
    """Normalize a scalar coefficient to a map points -> (n,)."""
    if b is None:
        return None
    if np.isscalar(b):
        bc = float(b)
        return lambda y: np.full(len(y), bc)
    if isinstance(b, PeriodicField):
        if b.kind != "scalar":
            raise FemError("boundary coefficient must be scalar")
        return lambda y: np.asarray(b.evaluate(y))
    return lambda y: np.asarray(b(y))


def edge_quadrature(mesh, n_gauss=8):
    """Gauss rule on the exact boundary arcs of every boundary edge.

    Returns (points, weights, s) with points (ne, ng, 2), weights
    (ne, ng) including the curve Jacobian, and the linear trace
    parameters s (ng,) so that phi = (1 - s, s) on each edge.
    """
    xg, wg = np.polynomial.legendre.leggauss(n_gauss)
    s = 0.5 * (xg + 1.0)
    ws = 0.5 * wg
    tags = mesh.boundary_tags
    ne = len(tags)
    pts = np.empty((ne, n_gauss, 2))
    jac = np.empty((ne, n_gauss))
    for ip, piece in enumerate(mesh.surface.pieces):
        sel = np.where(tags[:, 0].astype(int) == ip)[0]
        if len(sel) == 0:
            continue
        t0 = tags[sel, 1]
        t1 = tags[sel, 2]
        tt = t0[:, None] + s[None, :] * (t1 - t0)[:, None]
        p = piece.position(tt.reshape(-1)).reshape(len(sel), n_gauss, 2)
        v = piece.velocity(tt.reshape(-1)).reshape(len(sel), n_gauss, 2)
        pts[sel] = p
        jac[sel] = np.linalg.norm(v, axis=2) * np.abs(t1 - t0)[:, None]
    return pts, jac * ws[None, :], s


def _stiffness(mesh, A=None, eps=None, grads=None, area=None):
    if grads is None:
        grads, area = _p1_gradients(mesh.vertices, mesh.triangles)
    A_eval = _coeff_matrix_eval(A)
    if A_eval is None:
        Ke = np.einsum("tad,tbd,t->tab", grads, grads, area)
    else:
        # element average of A at order-4 volume quadrature
        corners = mesh.vertices[mesh.triangles]  # (nt, 3, 2)
        qp = np.einsum("qc,tcd->tqd", _TRI_B, corners)
        y = qp.reshape(-1, 2)
        if eps is not None:
            y = y / eps
        Aq = A_eval(y).reshape(len(area), len(_TRI_W), 2, 2)
        Abar = np.einsum("q,tqde->tde", _TRI_W, Aq)
        Ke = np.einsum("tad,tde,tbe,t->tab", grads, Abar, grads, area)
    t = mesh.triangles
    rows = np.repeat(t, 3, axis=1).reshape(-1)
    cols = np.tile(t, (1, 3)).reshape(-1)
    K = sparse.coo_matrix(
        (Ke.reshape(-1), (rows, cols)), shape=(mesh.num_vertices,) * 2
    )
    return K.tocsr(), grads, area


def _boundary_mass_and_load(mesh, b=None, g=None, eps=None, n_gauss=8):
    """Boundary mass int b(x/eps) phi_i phi_j dsigma, load int g phi_i dsigma,
    and the plain boundary weights int phi_i dsigma."""
    pts, w, s = edge_quadrature(mesh, n_gauss)
    phi = np.stack([1.0 - s, s], axis=0)  # (2, ng)
    edges = mesh.boundary_edges
    nv = mesh.num_vertices
    b_eval = _scalar_eval(b)
    load = np.zeros(nv)
    weights = np.zeros(nv)
    wphi = np.einsum("eg,ag->ea", w, phi)
    np.add.at(weights, edges[:, 0], wphi[:, 0])
    np.add.at(weights, edges[:, 1], wphi[:, 1])
    if g is not None:
        gq = np.asarray(g(pts.reshape(-1, 2))).reshape(w.shape)
        gw = np.einsum("eg,eg,ag->ea", w, gq, phi)
        np.add.at(load, edges[:, 0], gw[:, 0])
        np.add.at(load, edges[:, 1], gw[:, 1])
    if b_eval is None:
        Mb = sparse.csr_matrix((nv, nv))
    else:
        y = pts.reshape(-1, 2)
        if eps is not None:
            y = y / eps
        bq = b_eval(y).reshape(w.shape)
        Me = np.einsum("eg,eg,ag,bg->eab", w, bq, phi, phi)
        rows = np.repeat(edges, 2, axis=1).reshape(-1)
        cols = np.tile(edges, (1, 2)).reshape(-1)
        Mb = sparse.coo_matrix((Me.reshape(-1), (rows, cols)), shape=(nv, nv)).tocsr()
    return Mb, load, weights


def assemble_robin(mesh, A=None, b=1.0, F=None, g=None, eps=None, n_gauss=8):
    """Assemble the P1 Robin system for
    -div(A(x/eps) grad u) = F,  n . A grad u + b(x/eps) u = g.

    A : None (identity), (2, 2) array, PeriodicField or callable
    b : scalar, PeriodicField or callable (Robin coefficient)
    F : volume source, callable on points or None
    g : boundary source, callable on points or None
    eps : oscillation period for A and b; requires h <= eps / 4
    """
    if eps is not None and mesh.h > eps / 4 + 1e-12:
        raise FemError(f"h={mesh.h} too coarse for eps={eps}: need h <= eps/4")
    K, grads, area = _stiffness(mesh, A, eps)
    Mb, load, weights = _boundary_mass_and_load(mesh, b, g, eps, n_gauss)
    if F is not None:
        corners = mesh.vertices[mesh.triangles]
        qp = np.einsum("qc,tcd->tqd", _TRI_B, corners)
        Fq = np.asarray(F(qp.reshape(-1, 2))).reshape(len(area), len(_TRI_W))
        fe = np.einsum("t,q,tq,qa->ta", area, _TRI_W, Fq, _TRI_B)
        np.add.at(load, mesh.triangles.reshape(-1), fe.reshape(-1))
    return RobinSystem(K=K, Mb=Mb, load=load, boundary_weights=weights, mesh=mesh)


def _amg_preconditioner(M, near_null=None):
    import pyamg

    B = near_null if near_null is not None else np.ones((M.shape[0], 1))
    ml = pyamg.smoothed_aggregation_solver(sparse.csr_matrix(M), B=B)
    return ml.aspreconditioner()


def solve(system, tol=1e-10):
    """Solve the assembled Robin system (SPD); direct below
    DIRECT_SOLVE_LIMIT unknowns, AMG-preconditioned CG above."""
    M = (system.K + system.Mb).tocsc()
    if M.shape[0] <= DIRECT_SOLVE_LIMIT:
        return splu(M).solve(system.load)
    Mcsr = M.tocsr()
    pre = _amg_preconditioner(Mcsr)
    u, info = cg(Mcsr, system.load, rtol=tol, maxiter=2000, M=pre)
    if info != 0:
        raise FemError(f"CG failed to converge (info={info})")
    return u


def solve_neumann_aux(mesh, f, eps, A_hat=None, tol=1e-10, n_gauss=8):
    """Auxiliary pure-Neumann problem with oscillating boundary flux.

    Solves div(A_hat grad v) = 0 with n . A_hat grad v = f(x/eps) - c_eps
    where c_eps is the boundary average of f(x/eps) (the compatibility
    constant), normalized so that int_boundary v dsigma = 0.

    Returns (v, c_eps).
    """
    if mesh.h > eps / 4 + 1e-12:
        raise FemError(f"h={mesh.h} too coarse for eps={eps}: need h <= eps/4")
    K, _, _ = _stiffness(mesh, A_hat)
    pts, w, s = edge_quadrature(mesh, n_gauss)
    phi = np.stack([1.0 - s, s], axis=0)
    f_eval = _scalar_eval(f)
    fq = f_eval(pts.reshape(-1, 2) / eps).reshape(w.shape)
    edges = mesh.boundary_edges
    nv = mesh.num_vertices
    rf = np.zeros(nv)
    weights = np.zeros(nv)
    fw = np.einsum("eg,eg,ag->ea", w, fq, phi)
    wphi = np.einsum("eg,ag->ea", w, phi)
    for a in range(2):
        np.add.at(rf, edges[:, a], fw[:, a])
        np.add.at(weights, edges[:, a], wphi[:, a])
    c_eps = rf.sum() / weights.sum()
    load = rf - c_eps * weights
    scale = max(np.abs(rf).max(), np.abs(load).max(), 1e-300)
    if abs(load.sum()) > 1e-10 * scale * nv:
        raise FemError("Neumann data failed discrete compatibility")
    load -= load.sum() / nv  # exact projection onto range(K)
    ones = np.ones(nv)
    if nv <= DIRECT_SOLVE_LIMIT:
        # regularize the rank-1 kernel, then project back
        reg = (K + sparse.eye(nv) * (K.diagonal().mean() * 1e-12)).tocsc()
        v = splu(reg).solve(load)
    else:
        pre = _amg_preconditioner(K, near_null=ones[:, None])
        v, info = cg(K, load, rtol=tol, maxiter=2000, M=pre)
        if info != 0:
            raise FemError(f"CG failed to converge (info={info})")
    v -= v.mean()
    v -= (weights @ v) / weights.sum()
    return v, float(c_eps)


# ---------------------------------------------------------------------------
# norms


def norm_L2(mesh, u):
    """Exact L2 norm of a P1 function given by nodal values."""
    _, area = _p1_gradients(mesh.vertices, mesh.triangles)
    ue = u[mesh.triangles]
    sq = np.einsum("ta,tb,ab->t", ue, ue, (np.ones((3, 3)) + np.eye(3)) / 12.0)
    return float(np.sqrt(np.sum(area * sq)))


def seminorm_H1(mesh, u):
    grads, area = _p1_gradients(mesh.vertices, mesh.triangles)
    gu = np.einsum("ta,tad->td", u[mesh.triangles], grads)
    return float(np.sqrt(np.sum(area * np.sum(gu * gu, axis=1))))


def norm_H1(mesh, u):
    return float(np.hypot(norm_L2(mesh, u), seminorm_H1(mesh, u)))


def norm_grad_L1(mesh, u):
    grads, area = _p1_gradients(mesh.vertices, mesh.triangles)
    gu = np.einsum("ta,tad->td", u[mesh.triangles], grads)
    return float(np.sum(area * np.linalg.norm(gu, axis=1)))


def norm_Linf(mesh, u):
    return float(np.max(np.abs(u)))


def boundary_norm_L2(mesh, u, n_gauss=8):
    pts, w, s = edge_quadrature(mesh, n_gauss)
    ue = u[mesh.boundary_edges]
    uq = ue[:, 0, None] * (1.0 - s)[None, :] + ue[:, 1, None] * s[None, :]
    return float(np.sqrt(np.sum(w * uq * uq)))


def boundary_mean(mesh, u, n_gauss=8):
    pts, w, s = edge_quadrature(mesh, n_gauss)
    ue = u[mesh.boundary_edges]
    uq = ue[:, 0, None] * (1.0 - s)[None, :] + ue[:, 1, None] * s[None, :]
    return float(np.sum(w * uq) / np.sum(w))


# ---------------------------------------------------------------------------
# first-order two-scale expansion


def _bump_kernel(eps, dx):
    """Normalized C^inf bump supported in a ball of radius eps on a dx grid."""
    n = int(np.ceil(eps / dx))
    ax = np.arange(-n, n + 1) * dx / eps
    X, Y = np.meshgrid(ax, ax, indexing="ij")
    r2 = X * X + Y * Y
    ker = np.zeros_like(r2)
    inside = r2 < 1.0
    ker[inside] = np.exp(-1.0 / (1.0 - r2[inside]))
    return ker / ker.sum()


def _smoothstep(t):
    """Quintic smoothstep: 0 for t <= 0, 1 for t >= 1, C^2 in between."""
    t = np.clip(t, 0.0, 1.0)
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0)


def first_order_expansion(mesh, u0, correctors, eps):
    """Nodal values of the smoothed corrector term
    eps * chi_j(x/eps) * S_eps[eta_eps d_j u0](x).

    u0 : nodal values of the homogenized solution on mesh
    correctors : CorrectorSet (scalar, m=1)
    S_eps is convolution with a bump of radius eps; eta_eps vanishes
    within eps of the boundary and is 1 beyond 2 eps.  Requires
    eps >= 2 h so the gradient of u0 is resolved on the smoothing grid.
    """
    from matplotlib.tri import LinearTriInterpolator, Triangulation
    from scipy.interpolate import RegularGridInterpolator
    from scipy.signal import fftconvolve

    if correctors.m != 1:
        raise FemError("first_order_expansion is scalar-only")
    h = mesh.h
    if eps < 2.0 * h:
        raise FemError(f"eps={eps} < 2 h={h}: smoothing radius unresolved")
    grads, area = _p1_gradients(mesh.vertices, mesh.triangles)
    gu = np.einsum("ta,tad->td", u0[mesh.triangles], grads)  # per element
    # area-weighted nodal gradient recovery
    nv = mesh.num_vertices
    gnod = np.zeros((nv, 2))
    wnod = np.zeros(nv)
    for a in range(3):
        ids = mesh.triangles[:, a]
        np.add.at(gnod, ids, gu * area[:, None])
        np.add.at(wnod, ids, area)
    gnod /= wnod[:, None]

    dx = min(h, eps / 8.0)
    lo = mesh.vertices.min(axis=0) - 2.5 * eps
    hi = mesh.vertices.max(axis=0) + 2.5 * eps
    xs = np.arange(lo[0], hi[0] + dx, dx)
    ys = np.arange(lo[1], hi[1] + dx, dx)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    gp = np.stack([X.ravel(), Y.ravel()], axis=1)

    tri = Triangulation(mesh.vertices[:, 0], mesh.vertices[:, 1], mesh.triangles)
    eta = _smoothstep(mesh.surface.distance(gp) / eps - 1.0).reshape(X.shape)
    ker = _bump_kernel(eps, dx)
    term = np.zeros(nv)
    yn = mesh.vertices / eps
    chi_n = correctors.evaluate(yn)  # (d, 1, 1, nv)
    for j in range(2):
        interp = LinearTriInterpolator(tri, gnod[:, j])
        gj = np.asarray(interp(X.ravel(), Y.ravel()).filled(0.0)).reshape(X.shape)
        sm = fftconvolve(gj * eta, ker, mode="same")
        back = RegularGridInterpolator((xs, ys), sm, bounds_error=False, fill_value=0.0)
        term += eps * chi_n[j, 0, 0] * back(mesh.vertices)
    return term


def duality_check(surface, b, eps, h=None, phi=None, n_gauss=8):
    """Test the boundary-flux duality identity

        int (b_bar - b(x/eps)) phi dsigma
            = int A_hat grad v_eps . grad phi dx + M_eps int phi dsigma

    with v_eps the auxiliary Neumann solution for data b_bar - b(x/eps)
    (A_hat = I).  phi defaults to x -> x_0 (exactly representable in P1).
    Returns (lhs, rhs, gap).
    """
    from homolab.mesh import mesh_domain
    from homolab import oscint

    if h is None:
        h = eps / 8.0
    if phi is None:
        phi = lambda x: x[..., 0]
    mesh = mesh_domain(surface, h)
    bbar = float(b.mean())
    f = lambda y: bbar - np.asarray(b.evaluate(y))
    v, c_eps = solve_neumann_aux(mesh, f, eps)
    K, _, _ = _stiffness(mesh, None)
    phin = np.asarray(phi(mesh.vertices))
    m_eps = c_eps  # boundary average of b_bar - b(x/eps)
    pts, w, _ = edge_quadrature(mesh, n_gauss)
    int_phi = float(np.sum(w * np.asarray(phi(pts.reshape(-1, 2))).reshape(w.shape)))
    rhs = float(phin @ (K @ v)) + m_eps * int_phi
    lhs_osc = oscint.oscillatory_integral(surface, b.evaluate, phi, eps)
    lhs = bbar * int_phi - float(np.real(lhs_osc.value))
    return lhs, rhs, abs(lhs - rhs)
