"""Periodic cell problems for the correctors and the effective tensor.

Two discretizations are provided and kept consistent between the solve and
the cell-average formula:

* a spectral collocation path for coefficients given as Fourier series
  (smooth A), preconditioned CG in Fourier space;
* a periodic Q1 finite-element path for coefficients given as raw grids
  (rough A, e.g. a checkerboard), where grid samples are taken as
  cell-constant values.

Each right-hand side (j, beta) is an independent solve; results are
immutable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from homolab.fields import PeriodicField, FieldError


class CellSolveError(RuntimeError):
    pass


@dataclass(frozen=True)
class CorrectorSet:
    """Corrector grid functions chi[j, beta, gamma] on the N^d torus."""

    chi: np.ndarray  # shape (d, m, m) + (N,)*d
    N: int
    d: int
    m: int
    method: str  # 'spectral' or 'q1'
    residuals: np.ndarray  # (d, m) discrete L2 residual per column
    iterations: np.ndarray  # (d, m) CG iterations per column

    def __post_init__(self):
        self.chi.setflags(write=False)

    def component(self, j, beta=0, gamma=0):
        return self.chi[j, beta, gamma]

    def means(self):
        axes = tuple(range(3, 3 + self.d))
        return self.chi.mean(axis=axes)

    def evaluate(self, y):
        """Periodic multilinear interpolation of all components at y (..., d)."""
        y = np.asarray(y, dtype=float)
        N = self.N
        u = np.mod(y, 1.0) * N
        i0 = np.floor(u).astype(int) % N
        frac = u - np.floor(u)
        batch = y.shape[:-1]
        out = np.zeros((self.d, self.m, self.m) + batch)
        for corner in range(2**self.d):
            idx = []
            w = np.ones(batch)
            for ax in range(self.d):
                bit = (corner >> ax) & 1
                idx.append((i0[..., ax] + bit) % N)
                w = w * (frac[..., ax] if bit else 1.0 - frac[..., ax])
            out += self.chi[(slice(None),) * 3 + tuple(idx)] * w
        return out


@dataclass(frozen=True)
class HomogenizedTensor:
    """Effective tensor a_hat[alpha, beta, i, j] and effective Robin matrix."""

    a_hat: np.ndarray  # (m, m, d, d)
    b_bar: np.ndarray | None = None  # (m, m) or None

    @property
    def m(self):
        return self.a_hat.shape[0]

    @property
    def d(self):
        return self.a_hat.shape[2]

    @property
    def matrix(self):
        """The (d, d) coefficient matrix for scalar problems (m = 1)."""
        if self.m != 1:
            raise ValueError("matrix view only defined for m = 1")
        return self.a_hat[0, 0]

    def min_ellipticity(self):
        """min over unit xi of the quadratic form (eigenvalue of the symbol)."""
        m, d = self.m, self.d
        Q = self.a_hat.transpose(0, 2, 1, 3).reshape(m * d, m * d)
        return float(np.linalg.eigvalsh(0.5 * (Q + Q.T))[0])

    def symmetry_defect(self):
        """max |a_ij^{ab} - a_ji^{ba}| over all entries."""
        return float(np.max(np.abs(self.a_hat - self.a_hat.transpose(1, 0, 3, 2))))


# -------------------------------------------------------------------------
# spectral collocation path
# -------------------------------------------------------------------------


def _spectral_wavenumbers(N, d):
    k1 = np.fft.fftfreq(N, d=1.0 / N)
    if N % 2 == 0:
        k1 = k1.copy()
        k1[N // 2] = 0.0  # zero the Nyquist mode: keeps d/dy skew-symmetric
    return np.meshgrid(*[k1] * d, indexing="ij")


class _SpectralCellOperator:
    """u -> -div(A grad u) with FFT derivatives on the N^d torus."""

    def __init__(self, Agrid, N, d, m):
        # Agrid: (N,)*d + (m, m, d, d) -> rearrange to (m, m, d, d) + grid
        self.A = np.moveaxis(Agrid, list(range(d, d + 4)), [0, 1, 2, 3])
        self.N, self.d, self.m = N, d, m
        ks = _spectral_wavenumbers(N, d)
        self.ik = [2j * np.pi * k for k in ks]
        ksq = sum(k**2 for k in ks)
        diag = np.einsum("aaii...->...", self.A) / (m * d)
        mu = float(diag.mean())
        sym = 4.0 * np.pi**2 * mu * ksq
        # zero symbol (mean mode and zeroed Nyquist lines) -> drop those modes
        self.inv_sym = np.where(sym > 0.0, 1.0 / np.where(sym > 0.0, sym, 1.0), 0.0)

    def grad(self, u):
        """u (m,)+grid -> (m, d)+grid via FFT."""
        axes = tuple(range(1, 1 + self.d))
        U = np.fft.fftn(u, axes=axes)
        out = np.empty((self.m, self.d) + u.shape[1:])
        for i in range(self.d):
            out[:, i] = np.fft.ifftn(self.ik[i] * U, axes=axes).real
        return out

    def div(self, w):
        """w (m, d)+grid -> (m,)+grid via FFT."""
        axes = tuple(range(2, 2 + self.d))
        W = np.fft.fftn(w, axes=axes)
        acc = np.zeros((self.m,) + w.shape[2:], dtype=complex)
        for i in range(self.d):
            acc += self.ik[i] * W[:, i]
        return np.fft.ifftn(acc, axes=tuple(range(1, 1 + self.d))).real

    def apply(self, u):
        g = self.grad(u)
        flux = np.einsum("agik...,gk...->ai...", self.A, g)
        return -self.div(flux)

    def precond(self, r):
        axes = tuple(range(1, 1 + self.d))
        R = np.fft.fftn(r, axes=axes)
        return np.fft.ifftn(R * self.inv_sym, axes=axes).real

    def rhs(self, j, beta):
        """sum_i d_i a[alpha, beta, i, j] on the grid."""
        col = self.A[:, beta, :, j]  # (m, d) + grid
        return self.div(col)


def _project_zero_mean(u, d):
    axes = tuple(range(1, 1 + d))
    return u - u.mean(axis=axes, keepdims=True)


def _pcg(apply_op, precond, b, tol, maxiter, project=None):
    """Preconditioned CG on ndarray unknowns; returns (x, iters, relres)."""
    if project is not None:
        b = project(b)
    x = np.zeros_like(b)
    r = b.copy()
    bnorm = np.sqrt(np.vdot(b, b).real)
    if bnorm == 0.0:
        return x, 0, 0.0
    z = precond(r)
    if project is not None:
        z = project(z)
    p = z.copy()
    rz = np.vdot(r, z).real
    for it in range(1, maxiter + 1):
        Ap = apply_op(p)
        if project is not None:
            Ap = project(Ap)
        alpha = rz / np.vdot(p, Ap).real
        x += alpha * p
        r -= alpha * Ap
        rnorm = np.sqrt(np.vdot(r, r).real)
        if rnorm <= tol * bnorm:
            return x, it, rnorm / bnorm
        z = precond(r)
        if project is not None:
            z = project(z)
        rz_new = np.vdot(r, z).real
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise CellSolveError(
        f"CG did not converge in {maxiter} iterations (relres {rnorm / bnorm:.2e}); "
        "insufficient ellipticity margin or N too coarse"
    )


# -------------------------------------------------------------------------
# periodic Q1 finite-element path (raw grid coefficients)
# -------------------------------------------------------------------------


def _q1_reference_matrices(h, d):
    """Kref[i][j][a, b] = int_cell d_i phi_a d_j phi_b and Gref[i][a] = int d_i phi_a."""
    import itertools

    corners = list(itertools.product((0, 1), repeat=d))
    gauss = [0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0)]
    qpts = list(itertools.product(gauss, repeat=d))
    wq = (h**d) / len(qpts)
    n = len(corners)
    K = np.zeros((d, d, n, n))
    G = np.zeros((d, n))
    for q in qpts:
        grads = np.zeros((n, d))
        for a, c in enumerate(corners):
            for i in range(d):
                g = 1.0 / h if c[i] == 1 else -1.0 / h
                for ax in range(d):
                    if ax == i:
                        continue
                    g *= q[ax] if c[ax] == 1 else 1.0 - q[ax]
                grads[a, i] = g
        for i in range(d):
            G[i] += wq * grads[:, i]
            for j in range(d):
                K[i, j] += wq * np.outer(grads[:, i], grads[:, j])
    return corners, K, G


def _q1_assemble(Acells, N, d, m):
    """Periodic Q1 stiffness (csr) and reference data for N^d cells."""
    h = 1.0 / N
    corners, Kref, Gref = _q1_reference_matrices(h, d)
    ncorner = len(corners)
    grids = np.meshgrid(*[np.arange(N)] * d, indexing="ij")
    cell_idx = np.stack([g.ravel() for g in grids], axis=-1)  # (ncell, d)
    ncell = len(cell_idx)

    def node_id(pt):
        out = np.zeros(len(pt), dtype=np.int64)
        for ax in range(d):
            out = out * N + (pt[:, ax] % N)
        return out

    conn = np.empty((ncell, ncorner), dtype=np.int64)
    for a, c in enumerate(corners):
        conn[:, a] = node_id(cell_idx + np.array(c))

    A = Acells.reshape((ncell, m, m, d, d))
    # local blocks: (ncell, m*ncorner, m*ncorner) with dof order (alpha, a)
    loc = np.einsum("cabij,ijpq->capbq", A, Kref).reshape(
        ncell, m * ncorner, m * ncorner
    )
    # dof layout: global index = node * m + alpha, local order (alpha, a)
    dof = conn[:, None, :] * m + np.arange(m)[None, :, None]  # (ncell, m, ncorner)
    dof = dof.reshape(ncell, m * ncorner)
    rows = np.repeat(dof, m * ncorner, axis=1).ravel()
    cols = np.tile(dof, (1, m * ncorner)).ravel()
    K = sp.coo_matrix(
        (loc.ravel(), (rows, cols)), shape=(m * N**d, m * N**d)
    ).tocsr()
    return K, conn, Kref, Gref, A


def _q1_rhs(conn, Gref, Acells, N, d, m, j, beta):
    """Load for column (j, beta): rhs_a^alpha = -sum_cells a[alpha,beta,i,j] Gref[i][a]."""
    ncell = conn.shape[0]
    coef = Acells[:, :, beta, :, j]  # (ncell, m, d)
    contrib = -np.einsum("cai,ip->cap", coef, Gref)  # (ncell, m, ncorner)
    rhs = np.zeros(m * N**d)
    np.add.at(rhs, (conn[:, None, :] * m + np.arange(m)[None, :, None]).ravel(), contrib.ravel())
    return rhs


# -------------------------------------------------------------------------
# public operations
# -------------------------------------------------------------------------


def solve_correctors(A, N, tol=1e-12, maxiter=10**4, method=None, check=True):
    """Solve the corrector cell problems on the N^d torus grid.

    Parameters
    ----------
    A : PeriodicField (tensor4)
        Elliptic periodic coefficient.
    N : int
        Grid size, power of two.
    method : {'spectral', 'q1', None}
        None picks spectral for Fourier fields and Q1 for raw grids.
    """
    if A.kind != "tensor4":
        raise FieldError("corrector solve needs a tensor4 coefficient")
    if N & (N - 1):
        raise FieldError("N must be a power of two")
    d, m = A.d, A.m
    if check:
        rep = A.check_ellipticity(n_samples=4096)
        if rep.mu_lower <= 0:
            raise CellSolveError(f"coefficient is not elliptic (mu_lower={rep.mu_lower:.3e})")
    if method is None:
        method = "spectral" if A.is_fourier else "q1"

    chi = np.zeros((d, m, m) + (N,) * d)
    residuals = np.zeros((d, m))
    iterations = np.zeros((d, m), dtype=int)

    if method == "spectral":
        Agrid = A.grid_samples(N)
        op = _SpectralCellOperator(Agrid, N, d, m)
        for j in range(d):
            for beta in range(m):
                b = op.rhs(j, beta)
                x, it, _ = _pcg(
                    op.apply,
                    op.precond,
                    b,
                    tol=tol,
                    maxiter=maxiter,
                    project=lambda u: _project_zero_mean(u, d),
                )
                x = _project_zero_mean(x, d)
                chi[j, beta] = x
                res = op.apply(x) - b
                residuals[j, beta] = np.sqrt(np.mean(res**2))
                iterations[j, beta] = it
    elif method == "q1":
        import pyamg

        if A.is_fourier:
            centers = (np.arange(N) + 0.5) / N
            pts = np.stack(np.meshgrid(*[centers] * d, indexing="ij"), axis=-1)
            Acells = A.evaluate(pts).reshape((-1, m, m, d, d))
        else:
            if A.grid_size != N:
                raise FieldError(
                    f"grid coefficient has N={A.grid_size}, solve requested N={N}"
                )
            Acells = A.grid_samples().reshape((-1, m, m, d, d))
        K, conn, Kref, Gref, Ac = _q1_assemble(Acells, N, d, m)
        ndof = m * N**d
        ones = np.ones(ndof) / np.sqrt(ndof)
        B = np.zeros((ndof, m))
        for a in range(m):
            B[a::m, a] = 1.0
        ml = pyamg.smoothed_aggregation_solver(K.tocsr(), B=B, max_coarse=64)
        M = ml.aspreconditioner(cycle="V")
        h = 1.0 / N

        def project(v):
            out = v.copy()
            for a in range(m):
                out[a::m] -= out[a::m].mean()
            return out

        for j in range(d):
            for beta in range(m):
                b = project(_q1_rhs(conn, Gref, Acells, N, d, m, j, beta))
                x, it, _ = _pcg(
                    lambda v: K @ v,
                    lambda v: M @ v,
                    b,
                    tol=tol * 10,
                    maxiter=maxiter,
                    project=project,
                )
                x = project(x)
                res = K @ x - b
                # weak residual rescaled to a pointwise L2 density
                residuals[j, beta] = np.sqrt(np.sum(res**2)) * h ** (-d / 2.0)
                iterations[j, beta] = it
                for a in range(m):
                    chi[j, beta, a] = x[a::m].reshape((N,) * d)
    else:
        raise FieldError(f"unknown method {method!r}")

    return CorrectorSet(
        chi=chi, N=N, d=d, m=m, method=method, residuals=residuals, iterations=iterations
    )


def homogenize(A, chi, b=None):
    """Effective tensor from the cell average of A + A grad(chi).

    Uses the same discrete gradient as the solve that produced chi.  The
    optional field b supplies the effective Robin matrix b_bar = mean(b).
    """
    if A.kind != "tensor4":
        raise FieldError("homogenize needs a tensor4 coefficient")
    d, m, N = chi.d, chi.m, chi.N
    if A.d != d or A.m != m:
        raise FieldError("coefficient and correctors disagree on (d, m)")
    a_hat = np.zeros((m, m, d, d))
    if chi.method == "spectral":
        Agrid = A.grid_samples(N)
        op = _SpectralCellOperator(Agrid, N, d, m)
        Amean = Agrid.mean(axis=tuple(range(d)))
        a_hat += Amean
        for j in range(d):
            for beta in range(m):
                g = op.grad(chi.chi[j, beta])  # (m(gamma), d(k)) + grid
                corr = np.einsum("agik...,gk...->ai...", op.A, g)
                a_hat[:, beta, :, j] += corr.mean(axis=tuple(range(2, 2 + d)))
    elif chi.method == "q1":
        if A.is_fourier:
            centers = (np.arange(N) + 0.5) / N
            pts = np.stack(np.meshgrid(*[centers] * d, indexing="ij"), axis=-1)
            Acells = A.evaluate(pts).reshape((-1, m, m, d, d))
        else:
            if A.grid_size != N:
                raise FieldError("coefficient grid does not match correctors")
            Acells = A.grid_samples().reshape((-1, m, m, d, d))
        h = 1.0 / N
        corners, Kref, Gref = _q1_reference_matrices(h, d)
        grids = np.meshgrid(*[np.arange(N)] * d, indexing="ij")
        cell_idx = np.stack([g.ravel() for g in grids], axis=-1)
        conn = np.empty((len(cell_idx), len(corners)), dtype=np.int64)
        for a, c in enumerate(corners):
            pt = cell_idx + np.array(c)
            ids = np.zeros(len(pt), dtype=np.int64)
            for ax in range(d):
                ids = ids * N + (pt[:, ax] % N)
            conn[:, a] = ids
        a_hat += Acells.mean(axis=0) * 1.0
        flat = chi.chi.reshape((d, m, m, N**d))
        for j in range(d):
            for beta in range(m):
                nodal = flat[j, beta][:, conn]  # (m(gamma), ncell, ncorner)
                gmean = np.einsum("gcp,kp->cgk", nodal, Gref)  # int_cell d_k chi
                corr = np.einsum("cagik,cgk->ai", Acells, gmean)
                a_hat[:, beta, :, j] += corr  # Gref already carries the h^d volume
    else:
        raise FieldError(f"unknown corrector method {chi.method!r}")
    b_bar = None
    if b is not None:
        bm = b.mean()
        b_bar = np.atleast_2d(np.asarray(bm, dtype=float))
    return HomogenizedTensor(a_hat=a_hat, b_bar=b_bar)


def cell_residual(A, chi):
    """Discrete L2 norm of div(A (grad chi_j^b + e_j e^b)), max over columns.

    Computed in the sense consistent with the discretization that produced
    chi (spectral divergence, or the Q1 weak residual rescaled to an L2
    density).
    """
    if A.kind != "tensor4":
        raise FieldError("cell_residual needs a tensor4 coefficient")
    d, m, N = chi.d, chi.m, chi.N
    worst = 0.0
    if chi.method == "spectral":
        Agrid = A.grid_samples(N)
        op = _SpectralCellOperator(Agrid, N, d, m)
        for j in range(d):
            for beta in range(m):
                r = op.apply(chi.chi[j, beta]) - op.rhs(j, beta)
                worst = max(worst, float(np.sqrt(np.mean(r**2))))
        return worst
    if A.is_fourier:
        centers = (np.arange(N) + 0.5) / N
        pts = np.stack(np.meshgrid(*[centers] * d, indexing="ij"), axis=-1)
        Acells = A.evaluate(pts).reshape((-1, m, m, d, d))
    else:
        if A.grid_size != N:
            raise FieldError("coefficient grid does not match correctors")
        Acells = A.grid_samples().reshape((-1, m, m, d, d))
    K, conn, Kref, Gref, _ = _q1_assemble(Acells, N, d, m)
    h = 1.0 / N
    for j in range(d):
        for beta in range(m):
            b = _q1_rhs(conn, Gref, Acells, N, d, m, j, beta)
            for a in range(m):
                b[a::m] -= b[a::m].mean()
            x = np.empty(m * N**d)
            for a in range(m):
                x[a::m] = chi.chi[j, beta, a].ravel()
            r = K @ x - b
            worst = max(worst, float(np.sqrt(np.sum(r**2)) * h ** (-d / 2.0)))
    return worst
