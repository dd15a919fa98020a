"""1-periodic coefficient fields on the unit torus.

A field is either a truncated Fourier series (complex amplitudes over the
half lattice, completed by Hermitian symmetry so the field is real) or a
uniform grid of N^d samples.  Fields are immutable after construction and
safe to share across workers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

KINDS = ("scalar", "vector", "matrix", "tensor4")


class FieldError(ValueError):
    pass


def _half_lattice_key(k):
    """True if k is the canonical representative of the +/-k pair.

    The canonical half lattice takes the zero mode plus every k whose first
    nonzero component is positive.
    """
    for ki in k:
        if ki > 0:
            return True
        if ki < 0:
            return False
    return True  # zero mode


@dataclass(frozen=True)
class EllipticityReport:
    """Sampled lower/upper bounds of a coefficient's quadratic form."""

    mu_lower: float
    mu_upper: float
    witness_lower: tuple
    witness_upper: tuple

    def __post_init__(self):
        if self.mu_lower > self.mu_upper + 1e-14:
            raise FieldError("mu_lower exceeds mu_upper")

    @property
    def elliptic(self):
        return self.mu_lower > 0


class PeriodicField:
    """A real 1-periodic field y -> value on the unit torus T^d.

    Parameters
    ----------
    kind : str
        One of 'scalar', 'vector', 'matrix', 'tensor4'.  A matrix field has
        component shape (m, m); a tensor4 field (m, m, d, d) indexed as
        a[alpha, beta, i, j].
    d : int
        Spatial dimension, 2 or 3.
    modes : dict, optional
        Map from integer tuple k to complex amplitude (scalar or ndarray of
        the component shape).  Only the canonical half lattice is stored;
        amplitudes on the other half are implied by amp(-k) = conj(amp(k)).
    grid : ndarray, optional
        Samples on the uniform grid, shape (N,)*d + component shape, where
        sample index p corresponds to y = p / N.
    m : int
        System size for vector/matrix/tensor4 kinds.
    """

    def __init__(self, kind, d, *, modes=None, grid=None, m=1):
        if kind not in KINDS:
            raise FieldError(f"unknown kind {kind!r}")
        if d not in (2, 3):
            raise FieldError(f"dimension must be 2 or 3, got {d}")
        if (modes is None) == (grid is None):
            raise FieldError("exactly one of modes/grid must be given")
        self.kind = kind
        self.d = d
        self.m = int(m)
        self.component_shape = {
            "scalar": (),
            "vector": (self.m,),
            "matrix": (self.m, self.m),
            "tensor4": (self.m, self.m, d, d),
        }[kind]

        if modes is not None:
            self._modes = {}
            for k, amp in modes.items():
                k = tuple(int(ki) for ki in k)
                if len(k) != d:
                    raise FieldError(f"mode {k} has wrong dimension")
                amp = np.asarray(amp, dtype=complex)
                if amp.shape != self.component_shape:
                    if self.component_shape == () and amp.shape == ():
                        pass
                    else:
                        raise FieldError(
                            f"amplitude shape {amp.shape} does not match "
                            f"component shape {self.component_shape}"
                        )
                if not _half_lattice_key(k):
                    k = tuple(-ki for ki in k)
                    amp = np.conj(amp)
                if k == (0,) * d and np.max(np.abs(amp.imag)) > 1e-14:
                    raise FieldError("zero mode of a real field must be real")
                if k in self._modes:
                    self._modes[k] = self._modes[k] + amp
                else:
                    self._modes[k] = amp
                self._modes[k].setflags(write=False)
            self._grid = None
        else:
            grid = np.asarray(grid, dtype=float)
            nshape = grid.shape[: grid.ndim - len(self.component_shape)]
            if len(nshape) != d or len(set(nshape)) != 1:
                raise FieldError(
                    f"grid shape {grid.shape} is not (N,)*{d} + {self.component_shape}"
                )
            if grid.shape[d:] != self.component_shape:
                raise FieldError(
                    f"grid component shape {grid.shape[d:]} != {self.component_shape}"
                )
            self._grid = grid.copy()
            self._grid.setflags(write=False)
            self._modes = None

    # -- representation queries -------------------------------------------

    @property
    def is_fourier(self):
        return self._modes is not None

    @property
    def grid_size(self):
        return None if self._grid is None else self._grid.shape[0]

    @property
    def modes(self):
        """Half-lattice modes (read-only view)."""
        if self._modes is None:
            raise FieldError("grid field has no explicit modes")
        return dict(self._modes)

    def grid_samples(self, N=None):
        """Samples on the uniform N^d grid (y = p/N)."""
        if self._grid is not None and (N is None or N == self._grid.shape[0]):
            return self._grid
        if N is None:
            raise FieldError("N required for a Fourier field")
        axes = np.meshgrid(*[np.arange(N) / N] * self.d, indexing="ij")
        pts = np.stack(axes, axis=-1)
        return self.evaluate(pts)

    def max_mode(self):
        """Largest |k|_2 over stored modes (0 for constants); grid fields use N/2."""
        if self._modes is not None:
            norms = [np.linalg.norm(k) for k in self._modes if any(k)]
            return max(norms) if norms else 0.0
        return self._grid.shape[0] / 2

    # -- evaluation -------------------------------------------------------

    def evaluate(self, y):
        """Evaluate the field at points y, shape (..., d).

        Evaluation is exactly 1-periodic.  Fourier fields sum their modes;
        grid fields use trigonometric interpolation when N is a power of two
        and the mode count is moderate, multilinear interpolation otherwise.
        """
        y = np.asarray(y, dtype=float)
        scalar_input = False
        if y.ndim == 1:
            y = y[None, :]
            scalar_input = True
        if y.shape[-1] != self.d:
            raise FieldError(f"points have dimension {y.shape[-1]}, field has {self.d}")
        if self._modes is not None:
            out = self._eval_fourier(y)
        else:
            out = self._eval_grid(y)
        return out[0] if scalar_input else out

    def _eval_fourier(self, y):
        batch = y.shape[:-1]
        out = np.zeros(batch + self.component_shape)
        for k, amp in self._modes.items():
            phase = 2.0 * np.pi * np.tensordot(y, np.array(k, dtype=float), axes=1)
            c = np.cos(phase)
            if k == (0,) * self.d:
                out += np.multiply.outer(np.ones_like(phase), amp.real)
                continue
            s = np.sin(phase)
            # amp e^{i phase} + conj(amp) e^{-i phase} = 2(Re cos - Im sin)
            out += 2.0 * (np.multiply.outer(c, amp.real) - np.multiply.outer(s, amp.imag))
        return out

    def _eval_grid(self, y):
        N = self._grid.shape[0]
        use_trig = (N & (N - 1)) == 0 and N**self.d <= 4096
        if use_trig:
            return self._eval_grid_trig(y)
        return self._eval_grid_multilinear(y)

    def _eval_grid_multilinear(self, y):
        N = self._grid.shape[0]
        u = np.mod(y, 1.0) * N
        i0 = np.floor(u).astype(int) % N
        frac = u - np.floor(u)
        batch = y.shape[:-1]
        out = np.zeros(batch + self.component_shape)
        for corner in range(2**self.d):
            idx = []
            w = np.ones(batch)
            for ax in range(self.d):
                bit = (corner >> ax) & 1
                idx.append((i0[..., ax] + bit) % N)
                w = w * (frac[..., ax] if bit else 1.0 - frac[..., ax])
            vals = self._grid[tuple(idx)]
            out += vals * w.reshape(batch + (1,) * len(self.component_shape))
        return out

    def _eval_grid_trig(self, y):
        N = self._grid.shape[0]
        coeff = np.fft.fftn(self._grid, axes=tuple(range(self.d))) / N**self.d
        ks = np.fft.fftfreq(N, d=1.0 / N)
        grids = np.meshgrid(*[ks] * self.d, indexing="ij")
        kvec = np.stack([g.ravel() for g in grids], axis=-1)  # (N^d, d)
        # zero the Nyquist modes (they would break conjugate symmetry)
        nyq = np.any(np.abs(kvec) == N // 2, axis=-1) if N % 2 == 0 else np.zeros(len(kvec), bool)
        cflat = coeff.reshape((N**self.d,) + self.component_shape).copy()
        cflat[nyq] = 0.0
        batch = y.shape[:-1]
        yflat = y.reshape(-1, self.d)
        phase = 2.0 * np.pi * yflat @ kvec.T  # (P, N^d)
        basis = np.exp(1j * phase)
        vals = np.tensordot(basis, cflat, axes=1).real
        return vals.reshape(batch + self.component_shape)

    # -- reductions -------------------------------------------------------

    def mean(self):
        """Exact torus mean: zeroth Fourier mode / trapezoidal grid sum."""
        if self._modes is not None:
            z = self._modes.get((0,) * self.d)
            if z is None:
                return np.zeros(self.component_shape) if self.component_shape else 0.0
            out = z.real
            return float(out) if self.component_shape == () else np.array(out)
        axes = tuple(range(self.d))
        out = self._grid.mean(axis=axes)
        return float(out) if self.component_shape == () else out

    def check_ellipticity(self, n_samples=10**4, seed=0):
        """Sample the ellipticity bounds of a matrix/tensor4 field.

        Samples y on a deterministic lattice plus seeded random points and
        minimizes/maximizes the quadratic form over directions exactly via
        the eigenvalues of the symmetrized component matrix.
        """
        if self.kind not in ("matrix", "tensor4"):
            raise FieldError("ellipticity is defined for matrix/tensor4 fields")
        n_axis = max(2, int(round(n_samples ** (1.0 / self.d))))
        axes = np.meshgrid(*[np.arange(n_axis) / n_axis] * self.d, indexing="ij")
        lattice = np.stack(axes, axis=-1).reshape(-1, self.d)
        rng = np.random.default_rng(seed)
        extra = rng.random((max(0, n_samples - len(lattice)), self.d))
        pts = np.vstack([lattice, extra]) if len(extra) else lattice
        vals = self.evaluate(pts)
        if self.kind == "matrix":
            mats = vals
        else:
            # quadratic form a[alpha,beta,i,j] xi_i^alpha xi_j^beta as an
            # (m*d, m*d) matrix over the flattened direction xi
            m, d = self.m, self.d
            mats = vals.transpose(0, 1, 3, 2, 4).reshape(len(pts), m * d, m * d)
        sym = 0.5 * (mats + np.swapaxes(mats, -1, -2))
        eig = np.linalg.eigvalsh(sym)
        lo = eig[:, 0]
        hi = eig[:, -1]
        ilo = int(np.argmin(lo))
        ihi = int(np.argmax(hi))
        return EllipticityReport(
            mu_lower=float(lo[ilo]),
            mu_upper=float(hi[ihi]),
            witness_lower=tuple(pts[ilo]),
            witness_upper=tuple(pts[ihi]),
        )


# -- convenience constructors ---------------------------------------------


def constant_field(value, d=2):
    """Constant scalar/matrix field from a number or square array."""
    value = np.asarray(value, dtype=float)
    if value.shape == ():
        return PeriodicField("scalar", d, modes={(0,) * d: complex(value)})
    m = value.shape[0]
    return PeriodicField("matrix", d, modes={(0,) * d: value.astype(complex)}, m=m)


def cosine_field(k, amplitude=1.0, offset=0.0, d=2):
    """offset + amplitude*cos(2 pi k.y) as a Fourier scalar field."""
    k = tuple(int(ki) for ki in k)
    modes = {k: amplitude / 2.0 + 0j}
    if offset:
        modes[(0,) * d] = complex(offset)
    return PeriodicField("scalar", d, modes=modes)


def sine_field(k, amplitude=1.0, offset=0.0, d=2):
    """offset + amplitude*sin(2 pi k.y) as a Fourier scalar field."""
    k = tuple(int(ki) for ki in k)
    modes = {k: -0.5j * amplitude}
    if offset:
        modes[(0,) * d] = complex(offset)
    return PeriodicField("scalar", d, modes=modes)


def exp_field(k, d=2):
    """Complex exponential e^{2 pi i k.y} split as (cos part, sin part).

    Returned as a pair of real fields; oscillatory integrals of the complex
    mode combine them as cos + i sin.
    """
    return cosine_field(k, d=d), sine_field(k, d=d)


def isotropic_tensor4(scalar_modes=None, scalar_grid=None, d=2, m=1):
    """Tensor4 field a[alpha,beta,i,j] = a(y) delta_ab delta_ij from scalar data."""
    eye = np.einsum("ab,ij->abij", np.eye(m), np.eye(d))
    if scalar_modes is not None:
        modes = {k: np.asarray(amp, dtype=complex) * eye for k, amp in scalar_modes.items()}
        return PeriodicField("tensor4", d, modes=modes, m=m)
    grid = np.asarray(scalar_grid, dtype=float)
    full = grid[(...,) + (None,) * 4] * eye
    return PeriodicField("tensor4", d, grid=full, m=m)


def laminate_tensor4(d=2, m=1, base=2.0, amplitude=1.0, direction=0):
    """A(y) = (base + amplitude*sin(2 pi y_dir)) * Id, the 1-D laminate."""
    eye = np.einsum("ab,ij->abij", np.eye(m), np.eye(d))
    k = tuple(1 if i == direction else 0 for i in range(d))
    modes = {
        (0,) * d: base * eye.astype(complex),
        k: -0.5j * amplitude * eye,
    }
    return PeriodicField("tensor4", d, modes=modes, m=m)


def checkerboard_tensor4(values=(1.0, 4.0), N=512, d=2):
    """2x2 periodic checkerboard scalar coefficient sampled on an N^d grid.

    Samples live at cell centers y = (p + 1/2)/N so the material interfaces
    fall exactly between samples when N is even.
    """
    if d != 2:
        raise FieldError("checkerboard is 2-D")
    centers = (np.arange(N) + 0.5) / N
    X, Y = np.meshgrid(centers, centers, indexing="ij")
    parity = (np.floor(2 * X) + np.floor(2 * Y)) % 2
    a = np.where(parity == 0, values[0], values[1])
    return isotropic_tensor4(scalar_grid=a, d=2, m=1)


# -- field spec files ------------------------------------------------------


def load_field(path):
    """Load a field spec from JSON or TOML.

    Schema: {kind, d, m?, modes: [{k, re, im}]} or
    {kind, d, grid: {N, samples: <binary path>}} with row-major float64 LE
    samples.
    """
    path = str(path)
    if path.endswith(".toml"):
        import tomllib

        with open(path, "rb") as fh:
            spec = tomllib.load(fh)
    else:
        with open(path) as fh:
            spec = json.load(fh)
    return field_from_spec(spec, base=path)


def field_from_spec(spec, base=None):
    """Build a PeriodicField from a parsed spec dict."""
    import os

    kind = spec["kind"]
    d = int(spec["d"])
    m = int(spec.get("m", 1))
    if "modes" in spec:
        comp_shape = {
            "scalar": (),
            "vector": (m,),
            "matrix": (m, m),
            "tensor4": (m, m, d, d),
        }[kind]
        modes = {}
        for entry in spec["modes"]:
            k = tuple(int(x) for x in entry["k"])
            re = np.asarray(entry.get("re", 0.0), dtype=float)
            im = np.asarray(entry.get("im", 0.0), dtype=float)
            amp = np.broadcast_to(re, comp_shape).astype(complex) + 1j * np.broadcast_to(
                im, comp_shape
            )
            if k in modes:
                modes[k] = modes[k] + amp
            else:
                modes[k] = amp
        return PeriodicField(kind, d, modes=modes, m=m)
    if "grid" in spec:
        g = spec["grid"]
        N = int(g["N"])
        sample_path = g["samples"]
        if base is not None and not os.path.isabs(sample_path):
            sample_path = os.path.join(os.path.dirname(base), sample_path)
        raw = np.fromfile(sample_path, dtype="<f8")
        comp_shape = {
            "scalar": (),
            "vector": (m,),
            "matrix": (m, m),
            "tensor4": (m, m, d, d),
        }[kind]
        shape = (N,) * d + comp_shape
        return PeriodicField(kind, d, grid=raw.reshape(shape), m=m)
    raise FieldError("spec must contain 'modes' or 'grid'")
