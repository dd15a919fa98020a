"""Periodic coefficient fields: evaluation, means, ellipticity, IO."""

import json

import numpy as np
import pytest

from homolab.fields import (
    FieldError,
    PeriodicField,
    checkerboard_tensor4,
    constant_field,
    cosine_field,
    exp_field,
    field_from_spec,
    isotropic_tensor4,
    laminate_tensor4,
    sine_field,
)

RNG = np.random.default_rng(7)


def test_constant_field_evaluates_and_means():
    f = constant_field(3.5)
    pts = RNG.random((10, 2))
    assert np.allclose(f.evaluate(pts), 3.5)
    assert f.mean() == 3.5


def test_cosine_field_matches_closed_form():
    f = cosine_field((2, -1), amplitude=1.5, offset=0.25)
    pts = RNG.random((50, 2))
    expected = 0.25 + 1.5 * np.cos(2 * np.pi * (2 * pts[:, 0] - pts[:, 1]))
    assert np.allclose(f.evaluate(pts), expected, atol=1e-13)
    assert abs(f.mean() - 0.25) < 1e-15


def test_sine_field_matches_closed_form():
    f = sine_field((1, 1))
    pts = RNG.random((50, 2))
    expected = np.sin(2 * np.pi * (pts[:, 0] + pts[:, 1]))
    assert np.allclose(f.evaluate(pts), expected, atol=1e-13)


def test_exp_field_splits_into_cos_and_sin_parts():
    fc, fs = exp_field((1, 0))
    pts = RNG.random((20, 2))
    assert np.allclose(fc.evaluate(pts), np.cos(2 * np.pi * pts[:, 0]), atol=1e-13)
    assert np.allclose(fs.evaluate(pts), np.sin(2 * np.pi * pts[:, 0]), atol=1e-13)


def test_hermitian_storage_gives_real_values():
    # modes stored on a half lattice; (k, c) and (-k, conj(c)) collapse
    f = PeriodicField("scalar", 2, modes={(1, 2): 0.3 + 0.4j})
    vals = f.evaluate(RNG.random((30, 2)))
    assert np.max(np.abs(np.imag(vals))) == 0.0


def test_periodicity():
    f = cosine_field((3, 2))
    pts = RNG.random((20, 2))
    shift = np.array([4.0, -7.0])
    assert np.allclose(f.evaluate(pts), f.evaluate(pts + shift), atol=1e-12)


def test_grid_field_trig_interpolation_reproduces_smooth_field():
    N = 32
    y = np.arange(N) / N
    Y1, Y2 = np.meshgrid(y, y, indexing="ij")
    grid = np.cos(2 * np.pi * Y1) * np.sin(2 * np.pi * Y2)
    f = PeriodicField("scalar", 2, grid=grid)
    pts = RNG.random((40, 2))
    expected = np.cos(2 * np.pi * pts[:, 0]) * np.sin(2 * np.pi * pts[:, 1])
    assert np.allclose(f.evaluate(pts), expected, atol=1e-10)
    assert abs(f.mean()) < 1e-14


def test_large_grid_field_uses_multilinear_and_wraps():
    N = 128  # N^2 > 4096 -> multilinear path
    grid = RNG.random((N, N))
    f = PeriodicField("scalar", 2, grid=grid)
    # at grid points the interpolant is exact
    pts = np.stack([np.arange(N) / N, np.zeros(N)], axis=1)
    assert np.allclose(f.evaluate(pts), grid[:, 0], atol=1e-13)
    assert np.allclose(f.evaluate(pts + 1.0), grid[:, 0], atol=1e-12)


def test_laminate_ellipticity_bounds():
    A = laminate_tensor4()  # (2 + sin 2 pi y1) I
    rep = A.check_ellipticity(n_samples=2000, seed=0)
    assert rep.elliptic
    assert 0.99 <= rep.mu_lower <= 1.01
    assert 2.99 <= rep.mu_upper <= 3.01


def test_degenerate_field_reported_with_witness():
    A = laminate_tensor4(base=1.0, amplitude=2.0)  # (1 + 2 sin) I dips below 0
    rep = A.check_ellipticity(n_samples=4000, seed=0)
    assert not rep.elliptic
    assert rep.mu_lower < 0
    assert rep.witness_lower is not None and len(rep.witness_lower) > 0


def test_checkerboard_tensor4_values():
    # grid samples sit at p/N for evaluation; interpolation is exact there
    A = checkerboard_tensor4(values=(1.0, 4.0), N=8)
    pts = np.array([[0.0, 0.0], [0.5, 0.0]])
    vals = A.evaluate(pts)[:, 0, 0]  # (n, d, d)
    assert abs(vals[0][0, 0] - 1.0) <= 1e-10
    assert abs(vals[1][0, 0] - 4.0) <= 1e-10


def test_isotropic_tensor4_mean():
    A = isotropic_tensor4(scalar_modes={(0, 0): 2.0, (1, 0): 0.5})
    mean = np.asarray(A.mean())[0, 0]
    assert np.allclose(mean, 2.0 * np.eye(2))


def test_field_from_spec_modes_roundtrip():
    spec = {
        "kind": "scalar",
        "d": 2,
        "modes": [{"k": [0, 0], "re": 2.0}, {"k": [1, 1], "re": 0.25}],
    }
    f = field_from_spec(spec)
    pts = RNG.random((20, 2))
    expected = 2.0 + 0.5 * np.cos(2 * np.pi * (pts[:, 0] + pts[:, 1]))
    assert np.allclose(f.evaluate(pts), expected, atol=1e-13)


def test_field_from_spec_grid(tmp_path):
    N = 16
    grid = RNG.random((N, N))
    raw = tmp_path / "samples.bin"
    grid.astype("<f8").tofile(raw)
    spec = {"kind": "scalar", "d": 2, "grid": {"N": N, "samples": str(raw)}}
    f = field_from_spec(spec)
    assert abs(f.mean() - grid.mean()) < 1e-14


def test_bad_spec_raises():
    with pytest.raises(FieldError):
        field_from_spec({"kind": "scalar", "d": 2})


def test_max_mode():
    f = PeriodicField("scalar", 2, modes={(0, 0): 1.0, (3, -4): 0.1})
    assert f.max_mode() == pytest.approx(5.0)
