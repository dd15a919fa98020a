"""Cell problems and effective tensors against closed-form oracles."""

import numpy as np
import pytest

from homolab.cell import cell_residual, homogenize, solve_correctors
from homolab.fields import (
    PeriodicField,
    checkerboard_tensor4,
    isotropic_tensor4,
    laminate_tensor4,
)

SQRT3 = np.sqrt(3.0)  # harmonic mean of 2 + sin(2 pi y)


@pytest.fixture(scope="module")
def laminate_chi():
    A = laminate_tensor4()
    chi = solve_correctors(A, 256)
    return A, chi


def test_laminate_effective_tensor(laminate_chi):
    A, chi = laminate_chi
    hom = homogenize(A, chi)
    a_hat = hom.matrix
    assert abs(a_hat[0, 0] - SQRT3) <= 1e-6
    assert abs(a_hat[1, 1] - 2.0) <= 1e-10
    assert abs(a_hat[0, 1]) <= 1e-10 and abs(a_hat[1, 0]) <= 1e-10


def test_laminate_corrector_matches_closed_form(laminate_chi):
    # chi_1' = sqrt(3)/(2 + sin 2 pi y) - 1 for the laminate
    A, chi = laminate_chi
    N = chi.N
    y = np.arange(N) / N
    c = chi.component(0)  # chi_1 on the grid, constant in y2
    dchi = np.fft.ifft(
        2j * np.pi * np.fft.fftfreq(N, d=1.0 / N) * np.fft.fft(c[:, 0])
    ).real
    expected = SQRT3 / (2.0 + np.sin(2 * np.pi * y)) - 1.0
    assert np.max(np.abs(dchi - expected)) <= 1e-6


def test_corrector_invariants(laminate_chi):
    A, chi = laminate_chi
    assert np.max(np.abs(chi.means())) <= 1e-10
    assert cell_residual(A, chi) <= 1e-8


def test_identity_coefficient_gives_zero_corrector():
    A = isotropic_tensor4(scalar_modes={(0, 0): 1.0})
    chi = solve_correctors(A, 32)
    assert np.max(np.abs(chi.chi)) == 0.0


def test_checkerboard_duality():
    # Dykhne duality: effective tensor of the (1, 4) checkerboard is 2 I
    A = checkerboard_tensor4(values=(1.0, 4.0), N=128)
    chi = solve_correctors(A, 128)
    hom = homogenize(A, chi)
    assert np.max(np.abs(hom.matrix - 2.0 * np.eye(2))) <= 2e-2


def test_q1_and_spectral_paths_agree_on_smooth_coefficient():
    A = laminate_tensor4()
    chi_s = solve_correctors(A, 64, method="spectral")
    chi_q = solve_correctors(A, 64, method="q1")
    hs = homogenize(A, chi_s).matrix
    hq = homogenize(A, chi_q).matrix
    assert np.max(np.abs(hs - hq)) <= 5e-3


def test_homogenize_effective_robin_matrix(laminate_chi):
    A, chi = laminate_chi
    b = PeriodicField("scalar", 2, modes={(0, 0): 2.0, (1, 1): 0.25, (1, -1): 0.25})
    hom = homogenize(A, chi, b=b)
    assert hom.b_bar.item() == 2.0  # zero modes drop exactly


def test_effective_tensor_properties(laminate_chi):
    A, chi = laminate_chi
    hom = homogenize(A, chi)
    assert hom.symmetry_defect() <= 1e-10
    # Voigt-Reuss: harmonic mean <= eigenvalues <= arithmetic mean
    assert SQRT3 - 1e-6 <= hom.min_ellipticity() <= 2.0 + 1e-10


def test_ellipticity_guard():
    A = laminate_tensor4(base=1.0, amplitude=2.0)  # not uniformly elliptic
    with pytest.raises(Exception):
        solve_correctors(A, 32)
