"""Acceptance gate: the ten primary criteria, one printed verdict line each.

Each test prints `[PRIMARY n] <what it checks>: PASS|FAIL` before asserting,
so the verdict table survives in the pytest output either way.  Criteria
that are unattainable as stated (3 in part, 4, 6) are implemented
faithfully and left red; the analysis lives in the project notes.
"""

import numpy as np
import pytest
from scipy.special import j0

import conftest

from homolab import fem, oscint
from homolab.cell import cell_residual, homogenize, solve_correctors
from homolab.fields import (
    PeriodicField,
    checkerboard_tensor4,
    cosine_field,
    isotropic_tensor4,
    laminate_tensor4,
    sine_field,
)
from homolab.geometry import SurfaceChart, check_non_resonance
from homolab.harness import ExperimentConfig, run
from homolab.mesh import mesh_domain

SQRT3 = np.sqrt(3.0)


def _verdict(n, label, ok):
    line = f"[PRIMARY {n}] {label}: {'PASS' if ok else 'FAIL'}"
    print(f"\n{line}", flush=True)
    conftest.PRIMARY_VERDICTS.append((n, line))
    assert ok, line


def test_primary_1_effective_tensor_oracles():
    A = laminate_tensor4()
    hom = homogenize(A, solve_correctors(A, 256))
    lam_ok = (
        abs(hom.matrix[0, 0] - SQRT3) <= 1e-6 and abs(hom.matrix[1, 1] - 2.0) <= 1e-10
    )
    gaps = []
    for N in (128, 256, 512):
        Ac = checkerboard_tensor4(values=(1.0, 4.0), N=N)
        homc = homogenize(Ac, solve_correctors(Ac, N))
        gaps.append(float(np.max(np.abs(homc.matrix - 2.0 * np.eye(2)))))
    chk_ok = gaps[-1] <= 2e-2 and all(b < a for a, b in zip(gaps, gaps[1:]))
    _verdict(
        1,
        "laminate a_hat = diag(sqrt 3, 2), checkerboard -> 2I monotonically",
        lam_ok and chk_ok,
    )


def test_primary_2_corrector_invariants():
    A = laminate_tensor4()
    chi = solve_correctors(A, 256)
    ok = np.max(np.abs(chi.means())) <= 1e-10 and cell_residual(A, chi) <= 1e-8
    chi_id = solve_correctors(isotropic_tensor4(scalar_modes={(0, 0): 1.0}), 64)
    ok = ok and np.max(np.abs(chi_id.chi)) == 0.0
    _verdict(2, "corrector mean/residual invariants, identity -> chi = 0", ok)


def test_primary_3_equidistribution_slopes():
    circle = SurfaceChart.circle()
    eps = [2.0**-k for k in range(5, 10)]
    ok = True
    for f, kabs in (
        (cosine_field((1, 0)), 1.0),
        (sine_field((0, 1)), None),  # integrates to exactly zero
        (cosine_field((1, 1)), np.sqrt(2.0)),
    ):
        series = oscint.weyl_defect_series(circle, f, None, eps)
        for (e, _, defect, _) in series.entries:
            oracle = 0.0 if kabs is None else 2 * np.pi * abs(j0(2 * np.pi * kabs / e))
            ok = ok and abs(defect - oracle) <= 1e-6
        slope, _, _ = oscint.fit_decay_slope(series)
        ok = ok and (slope == oscint.EXACT_SLOPE or abs(slope - 0.5) <= 0.05)
    _verdict(3, "circle Weyl defects match Bessel oracle with slope 0.5 +/- 0.05", ok)


def test_primary_4_square_resonance():
    square = SurfaceChart.square()
    f = cosine_field((1, 0))
    ok = True
    for n in (8, 16, 32, 64):
        r = oscint.oscillatory_integral(square, f, None, 1.0 / n)
        defect = abs(r.value - 0.0)  # mean of f is 0
        ok = ok and abs(defect - 1.0) <= 1e-8
    verdict = check_non_resonance(square)
    ok = ok and (not verdict.satisfies) and abs(verdict.rational_measure - 4.0) <= 1e-12
    _verdict(4, "square resonance: defect constant 1, non-resonance check fails", ok)


def test_primary_5_m_eps_decay():
    circle = SurfaceChart.circle()
    b = cosine_field((1, 0))
    eps = [2.0**-k for k in range(5, 10)]
    ok = True
    pairs = []
    for e in eps:
        M = oscint.m_epsilon(circle, b, e)
        ok = ok and abs(M - (-j0(2 * np.pi / e))) <= 1e-6
        pairs.append((e, abs(M)))
    slope, _, _ = oscint.fit_decay_slope(pairs)
    ok = ok and abs(slope - 0.5) <= 0.1
    _verdict(5, "M_eps = -J0(2 pi / eps) with slope 0.5 +/- 0.1", ok)


def test_primary_6_neumann_aux_sweeps():
    circle = SurfaceChart.circle()
    eps = [2.0**-k for k in range(3, 8)]
    f = lambda y: np.cos(2 * np.pi * y[:, 0])
    linf, gl1, bmean = [], [], []
    for e in eps:
        mesh = mesh_domain(circle, e / 8.0)
        v, _ = fem.solve_neumann_aux(mesh, f, e)
        linf.append((e, fem.norm_Linf(mesh, v)))
        gl1.append((e, fem.norm_grad_L1(mesh, v)))
        bmean.append(abs(fem.boundary_mean(mesh, v)))
    s_linf, _, _ = oscint.fit_decay_slope(linf)
    s_gl1, _, _ = oscint.fit_decay_slope(gl1)
    ok = s_linf >= 0.4 and s_gl1 >= 0.8 and max(bmean) <= 1e-8
    print(f"\n  slopes: Linf {s_linf:.3f} (>= 0.4), grad L1 {s_gl1:.3f} (>= 0.8)")
    _verdict(6, "auxiliary Neumann sweeps meet slope/boundary-mean targets", ok)


def test_primary_7_duality_identity():
    b = cosine_field((1, 0))
    ok = True
    for e in (1 / 8, 1 / 16):
        lhs, rhs, gap = fem.duality_check(SurfaceChart.circle(), b, e)
        ok = ok and gap <= 1e-4 * (abs(lhs) + 1.0)
    _verdict(7, "boundary-flux duality identity gap <= 1e-4 (|lhs| + 1)", ok)


def test_primary_8_robin_rate_structure():
    raw = {
        "kind": "robin_rate",
        "surface": {"type": "circle"},
        "eps": [1 / 4, 1 / 8, 1 / 16, 1 / 32],
        "A": "laminate",
        "b": {
            "kind": "scalar",
            "d": 2,
            "modes": [
                {"k": [0, 0], "re": 2.0},
                {"k": [1, 1], "re": 0.25},
                {"k": [1, -1], "re": 0.25},
            ],
        },
        "g": "x1^2-x2^2",
        "h": 1 / 256,
        "target_slope": 0.5,
        "drop_first": 0,
    }
    report = run(ExperimentConfig.from_dict(raw))
    slope = report.slopes["l2"]["slope"]
    checks = {c["name"]: c["passed"] for c in report.checks}
    ok = (
        slope >= 0.5
        and checks["l2_strictly_decreasing"]
        and checks["corrector_improvement"]
    )
    print(f"\n  L2 slope {slope:.3f}, checks {checks}")
    _verdict(8, "Robin rate: L2 error decreasing with slope >= 0.5, corrector helps", ok)


def test_primary_9_effective_boundary_coefficient():
    A = laminate_tensor4()
    chi = solve_correctors(A, 64)
    b1 = PeriodicField("scalar", 2, modes={(0, 0): 2.0, (1, 0): 0.3})
    b2 = PeriodicField(
        "scalar", 2, modes={(0, 0): 2.0, (1, 1): 0.25, (1, -1): 0.25}
    )
    hom1 = homogenize(A, chi, b=b1)
    hom2 = homogenize(A, chi, b=b2)
    mesh = mesh_domain(SurfaceChart.circle(), 1 / 16)
    g = lambda x: x[:, 0]
    sys1 = fem.assemble_robin(mesh, A=hom1.matrix, b=hom1.b_bar.item(), g=g)
    sys2 = fem.assemble_robin(mesh, A=hom2.matrix, b=hom2.b_bar.item(), g=g)
    bitwise = (
        hom1.b_bar.item() == hom2.b_bar.item()
        and np.array_equal(sys1.K.data, sys2.K.data)
        and np.array_equal(sys1.Mb.data, sys2.Mb.data)
        and np.array_equal(sys1.load, sys2.load)
    )
    # constant A and b: the oscillation is invisible at every eps
    mesh2 = mesh_domain(SurfaceChart.circle(), 1 / 64)
    u0 = fem.solve(fem.assemble_robin(mesh2, A=None, b=2.0, g=g))
    const_ok = True
    for e in (1 / 8, 1 / 16):
        ue = fem.solve(fem.assemble_robin(mesh2, A=None, b=2.0, g=g, eps=e))
        const_ok = const_ok and np.max(np.abs(ue - u0)) <= 1e-9
    _verdict(
        9, "equal-mean b -> identical homogenized assembly; constant data inert", bitwise and const_ok
    )


def test_primary_10_manufactured_fem_order():
    # u0 = x1 solves the disk Robin problem with A = I, b = 1, g = 2 x1
    errors = []
    hs = (0.1, 0.05, 0.025)
    for h in hs:
        mesh = mesh_domain(SurfaceChart.circle(), h)
        u = fem.solve(fem.assemble_robin(mesh, b=1.0, g=lambda x: 2.0 * x[:, 0]))
        errors.append(fem.norm_L2(mesh, u - mesh.vertices[:, 0]))
    order = np.polyfit(np.log(hs), np.log(errors), 1)[0]
    ok = abs(order - 2.0) <= 0.2
    print(f"\n  L2 errors {errors}, order {order:.3f}")
    _verdict(10, "manufactured Robin solution converges at L2 order 2.0 +/- 0.2", ok)
