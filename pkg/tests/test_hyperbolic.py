"""Unit tests for the hyperbolic-disc FEM stack.

Oracles first: the Euclidean unit square has Dirichlet lambda_1 = 2 pi^2
for functions and relative lambda_1 = pi^2 for 1-forms; the hyperbolic
ball values come from an independent radial shooting table; the model
primitive of the area form has pointwise norm identically 1.
"""

from __future__ import annotations

import math
import struct

import numpy as np
import pytest
import scipy.linalg
import scipy.sparse as sp

from llab.hyperbolic.assembly import (
    SparseSymmetricMatrix,
    assemble_hodge_laplacian,
    edge_structure,
    incidence_d0,
    incidence_d1,
    mass_p1,
    mass_whitney1,
    mass_whitney2,
    stiffness_p1,
)
from llab.hyperbolic.eigensolve import (
    LanczosNonConvergence,
    min_ritz_value,
    smallest_eigenpairs,
)
from llab.hyperbolic.forms import (
    AnnulusDecayTable,
    annulus_decay,
    bounded_primitive,
    crossterm_constant,
    cutoff_family,
)
from llab.hyperbolic.mesh import (
    DiscMesh,
    MeshBudgetError,
    build_disc_mesh,
    cached_disc_mesh,
    load_mesh,
    predicted_vertex_count,
    save_mesh,
    square_patch,
)
from llab.hyperbolic.oracle import (
    SHOOTING_LAMBDA1,
    lambda1_ball_shooting,
    lambda1_euclidean_disc,
    lambda1_euclidean_square,
    lambda1_square_k1,
)


# ---------------------------------------------------------------------------
# mesh construction
# ---------------------------------------------------------------------------


def test_mesh_invariants(small_mesh):
    m = small_mesh
    assert m.metric == "hyperbolic"
    assert m.triangles.dtype == np.int32
    # all triangles CCW: positive signed areas
    assert m.triangle_areas().min() > 0
    # quality floor enforced by the builder
    assert m.min_angle_degrees() >= 15.0
    # boundary ring sits at geodesic radius R
    rho = m.geodesic_radius(m.vertices)
    assert rho[m.boundary].min() == pytest.approx(m.R, rel=1e-9)
    assert rho.max() == pytest.approx(m.R, rel=1e-9)
    # interior = complement of boundary
    assert len(m.interior) + int(m.boundary.sum()) == m.n_vertices


def test_mesh_euler_characteristic(small_mesh):
    # disc: V - E + F = 1
    es = edge_structure(small_mesh)
    V, E, F = small_mesh.n_vertices, len(es.edges), small_mesh.n_triangles
    assert V - E + F == 1


def test_predicted_vertex_count_matches(small_mesh):
    assert predicted_vertex_count(2.0, 0.25) == small_mesh.n_vertices


def test_mesh_parameter_validation():
    with pytest.raises(ValueError):
        build_disc_mesh(R=0.0, h=0.1)
    with pytest.raises(ValueError):
        build_disc_mesh(R=2.0, h=3.0)  # h >= R
    with pytest.raises(ValueError):
        build_disc_mesh(R=14.0, h=0.5)  # R > 12: conformal factor overflow risk


def test_mesh_budget_error():
    # area growth ~ e^R: R = 12 at tiny h blows the vertex budget before
    # any allocation happens
    with pytest.raises(MeshBudgetError):
        build_disc_mesh(R=12.0, h=0.01)


def test_mu_and_radius():
    m = build_disc_mesh(R=1.0, h=0.3)
    pts = np.array([[0.0, 0.0], [0.3, 0.0]])
    mu = m.mu(pts)
    assert mu[0] == pytest.approx(4.0)
    assert mu[1] == pytest.approx(4.0 / (1 - 0.09) ** 2)
    assert m.geodesic_radius(pts)[0] == 0.0
    assert m.geodesic_radius(pts)[1] == pytest.approx(2.0 * np.arctanh(0.3))


def test_square_patch_is_euclidean():
    sq = square_patch(8)
    assert sq.metric == "euclidean"
    assert np.allclose(sq.mu(sq.vertices), 1.0)
    assert sq.triangle_areas().min() > 0
    assert sq.n_vertices == 81


# ---------------------------------------------------------------------------
# mesh cache
# ---------------------------------------------------------------------------


def test_mesh_save_load_roundtrip(small_mesh, tmp_path):
    p = tmp_path / "m.llabmesh"
    save_mesh(small_mesh, p)
    m2 = load_mesh(p)
    assert np.array_equal(small_mesh.vertices, m2.vertices)
    assert np.array_equal(small_mesh.triangles, m2.triangles)
    assert np.array_equal(small_mesh.boundary, m2.boundary)
    assert (m2.R, m2.h, m2.metric) == (small_mesh.R, small_mesh.h, small_mesh.metric)


def test_cached_disc_mesh_hits_cache(tmp_path):
    m1 = cached_disc_mesh(1.5, 0.3, cache_dir=tmp_path)
    files = list(tmp_path.iterdir())
    assert len(files) == 1
    m2 = cached_disc_mesh(1.5, 0.3, cache_dir=tmp_path)
    assert np.array_equal(m1.vertices, m2.vertices)
    # no cache dir -> plain build
    m3 = cached_disc_mesh(1.5, 0.3, cache_dir=None)
    assert np.array_equal(m1.vertices, m3.vertices)


def test_cache_version_mismatch_rejected(small_mesh, tmp_path):
    p = tmp_path / "m.llabmesh"
    save_mesh(small_mesh, p)
    raw = bytearray(p.read_bytes())
    assert raw[:8] == b"LLABMESH"
    raw[8] = raw[8] + 1  # bump the format version byte
    p.write_bytes(bytes(raw))
    with pytest.raises(ValueError):
        load_mesh(p)


def test_corrupt_cache_rebuilds(tmp_path):
    m1 = cached_disc_mesh(1.5, 0.3, cache_dir=tmp_path)
    cache_file = next(tmp_path.iterdir())
    cache_file.write_bytes(b"garbage not a mesh")
    m2 = cached_disc_mesh(1.5, 0.3, cache_dir=tmp_path)  # silently rebuilt
    assert np.array_equal(m1.vertices, m2.vertices)


# ---------------------------------------------------------------------------
# assembly: Euclidean oracles
# ---------------------------------------------------------------------------


def test_square_lambda1_k0(square24):
    A, M = assemble_hodge_laplacian(square24, k=0)
    lams, _, _ = smallest_eigenpairs(A.as_scipy(), M.as_scipy(), nev=1, shift=0.0)
    oracle = lambda1_euclidean_square()
    assert oracle == pytest.approx(2 * math.pi**2, rel=1e-14)
    assert lams[0] == pytest.approx(oracle, rel=7e-3)  # P1 at h = 1/24


def test_square_lambda1_k1(square24):
    A, M = assemble_hodge_laplacian(square24, k=1)
    lams, _, _ = smallest_eigenpairs(A.as_scipy(), M.as_scipy(), nev=3, shift=0.0)
    oracle = lambda1_square_k1()
    assert oracle == pytest.approx(math.pi**2, rel=1e-14)
    # pi^2 is doubly degenerate for relative-boundary 1-forms on a square
    assert lams[0] == pytest.approx(oracle, rel=1e-2)
    assert lams[1] == pytest.approx(oracle, rel=1e-2)
    assert lams[2] == pytest.approx(2 * math.pi**2, rel=3e-2)


def test_square_k0_richardson_hits_oracle():
    # two mesh sizes + second-order extrapolation: error drops well below
    # the single-mesh discretization error
    vals = {}
    for nx in (12, 24):
        A, M = assemble_hodge_laplacian(square_patch(nx), k=0)
        lams, _, _ = smallest_eigenpairs(A.as_scipy(), M.as_scipy(), nev=1, shift=0.0)
        vals[nx] = lams[0]
    lam_ext = vals[24] + (vals[24] - vals[12]) / (2**2 - 1)
    assert lam_ext == pytest.approx(2 * math.pi**2, rel=2e-4)


def test_stiffness_conformal_invariance(small_mesh):
    # k = 0 stiffness in 2D is metric-independent: hyperbolic == flat cotan
    K = stiffness_p1(small_mesh)
    flat = DiscMesh(
        vertices=small_mesh.vertices,
        triangles=small_mesh.triangles,
        boundary=small_mesh.boundary,
        R=small_mesh.R,
        h=small_mesh.h,
        metric="euclidean",
    )
    K_flat = stiffness_p1(flat)
    assert abs(K - K_flat).max() < 1e-12 * abs(K).max()


def test_mass_matrices_positive(small_mesh):
    es = edge_structure(small_mesh)
    for mat in (mass_p1(small_mesh), mass_whitney1(small_mesh, es)):
        mat_d = mat.toarray()
        assert np.allclose(mat_d, mat_d.T, atol=1e-14)
        assert np.linalg.eigvalsh(mat_d).min() > 0
    m2 = mass_whitney2(small_mesh).toarray()
    assert np.all(np.diag(m2) > 0)


def test_hyperbolic_mass_total_area(small_mesh):
    # sum of the P1 mass matrix = |B_R| = 4 pi sinh^2(R/2), approximated
    # by midpoint quadrature on a piecewise-flat mesh (O(h^2) accurate)
    M = mass_p1(small_mesh)
    area = float(M.sum())
    exact = 4 * math.pi * math.sinh(small_mesh.R / 2) ** 2
    assert area == pytest.approx(exact, rel=2e-2)


def test_discrete_complex_d1_after_d0_vanishes(small_mesh):
    es = edge_structure(small_mesh)
    D0 = incidence_d0(small_mesh, es)
    D1 = incidence_d1(small_mesh, es)
    comp = D1 @ D0
    assert abs(comp).max() == 0  # exact integer cancellation


def test_sparse_symmetric_wrapper(small_mesh):
    A, M = assemble_hodge_laplacian(small_mesh, k=0)
    assert isinstance(A, SparseSymmetricMatrix)
    As = A.as_scipy()
    assert abs(As - As.T).max() == 0.0
    cert = A.psd_certificate()
    assert cert >= 0.0
    d = A.to_json_dict()
    assert d["dimension"] == A.dimension and d["symmetric"]
    # from_scipy rejects visibly asymmetric input
    bad = sp.csr_matrix(np.array([[1.0, 2.0], [0.5, 1.0]]))
    with pytest.raises(ValueError):
        SparseSymmetricMatrix.from_scipy(bad)


def test_hyperbolic_lambda1_vs_shooting(small_mesh):
    # R = 2, h = 0.25: P1 error is O(h^2) ~ a few percent
    A, M = assemble_hodge_laplacian(small_mesh, k=0)
    lams, _, _ = smallest_eigenpairs(A.as_scipy(), M.as_scipy(), nev=1, shift=0.0)
    assert lams[0] == pytest.approx(SHOOTING_LAMBDA1[2.0], rel=3e-2)
    assert lams[0] > SHOOTING_LAMBDA1[2.0]  # conforming FEM from above


# ---------------------------------------------------------------------------
# eigensolver
# ---------------------------------------------------------------------------


def test_dense_path_matches_scipy(rng):
    # below the dense cutoff the solver defers to eigh; compare explicitly
    n = 30
    Q = np.linalg.qr(rng.standard_normal((n, n)))[0]
    A = sp.csr_matrix(Q @ np.diag(np.linspace(1, 50, n)) @ Q.T)
    M = sp.identity(n, format="csr")
    lams, X, _ = smallest_eigenpairs(A, M, nev=4, shift=0.0)
    ref = np.sort(scipy.linalg.eigh(A.toarray(), M.toarray(), eigvals_only=True))[:4]
    assert np.allclose(lams, ref, rtol=1e-10)
    assert X.shape == (n, 4)


def test_lanczos_path_certificates(small_mesh):
    A, M = assemble_hodge_laplacian(small_mesh, k=0)
    As, Ms = A.as_scipy(), M.as_scipy()
    assert As.shape[0] > 64  # actually exercises the sparse path
    lams, X, iters = smallest_eigenpairs(As, Ms, nev=3, shift=0.0, rel_tol=1e-9)
    assert iters >= 1
    assert list(lams) == sorted(lams)
    for j in range(3):
        x = X[:, j]
        r = np.linalg.norm(As @ x - lams[j] * (Ms @ x)) / np.linalg.norm(x)
        assert r < 1e-9 * lams[j]


def test_lanczos_nonconvergence_carries_best(small_mesh):
    A, M = assemble_hodge_laplacian(small_mesh, k=0)
    with pytest.raises(LanczosNonConvergence) as exc:
        # an impossible certificate: residual < 1e-300 * lambda
        smallest_eigenpairs(A.as_scipy(), M.as_scipy(), nev=1, shift=0.0, rel_tol=1e-300, maxiter=6)
    err = exc.value
    assert err.iterations >= 1
    assert len(err.best_eigenvalues) >= 1
    # the best estimate is still a decent eigenvalue
    assert err.best_eigenvalues[0] == pytest.approx(SHOOTING_LAMBDA1[2.0], rel=0.05)


def test_min_ritz_value_positive(small_mesh):
    A, _ = assemble_hodge_laplacian(small_mesh, k=0)
    assert min_ritz_value(A.as_scipy()) > 0.0


# ---------------------------------------------------------------------------
# shooting oracle
# ---------------------------------------------------------------------------


def test_shooting_table_monotone_to_quarter():
    Rs = sorted(SHOOTING_LAMBDA1)
    vals = [SHOOTING_LAMBDA1[R] for R in Rs]
    assert all(a > b for a, b in zip(vals, vals[1:]))  # decreasing in R
    assert all(v > 0.25 for v in vals)  # infinite-volume floor
    assert vals[-1] == pytest.approx(0.25, rel=0.25)  # approaching 1/4 at R = 12


def test_shooting_recomputes_frozen_value():
    assert lambda1_ball_shooting(2.0) == pytest.approx(SHOOTING_LAMBDA1[2.0], abs=1e-7)


def test_euclidean_oracle_values():
    assert lambda1_euclidean_square() == pytest.approx(2 * math.pi**2, rel=1e-15)
    assert lambda1_square_k1() == pytest.approx(math.pi**2, rel=1e-15)
    assert lambda1_euclidean_disc() == pytest.approx(5.783185962946785, rel=1e-12)


# ---------------------------------------------------------------------------
# the bounded primitive theta
# ---------------------------------------------------------------------------


def test_theta_sup_norm_is_one(fine_mesh):
    theta = bounded_primitive(fine_mesh)
    assert theta.sup_norm == pytest.approx(1.0, abs=1e-3)
    assert theta.omega_sign == -1


def test_theta_stokes_defect_second_order():
    # d(theta) = omega on every triangle up to quadrature error O(h^2)
    defects = {}
    for h in (0.3, 0.15):
        m = build_disc_mesh(R=2.0, h=h)
        defects[h] = bounded_primitive(m).stokes_max
    assert defects[0.3] < 50 * 0.3**2
    assert defects[0.15] < 50 * 0.15**2
    # halving h cuts the defect by roughly 4 (allow a loose factor)
    assert defects[0.15] < 0.5 * defects[0.3]


def test_theta_rejects_euclidean(square24):
    with pytest.raises(ValueError):
        bounded_primitive(square24)


# ---------------------------------------------------------------------------
# cutoff family
# ---------------------------------------------------------------------------


def test_cutoff_feasibility(fine_mesh):
    # R = 4: feasible iff 2/eps < 4, i.e. eps > 1/2
    prof = cutoff_family(fine_mesh, eps=0.8)
    assert prof.feasible
    assert prof.r_plateau == pytest.approx(4.0 - 2.0 / 0.8)
    infeas = cutoff_family(fine_mesh, eps=0.4)
    assert not infeas.feasible
    assert infeas.r_plateau == 0.0


def test_cutoff_gradient_bounds(fine_mesh):
    for eps in (0.5, 0.8, 1.0):
        prof = cutoff_family(fine_mesh, eps=eps)
        assert prof.sup_df <= eps * (1 + 1e-12)
        assert prof.sup_df_sq_over_f <= eps**2 * (1 + 1e-9)
        assert prof.sup_df_sq_over_f <= eps * (1 + 1e-9)  # the bound the argument uses
        # plateau value is exactly 1, support edge decays to 0
        assert prof.f_at(np.array([0.0]))[0] == 1.0
        assert prof.f_at(np.array([prof.r_plateau + 2.0 / eps + 0.1]))[0] == 0.0


def test_cutoff_validation(fine_mesh):
    for bad in (0.0, -0.1, 1.5):
        with pytest.raises(ValueError):
            cutoff_family(fine_mesh, eps=bad)


def test_crossterm_constant_within_proved_bound(fine_mesh):
    prof = cutoff_family(fine_mesh, eps=0.8)
    out = crossterm_constant(fine_mesh, prof)
    assert out["C_sqrtf_bound"] == 2.0
    assert out["C_sqrtf_max"] <= 2.0
    assert np.isfinite(out["C_f_max"])


# ---------------------------------------------------------------------------
# annulus decay
# ---------------------------------------------------------------------------


def test_annulus_decay_oracle(fine_mesh):
    # alpha = d(Re z^m): continuum annulus mass is
    # pi m (tanh^{2m}((j+1)/2) - tanh^{2m}(j/2)) -- conformal invariance
    # makes the Euclidean computation exact, so only binning fuzz remains
    m_pow = 2
    es = edge_structure(fine_mesh)
    z = fine_mesh.vertices[:, 0] + 1j * fine_mesh.vertices[:, 1]
    pot = (z**m_pow).real
    alpha = pot[es.edges[:, 1]] - pot[es.edges[:, 0]]  # exact d of P1 potential
    table = annulus_decay(alpha, fine_mesh)
    assert table.jmax == 4
    for j in range(table.jmax):
        exact = math.pi * m_pow * (
            math.tanh((j + 1) / 2) ** (2 * m_pow) - math.tanh(j / 2) ** (2 * m_pow)
        )
        assert table.masses[j] == pytest.approx(exact, rel=0.15)
    assert table.partial_sums_consistent()


def test_annulus_divergence_certificate_synthetic():
    # weighted mass exactly 0.5 in each of 4 annuli but claimed total 1.0:
    # the harmonic sum forces 0.5 * (1 + 1/2 + 1/3 + 1/4) ~ 1.0417 > 1.0
    masses = [0.5, 0.25, 1.0 / 6.0, 0.125]
    table = AnnulusDecayTable.from_masses(masses, total_norm_sq=1.0)
    assert table.min_weighted == pytest.approx(0.5)
    cert = table.divergence_certificate(0.5)
    assert cert["forced_mass"] == pytest.approx(0.5 * (1 + 0.5 + 1 / 3 + 0.25))
    assert cert["contradiction"]
    # with an honest total the same bound is not contradictory
    honest = AnnulusDecayTable.from_masses(masses)
    assert not honest.divergence_certificate(honest.min_weighted)["contradiction"]


def test_annulus_weighted_column(fine_mesh):
    es = edge_structure(fine_mesh)
    rng = np.random.default_rng(5)
    alpha = rng.standard_normal(len(es.edges))
    table = annulus_decay(alpha, fine_mesh, jmax=3)
    assert table.jmax == 3
    assert np.allclose(table.weighted, (np.arange(3) + 1) * table.masses)
    assert table.total_norm_sq >= 0.0
