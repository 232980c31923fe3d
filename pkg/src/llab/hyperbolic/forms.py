"""Continuum objects sampled onto the mesh: the bounded primitive of the
area form, cutoff families, and annulus energy tables.

The primitive comes from the half-plane: theta = -dx/y has |theta| = 1
pointwise and d theta = -dx dy / y^2, i.e. the area 2-form up to sign.
Pulled back through the Moebius map w = i(1+z)/(1-z) it lives on the disc
model, where all meshes are built.  The sign convention is measured, not
assumed: the per-triangle Stokes residual compares the discrete exterior
derivative of the sampled edge integrals against the sampled 2-form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from llab.hyperbolic.assembly import EdgeStructure, edge_structure, incidence_d1
from llab.hyperbolic.mesh import DiscMesh

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(4)
_GL_T = 0.5 * (_GL_NODES + 1.0)  # nodes on [0, 1]
_GL_W = 0.5 * _GL_WEIGHTS

# P1 hat values at the three edge midpoints (01, 12, 20); rows = midpoints
_LAMBDA_MID = np.array([
    [0.5, 0.5, 0.0],
    [0.0, 0.5, 0.5],
    [0.5, 0.0, 0.5],
])


def _theta_components(points: np.ndarray) -> np.ndarray:
    """Euclidean (a_u, a_v) of the pulled-back -dx/y at disc points.

    w = i(1+z)/(1-z), w' = 2i/(1-z)^2, y = Im w = (1-|z|^2)/|1-z|^2;
    theta = -dx/y = -(Re w' du - Im w' dv)/y.
    """
    z = points[:, 0] + 1j * points[:, 1]
    wp = 2j / (1.0 - z) ** 2
    y = (1.0 - np.abs(z) ** 2) / np.abs(1.0 - z) ** 2
    a_u = -np.real(wp) / y
    a_v = np.imag(wp) / y
    return np.column_stack([a_u, a_v])


@dataclass
class PrimitiveOneForm:
    """A 1-form theta with d theta = (sign) * area form, sampled on a mesh.

    edge_integrals : line integrals over canonical (low -> high) edges;
        these are exactly the Whitney dofs of the sampled form.
    triangle_omega : per-triangle integral of d theta computed from the
        continuum 2-form (mu-weighted quadrature with the measured sign).
    stokes_max / stokes_rms : relative defect of (D1 @ edge_integrals)
        against triangle_omega; O(h^2) for a correct sign and pairing.
    """

    expression: str
    sup_norm: float
    omega_sign: int
    edge_integrals: np.ndarray
    triangle_omega: np.ndarray
    stokes_max: float
    stokes_rms: float
    theta_at: Callable[[np.ndarray], np.ndarray] = field(repr=False)

    def to_json_dict(self) -> dict:
        return {
            "expression": self.expression,
            "sup_norm": self.sup_norm,
            "omega_sign": self.omega_sign,
            "n_edges": int(len(self.edge_integrals)),
            "stokes_max": self.stokes_max,
            "stokes_rms": self.stokes_rms,
        }


def _edge_line_integrals(mesh: DiscMesh, es: EdgeStructure, comp_at) -> np.ndarray:
    """4-point Gauss-Legendre line integrals over canonical edges."""
    a = mesh.vertices[es.edges[:, 0]]
    b = mesh.vertices[es.edges[:, 1]]
    d = b - a  # tangent, canonical orientation
    total = np.zeros(es.n_edges)
    for t, w in zip(_GL_T, _GL_W):
        pts = a + t * d
        c = comp_at(pts)
        total += w * (c[:, 0] * d[:, 0] + c[:, 1] * d[:, 1])
    return total


def bounded_primitive(mesh: DiscMesh) -> PrimitiveOneForm:
    """Sample theta = -(dx/y) pulled back to the disc model onto the mesh.

    Available only for the hyperbolic metric: the Euclidean area form on a
    plane patch has primitives, but none with bounded pointwise norm, and
    none is provided.
    """
    if mesh.metric != "hyperbolic":
        raise ValueError("bounded primitive is defined for the hyperbolic metric only")
    es = edge_structure(mesh)

    edge_integrals = _edge_line_integrals(mesh, es, _theta_components)

    # continuum 2-form: d theta = -mu du dv (measured sign -1 in CCW (u,v))
    sign = -1
    area = mesh.triangle_areas()
    mids = mesh.edge_midpoints()
    mu_mid = mesh.mu(mids.reshape(-1, 2)).reshape(-1, 3)
    triangle_omega = sign * area / 3.0 * mu_mid.sum(axis=1)

    D1 = incidence_d1(mesh, es)
    circulation = D1 @ edge_integrals
    defect = np.abs(circulation - triangle_omega)
    scale = np.abs(triangle_omega)
    rel = defect / np.maximum(scale, np.median(scale))
    stokes_max = float(rel.max())
    stokes_rms = float(np.sqrt(np.mean(rel**2)))

    # |theta|_g should be identically 1; measure on vertices and midpoints
    samples = np.vstack([mesh.vertices, mids.reshape(-1, 2)])
    comp = _theta_components(samples)
    norms = np.sqrt((comp**2).sum(axis=1) / mesh.mu(samples))
    sup_norm = float(norms.max())

    return PrimitiveOneForm(
        expression="pullback of -(dx)/y under w = i(1+z)/(1-z)",
        sup_norm=sup_norm,
        omega_sign=sign,
        edge_integrals=edge_integrals,
        triangle_omega=triangle_omega,
        stokes_max=stokes_max,
        stokes_rms=stokes_rms,
        theta_at=_theta_components,
    )


# -- cutoff families -------------------------------------------------------


@dataclass
class CutoffProfile:
    """Radial cutoff f(rho) = (1 - (eps/2) max(0, rho - r0))_+^2.

    The square makes |df|^2 / f bounded: both sup|df| <= eps and
    sup(|df|^2/f) = eps^2 <= eps hold on {f > 0} for eps <= 1, and both
    are measured on a dense radial grid rather than trusted.
    """

    eps: float
    r_plateau: float
    r_support: float
    feasible: bool
    sup_df: float
    sup_df_sq_over_f: float
    rho_grid: np.ndarray = field(repr=False)
    f_grid: np.ndarray = field(repr=False)
    df_grid: np.ndarray = field(repr=False)
    vertex_values: np.ndarray = field(repr=False)

    def f_at(self, rho: np.ndarray) -> np.ndarray:
        s = np.maximum(0.0, np.asarray(rho, dtype=float) - self.r_plateau)
        base = np.maximum(0.0, 1.0 - 0.5 * self.eps * s)
        return base**2

    def df_at(self, rho: np.ndarray) -> np.ndarray:
        """Radial derivative f'(rho) (signed; nonpositive)."""
        rho = np.asarray(rho, dtype=float)
        s = np.maximum(0.0, rho - self.r_plateau)
        base = np.maximum(0.0, 1.0 - 0.5 * self.eps * s)
        on = (rho > self.r_plateau) & (base > 0.0)
        return np.where(on, -self.eps * base, 0.0)

    def to_json_dict(self) -> dict:
        return {
            "eps": self.eps,
            "r_plateau": self.r_plateau,
            "r_support": self.r_support,
            "feasible": self.feasible,
            "sup_df": self.sup_df,
            "sup_df_sq_over_f": self.sup_df_sq_over_f,
        }


def cutoff_family(mesh: DiscMesh, eps: float) -> CutoffProfile:
    """Cutoff adapted to the mesh: plateau as wide as the support allows.

    Feasible iff the ramp of width 2/eps fits inside radius R, i.e.
    R > 2/eps; an infeasible profile is still returned (plateau radius 0)
    with the flag cleared, since the point of the family is the eps -> 0
    limit on exhausting balls.
    """
    if not (0.0 < eps <= 1.0):
        raise ValueError(f"need 0 < eps <= 1, got {eps}")
    r_support = 2.0 / eps
    r_plateau = max(0.0, mesh.R - r_support)
    feasible = mesh.R > r_support

    profile = CutoffProfile(
        eps=eps,
        r_plateau=r_plateau,
        r_support=min(mesh.R, r_plateau + r_support),
        feasible=feasible,
        sup_df=0.0,
        sup_df_sq_over_f=0.0,
        rho_grid=np.zeros(0),
        f_grid=np.zeros(0),
        df_grid=np.zeros(0),
        vertex_values=np.zeros(0),
    )
    rho = np.linspace(0.0, mesh.R, 2048)
    f = profile.f_at(rho)
    df = profile.df_at(rho)
    pos = f > 0
    profile.rho_grid = rho
    profile.f_grid = f
    profile.df_grid = df
    profile.sup_df = float(np.abs(df).max())
    profile.sup_df_sq_over_f = float((df[pos] ** 2 / f[pos]).max())
    profile.vertex_values = profile.f_at(mesh.geodesic_radius(mesh.vertices))
    return profile


def _whitney_at_midpoints(mesh: DiscMesh, es: EdgeStructure, alpha: np.ndarray):
    """Whitney interpolation of edge dofs at the 3 edge midpoints per triangle.

    Returns (values (nt, 3, 2), d_alpha_uv (nt,), area (nt,), mids (nt,3,2)).
    """
    p = mesh.vertices[mesh.triangles]
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    area = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
    grads = np.empty((len(area), 3, 2))
    for i in range(3):
        e = p[:, (i + 2) % 3] - p[:, (i + 1) % 3]
        grads[:, i, 0] = -e[:, 1] / (2.0 * area)
        grads[:, i, 1] = e[:, 0] / (2.0 * area)

    pairs = [(0, 1), (1, 2), (2, 0)]
    dofs = alpha[es.tri_edges] * es.tri_signs  # (nt, 3) in local orientation
    vals = np.zeros((len(area), 3, 2))
    for e, (a, b) in enumerate(pairs):
        for m in range(3):
            la = _LAMBDA_MID[m, a]
            lb = _LAMBDA_MID[m, b]
            w_e = la * grads[:, b] - lb * grads[:, a]
            vals[:, m] += dofs[:, e, None] * w_e
    # d alpha is constant per triangle; its du^dv coefficient is the
    # circulation divided by the Euclidean area
    D1_local = dofs.sum(axis=1)
    d_alpha_uv = D1_local / area
    mids = mesh.edge_midpoints()
    return vals, d_alpha_uv, area, mids


def crossterm_constant(
    mesh: DiscMesh,
    profile: CutoffProfile,
    n_samples: int = 8,
    seed: int = 20260302,
) -> dict:
    """Measured constants in |<d a, 2 f df ^ a>| against cutoff-weighted norms.

    For each random discrete 1-form a, evaluates the pairing by quadrature
    and reports
        C_f     = |<..>| / (eps ||f a|| ||f d a||)      (reported, no bound)
        C_sqrtf = |<..>| / (eps ||sqrt f a|| ||sqrt f d a||)  (provably <= 2)
    The sqrt-f constant is the load-bearing one: 2 f |df| <= 2 eps f <=
    2 eps sqrt(f) * sqrt(f) pointwise, then Cauchy-Schwarz.
    """
    es = edge_structure(mesh)
    rng = np.random.default_rng(seed)
    eps = profile.eps

    p_mid = mesh.edge_midpoints().reshape(-1, 2)
    rho_mid = mesh.geodesic_radius(p_mid)
    f_mid = profile.f_at(rho_mid).reshape(-1, 3)
    fp_mid = profile.df_at(rho_mid)
    mu_mid = mesh.mu(p_mid).reshape(-1, 3)

    # Euclidean gradient of rho: d rho/d r_eucl * radial unit vector
    r = np.hypot(p_mid[:, 0], p_mid[:, 1])
    if mesh.metric == "hyperbolic":
        drho_dr = 2.0 / (1.0 - r**2)
    else:
        drho_dr = np.ones_like(r)
    with np.errstate(invalid="ignore", divide="ignore"):
        radial = np.where(r[:, None] > 0, p_mid / np.maximum(r, 1e-300)[:, None], 0.0)
    grad_f = (fp_mid * drho_dr)[:, None] * radial  # (nt*3, 2)
    grad_f = grad_f.reshape(-1, 3, 2)

    out_cf, out_csqrt = [], []
    for _ in range(n_samples):
        alpha = rng.standard_normal(es.n_edges)
        vals, d_uv, area, _ = _whitney_at_midpoints(mesh, es, alpha)
        w = area[:, None] / 3.0  # quadrature weights per midpoint

        # (2 f df ^ alpha)_uv at midpoints
        wedge_uv = 2.0 * f_mid * (grad_f[:, :, 0] * vals[:, :, 1] - grad_f[:, :, 1] * vals[:, :, 0])
        # <d alpha, .>_g dvol = (d_uv * wedge_uv / mu^2) * mu dA
        pairing = float((w * d_uv[:, None] * wedge_uv / mu_mid).sum())

        alpha_sq = (vals**2).sum(axis=2)  # |alpha|^2_eucl, conformally exact
        n_fa = np.sqrt((w * f_mid**2 * alpha_sq).sum())
        n_fda = np.sqrt((w * f_mid**2 * d_uv[:, None] ** 2 / mu_mid).sum())
        n_sfa = np.sqrt((w * f_mid * alpha_sq).sum())
        n_sfda = np.sqrt((w * f_mid * d_uv[:, None] ** 2 / mu_mid).sum())

        tiny = 1e-300
        out_cf.append(abs(pairing) / (eps * n_fa * n_fda + tiny))
        out_csqrt.append(abs(pairing) / (eps * n_sfa * n_sfda + tiny))

    return {
        "eps": eps,
        "n_samples": n_samples,
        "C_f_max": float(max(out_cf)),
        "C_sqrtf_max": float(max(out_csqrt)),
        "C_sqrtf_bound": 2.0,
    }


# -- annulus decay ----------------------------------------------------------


@dataclass
class AnnulusDecayTable:
    """Energy of a 1-form over unit-width geodesic annuli.

    masses[j] = integral of |alpha|^2 dvol over {j <= rho < j+1};
    weighted[j] = (j+1) * masses[j].  If every weighted entry stayed above
    a > 0 on an infinite cone, the total mass would dominate
    a * sum 1/(j+1), a divergent series -- so for L2 forms the inf of the
    weighted column must vanish.  min_weighted is the witness.
    """

    masses: np.ndarray
    total_norm_sq: float
    jmax: int

    @classmethod
    def from_masses(cls, masses, total_norm_sq: float | None = None) -> "AnnulusDecayTable":
        masses = np.asarray(masses, dtype=float)
        if total_norm_sq is None:
            total_norm_sq = float(masses.sum())
        return cls(masses=masses, total_norm_sq=total_norm_sq, jmax=len(masses))

    @property
    def weighted(self) -> np.ndarray:
        return (np.arange(self.jmax) + 1.0) * self.masses

    @property
    def min_weighted(self) -> float:
        return float(self.weighted.min()) if self.jmax else float("nan")

    def partial_sums_consistent(self, tol: float = 1e-8) -> bool:
        return float(self.masses.sum()) <= self.total_norm_sq + tol

    def divergence_certificate(self, a: float) -> dict:
        """What total mass a uniform weighted lower bound a would force."""
        harmonic = float(np.sum(1.0 / (np.arange(self.jmax) + 1.0)))
        return {
            "assumed_lower_bound": a,
            "forced_mass": a * harmonic,
            "actual_mass": float(self.masses.sum()),
            "contradiction": a * harmonic > self.total_norm_sq + 1e-12,
        }

    def to_json_dict(self) -> dict:
        return {
            "masses": [float(x) for x in self.masses],
            "weighted": [float(x) for x in self.weighted],
            "min_weighted": self.min_weighted,
            "total_norm_sq": self.total_norm_sq,
            "jmax": self.jmax,
        }


def annulus_decay(alpha: np.ndarray, mesh: DiscMesh, jmax: int | None = None) -> AnnulusDecayTable:
    """Annulus energy table of a discrete (edge-dof) 1-form.

    Triangles are binned by centroid geodesic radius.  The 1-form energy
    density is conformally invariant in 2D, so the integrals are plain
    Euclidean quadrature of the Whitney interpolant.
    """
    es = edge_structure(mesh)
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (es.n_edges,):
        raise ValueError(f"alpha must have one dof per edge ({es.n_edges}), got {alpha.shape}")
    if jmax is None:
        jmax = int(np.ceil(mesh.R))
    vals, _, area, _ = _whitney_at_midpoints(mesh, es, alpha)
    tri_energy = (area / 3.0) * (vals**2).sum(axis=2).sum(axis=1)

    rho_c = mesh.geodesic_radius(mesh.centroids())
    bins = np.floor(rho_c).astype(int)
    masses = np.zeros(jmax)
    for j in range(jmax):
        masses[j] = tri_energy[bins == j].sum()
    total = float(tri_energy.sum())
    return AnnulusDecayTable(masses=masses, total_norm_sq=total, jmax=jmax)
