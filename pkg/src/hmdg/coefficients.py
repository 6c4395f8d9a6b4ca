"""PDE coefficients: porosity, mobility, sources, and the velocity-dependent
diffusion-dispersion tensor with its closed-form inverse.

The tensor is D(u) = phi * [d_m I + |u| (d_l E(u) + d_t E_perp(u))] with
E(u) the orthogonal projection along u. Its eigenvectors are u and its
rotation, with eigenvalues phi*(d_m + d_l |u|) and phi*(d_m + d_t |u|),
which is what the inverse uses. E(0) is set to 0, the unique choice that
makes D continuous at u = 0 (D(0) = phi d_m I).
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .quadrature import triangle_rule, map_to_cells

#: quadrature degree used for data integrals (loads, compatibility checks)
LOAD_QUAD_DEGREE = 10


def projection_along(u) -> np.ndarray:
    """Orthogonal projection matrix onto span{u}; zero matrix for u = 0."""
    u = np.asarray(u, dtype=float)
    n2 = u @ u
    if n2 == 0.0:
        return np.zeros((2, 2))
    return np.outer(u, u) / n2


@dataclass(frozen=True)
class DispersionTensor:
    """2x2 dispersion tensor, its inverse, and the eigenvalue pair
    (longitudinal along u, transverse)."""

    matrix: np.ndarray
    inverse: np.ndarray
    eigenvalue_along: float
    eigenvalue_across: float


def dispersion(u, phi: float, d_m: float, d_l: float, d_t: float) -> DispersionTensor:
    """Dispersion tensor at one velocity value."""
    if d_m <= 0.0:
        raise ValueError("d_m must be positive for D(u) to be invertible")
    if phi <= 0.0:
        raise ValueError("porosity must be positive")
    u = np.asarray(u, dtype=float)
    speed = float(np.hypot(u[0], u[1]))
    E = projection_along(u)
    Eperp = np.eye(2) - E
    lam_along = phi * (d_m + d_l * speed)
    lam_across = phi * (d_m + d_t * speed)
    D = phi * (d_m * np.eye(2) + speed * (d_l * E + d_t * Eperp))
    if speed == 0.0:
        Dinv = np.eye(2) / (phi * d_m)
    else:
        Dinv = E / lam_along + Eperp / lam_across
    return DispersionTensor(D, Dinv, lam_along, lam_across)


def dispersion_inverse_batch(u, phi, d_m, d_l, d_t):
    """D(u)^-1 at many points: u (..., 2), phi (...,) -> (..., 2, 2)."""
    u = np.asarray(u, dtype=float)
    phi = np.asarray(phi, dtype=float)
    speed = np.hypot(u[..., 0], u[..., 1])
    lam_along = phi * (d_m + d_l * speed)
    lam_across = phi * (d_m + d_t * speed)
    # E = u u^T / |u|^2, guarded at u = 0 where E plays no role
    denom = np.where(speed > 0.0, speed * speed, 1.0)
    E = u[..., :, None] * u[..., None, :] / denom[..., None, None]
    E = np.where(speed[..., None, None] > 0.0, E, 0.0)
    eye = np.eye(2)
    return E / lam_along[..., None, None] + (eye - E) / lam_across[..., None, None]


def quarter_power_viscosity(mu_zero: float, mobility_ratio: float) -> Callable:
    """Quarter-power mixing rule mu(c) = mu(0) [1 + (M^(1/4)-1) c]^-4."""
    beta = mobility_ratio ** 0.25 - 1.0
    return lambda c: mu_zero * (1.0 + beta * np.asarray(c, dtype=float)) ** (-4.0)


def constant_viscosity(value: float = 1.0) -> Callable:
    return lambda c: np.full_like(np.asarray(c, dtype=float), value)


@dataclass
class ProblemSpec:
    """Coefficients, boundary-compatible sources, and run controls.

    Spatial coefficients are vectorized callables f(x, y); time-dependent
    ones are f(x, y, t). transport_source is the extra manufactured-solution
    right-hand-side hook on the concentration balance; it is zero (None) in
    every non-manufactured run.
    """

    porosity: Callable
    permeability: Callable
    viscosity: Callable
    source: Callable  # q(x, y, t)
    injected_concentration: Callable  # c*(x, y, t), used where q > 0
    d_m: float
    d_l: float
    d_t: float
    final_time: float
    dt: float
    initial_concentration: Callable
    domain: tuple = (0.0, 0.0, 1.0, 1.0)
    transport_source: Optional[Callable] = None  # f_c(x, y, t)
    upwind_mode: str = "pointwise"
    solver_tol_spd: float = 1e-12
    solver_tol_general: float = 1e-10
    pressure_gauge: float = 0.0
    strict_dt_check: bool = False
    name: str = "problem"

    def __post_init__(self):
        if self.d_m <= 0.0:
            raise ValueError("d_m must be positive")
        if min(self.d_l, self.d_t) < 0.0:
            raise ValueError("dispersion coefficients must be nonnegative")
        if self.upwind_mode not in ("pointwise", "facet_mean"):
            raise ValueError("upwind_mode must be 'pointwise' or 'facet_mean'")

    def mobility(self, c):
        """a(c) = mu(c)/k* with c clamped to [0, 1] before evaluating mu."""
        return mobility(c, self)

    def validate_bounds(self, mesh, nsamples_c: int = 21):
        """Sample the boundedness assumptions on the mesh's quadrature points.

        Returns (phi_min, phi_max, a_min, a_max); raises ValueError if the
        positivity assumptions fail on the sample.
        """
        qp, _ = map_to_cells(*triangle_rule(4), mesh.cell_vertices)
        phi = np.asarray(self.porosity(qp[..., 0], qp[..., 1]), dtype=float)
        phi = np.broadcast_to(phi, qp.shape[:-1])
        cs = np.linspace(0.0, 1.0, nsamples_c)
        a = np.concatenate([np.atleast_1d(self.mobility(c)) for c in cs])
        bounds = float(phi.min()), float(phi.max()), float(a.min()), float(a.max())
        if bounds[0] <= 0.0:
            raise ValueError("porosity must be strictly positive")
        if bounds[2] <= 0.0:
            raise ValueError("mobility must be strictly positive")
        return bounds

    def source_compatibility(self, mesh, t: float) -> float:
        """High-order quadrature of int_Omega q(., t) dx (must vanish for the
        no-flow problem to be solvable)."""
        qp, qw = map_to_cells(*triangle_rule(LOAD_QUAD_DEGREE), mesh.cell_vertices)
        qv = np.asarray(self.source(qp[..., 0], qp[..., 1], t), dtype=float)
        qv = np.broadcast_to(qv, qw.shape)
        return float((qw * qv).sum())


def mobility(c, spec: ProblemSpec):
    """a(c) = mu(clamp(c, 0, 1)) / k*.

    Discrete concentrations may overshoot [0, 1]; clamping keeps the
    boundedness assumptions intact. Permeability is sampled at nothing --
    scalar k* only, evaluated through spec.permeability(0, 0).
    """
    cc = np.clip(np.asarray(c, dtype=float), 0.0, 1.0)
    return np.asarray(spec.viscosity(cc), dtype=float) / spec.permeability(0.0, 0.0)
