# Closed-form limiting laws (Marchenko-Pastur, semicircle), the limit
# distribution of the conditional kernel mean, the fixed-point solver for the
# generalized Marchenko-Pastur Stieltjes transform, and inversion to densities.

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.stats import norm


class SolverError(RuntimeError):
    """Fixed-point iteration failed to reach the requested residual."""


class InversionQualityError(RuntimeError):
    """Numerically inverted density carries too little or too much mass."""


# ---------------------------------------------------------------------------
# Marchenko-Pastur
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MPLaw:
    """Marchenko-Pastur law with aspect ratio c and variance scale."""

    c: float
    scale: float = 1.0

    def __post_init__(self):
        if self.c <= 0 or self.scale <= 0:
            raise ValueError("MPLaw needs c > 0 and scale > 0")

    @property
    def support(self):
        sc = np.sqrt(self.c)
        return (self.scale * (1 - sc) ** 2, self.scale * (1 + sc) ** 2)

    @property
    def atom_at_zero(self):
        return max(0.0, 1.0 - 1.0 / self.c)


def mp_density(law: MPLaw, x):
    """Continuous MP density; integrates to 1 for c <= 1 and to 1/c for c > 1."""
    x = np.asarray(x, dtype=float)
    a, b = law.support
    inside = (x > a) & (x < b)
    out = np.zeros_like(x)
    xs = x[inside]
    out[inside] = np.sqrt((b - xs) * (xs - a)) / (2 * np.pi * law.scale * law.c * xs)
    return out if out.ndim else float(out)


def mp_cdf(law: MPLaw, x):
    """MP CDF: numerical integral of the density plus the atom at 0 (c > 1)."""
    a, b = law.support

    def one(t):
        if t >= b:
            return 1.0
        val = law.atom_at_zero if t >= 0 else 0.0
        if t > a:
            integral, _ = integrate.quad(
                lambda u: mp_density(law, u), a, t, limit=200, epsabs=1e-10)
            val += integral
        return min(max(val, 0.0), 1.0)

    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        return one(float(x))
    return np.array([one(t) for t in x.ravel()]).reshape(x.shape)


def mp_stieltjes(law: MPLaw, z):
    """Closed-form Stieltjes transform of MP(c, scale) on the upper half-plane.

    Root of c*scale*z*s^2 + (c*scale + z - scale)*s + 1 = 0 with Im s > 0.
    """
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag <= 0):
        raise ValueError("mp_stieltjes requires Im z > 0")
    c, sc = law.c, law.scale
    disc = _sqrt_upper((z - sc * (1 + c)) ** 2 - 4 * c * sc**2)
    s1 = (sc * (1 - c) - z + disc) / (2 * c * sc * z)
    s2 = (sc * (1 - c) - z - disc) / (2 * c * sc * z)
    s = np.where(s1.imag > 0, s1, s2)
    return complex(s) if s.ndim == 0 else s


# ---------------------------------------------------------------------------
# Semicircle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SCLaw:
    """Semicircle law with variance parameter (support [-2 sqrt(var), 2 sqrt(var)])."""

    variance: float

    def __post_init__(self):
        if self.variance <= 0:
            raise ValueError("SCLaw needs variance > 0")

    @property
    def radius(self):
        return 2.0 * np.sqrt(self.variance)


def sc_density(law: SCLaw, x):
    x = np.asarray(x, dtype=float)
    v = law.variance
    inside = np.abs(x) < law.radius
    out = np.zeros_like(x)
    out[inside] = np.sqrt(4 * v - x[inside] ** 2) / (2 * np.pi * v)
    return out if out.ndim else float(out)


def sc_cdf(law: SCLaw, x):
    """Closed-form semicircle CDF (arcsine antiderivative)."""
    x = np.asarray(x, dtype=float)
    v = law.variance
    r = law.radius
    xc = np.clip(x, -r, r)
    out = 0.5 + xc * np.sqrt(np.maximum(4 * v - xc**2, 0.0)) / (4 * np.pi * v) \
        + np.arcsin(xc / r) / np.pi
    out = np.where(x <= -r, 0.0, np.where(x >= r, 1.0, out))
    return out if out.ndim else float(out)


def _sqrt_upper(z):
    """Square root with branch chosen in the closed upper half-plane."""
    r = np.sqrt(np.asarray(z, dtype=complex))
    return np.where(r.imag < 0, -r, r)


def sc_stieltjes(z, variance):
    """s(z) = (-z + sqrt(z^2 - 4 var)) / (2 var), root of var*s^2 + z*s + 1 = 0."""
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag <= 0):
        raise ValueError("sc_stieltjes requires Im z > 0")
    s = (-z + _sqrt_upper(z**2 - 4.0 * variance)) / (2.0 * variance)
    return complex(s) if s.ndim == 0 else s


# ---------------------------------------------------------------------------
# The limit distribution of the conditional kernel mean
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ZetaDistribution:
    """Discrete representation of the limit variable as weighted atoms in [0, 1]."""

    values: np.ndarray
    weights: np.ndarray
    provenance: str = "unspecified"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if v.shape != w.shape:
            raise ValueError("values and weights must have the same shape")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1")
        if v.size and (v.min() < -1e-12 or v.max() > 1 + 1e-12):
            raise ValueError("atom values must lie in [0, 1]")

    def mean(self):
        return float(np.dot(self.weights, self.values))

    def moment(self, k):
        return float(np.dot(self.weights, self.values**k))

    @staticmethod
    def point_mass(value):
        return ZetaDistribution(values=np.array([float(value)]),
                                weights=np.array([1.0]),
                                provenance="point_mass")


def gauss_hermite_prob(n):
    """Nodes and weights for E f(Z), Z ~ N(0, 1) (probabilists' Hermite)."""
    nodes, weights = np.polynomial.hermite_e.hermegauss(n)
    return nodes, weights / weights.sum()


def zeta_indicator(z_alpha, n_atoms=64) -> ZetaDistribution:
    """Limit of the conditional indicator-kernel mean for Gaussian entries:
    Phi(Z / sqrt(3) + 2 z_alpha / sqrt(3)) with Z ~ N(0, 1), discretized on
    Gauss-Hermite nodes.
    """
    if n_atoms < 16:
        raise ValueError("n_atoms must be >= 16")
    nodes, weights = gauss_hermite_prob(n_atoms)
    values = norm.cdf((nodes + 2.0 * z_alpha) / np.sqrt(3.0))
    return ZetaDistribution(values=values, weights=weights,
                            provenance=f"closed_form_indicator(z_alpha={z_alpha})")


@dataclass(frozen=True)
class DMoments:
    """Moments of the symmetric pair function d(w, w'): mean, variance, and its
    law-of-total-variance split; m3 is a diagnostic third absolute moment."""

    m1: float
    m2: float
    m2_1: float
    m2_2: float
    m3: float = 0.0

    def __post_init__(self):
        if self.m2 <= 0:
            raise ValueError("m2 must be positive")
        if self.m2_1 < 0 or self.m2_2 < 0:
            raise ValueError("m2_1 and m2_2 must be nonnegative")
        if abs(self.m2_1 + self.m2_2 - self.m2) > 1e-8 * self.m2:
            raise ValueError("m2_1 + m2_2 must equal m2")


def d_moments(d="squared_difference", entry_law="gaussian", sigma=1.0,
              mc_samples=10**6, seed=0, return_stderr=False):
    """Moments of d(w, w') for i.i.d. entries w, w'.

    Closed form for d(x, y) = (x - y)^2 with Gaussian entries:
    (2 sigma^2, 8 sigma^4, 2 sigma^4, 6 sigma^4). Otherwise a nested Monte
    Carlo (outer draw conditions, inner draws estimate the conditional mean
    and variance).
    """
    if d == "squared_difference" and entry_law == "gaussian":
        s2, s4 = sigma**2, sigma**4
        # diagnostic only: (w - w')^2 = 2 s2 * Q with Q ~ chi2_1, so
        # E|d - m1|^3 = 8 s2^3 E|Q - 1|^3, computed by quadrature
        from scipy.stats import chi2 as _chi2
        e_abs3, _ = integrate.quad(
            lambda q: abs(q - 1.0) ** 3 * _chi2.pdf(q, 1), 0, np.inf, limit=200)
        mom = DMoments(m1=2 * s2, m2=8 * s4, m2_1=2 * s4, m2_2=6 * s4,
                       m3=8 * s2**3 * e_abs3)
        return (mom, {"m1": 0.0, "m2": 0.0}) if return_stderr else mom
    return _d_moments_mc(d, entry_law, sigma, mc_samples, seed, return_stderr)


def _draw_entries(rng, entry_law, sigma, size):
    if entry_law == "gaussian":
        return sigma * rng.standard_normal(size)
    if entry_law == "rademacher":
        return sigma * (2.0 * rng.integers(0, 2, size) - 1.0)
    if entry_law == "uniform_centered":
        half = np.sqrt(3.0) * sigma
        return rng.uniform(-half, half, size)
    raise ValueError(f"unknown entry_law {entry_law!r}")


def _d_eval(d, x, y):
    if d == "squared_difference":
        return (x - y) ** 2
    if d == "abs_difference":
        return np.abs(x - y)
    if callable(d):
        return d(x, y)
    raise ValueError(f"unknown pair function {d!r}")


def _d_moments_mc(d, entry_law, sigma, mc_samples, seed, return_stderr):
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0xD,)))
    n_outer = max(200, int(np.sqrt(mc_samples)))
    n_inner = max(200, mc_samples // n_outer)
    v = _draw_entries(rng, entry_law, sigma, n_outer)
    w = _draw_entries(rng, entry_law, sigma, (n_outer, n_inner))
    vals = _d_eval(d, v[:, None], w)
    cond_mean = vals.mean(axis=1)
    cond_var = vals.var(axis=1, ddof=1)
    m1 = float(cond_mean.mean())
    m2_1 = float(cond_mean.var(ddof=1))
    m2_2 = float(cond_var.mean())
    m2 = m2_1 + m2_2
    m3 = float(np.mean(np.abs(vals - cond_mean[:, None]) ** 3))
    mom = DMoments(m1=m1, m2=m2, m2_1=m2_1, m2_2=m2_2, m3=m3)
    se = {"m1": float(cond_mean.std(ddof=1) / np.sqrt(n_outer)),
          "m2": float(vals.var(ddof=1) / np.sqrt(n_outer))}
    return (mom, se) if return_stderr else mom


def zeta_general(phi_tilde, moments: DMoments, n_outer=64, n_inner=64) -> ZetaDistribution:
    """Limit variable E_{Z2}[phi_tilde(sqrt(m2_1/m2) Z1 + sqrt(m2_2/m2) Z2)],
    with both Gaussian expectations replaced by Gauss-Hermite quadrature.

    phi_tilde must map into [0, 1].
    """
    w1 = np.sqrt(moments.m2_1 / moments.m2)
    w2 = np.sqrt(moments.m2_2 / moments.m2)
    outer_nodes, outer_weights = gauss_hermite_prob(n_outer)
    inner_nodes, inner_weights = gauss_hermite_prob(n_inner)
    args = w1 * outer_nodes[:, None] + w2 * inner_nodes[None, :]
    vals = np.asarray(phi_tilde(args), dtype=float)
    if vals.min() < -1e-12 or vals.max() > 1 + 1e-12:
        raise ValueError("phi_tilde returned values outside [0, 1]")
    atoms = np.clip(vals, 0.0, 1.0) @ inner_weights
    return ZetaDistribution(values=np.clip(atoms, 0.0, 1.0),
                            weights=outer_weights,
                            provenance=f"quadrature({n_outer}x{n_inner})")


# ---------------------------------------------------------------------------
# Fixed-point solver for the generalized Marchenko-Pastur transform
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StieltjesSolution:
    """Solver output on a grid of upper-half-plane points."""

    grid: np.ndarray
    values: np.ndarray
    iterations: int
    max_residual: float


def _fixed_point_residual(s, z, c, sigma, values, weights):
    rhs = np.einsum("k,...k->...", weights,
                    sigma**2 * s[..., None] * values
                    / (1.0 + c * sigma**2 * s[..., None] * values))
    return np.abs(1.0 + z * s - rhs)


def solve_nonsmooth_stieltjes(z, c, sigma, zeta: ZetaDistribution,
                              damping=0.5, tol=1e-10, max_iter=10000,
                              init=None):
    """Solve 1 + z s = E[sigma^2 s zeta / (1 + c sigma^2 s zeta)] in C+.

    Damped iteration of the rearranged map
        s <- (1 - eta) s + eta / (-z + E[sigma^2 zeta / (1 + c sigma^2 zeta s)]).
    The equation has a unique upper-half-plane solution, so the answer is
    initialization-independent; on stagnation the damping is lowered.
    """
    if c <= 0 or sigma <= 0:
        raise ValueError("need c > 0 and sigma > 0")
    sol = solve_stieltjes_grid(np.asarray([complex(z)]), c, sigma, zeta,
                               damping=damping, tol=tol, max_iter=max_iter,
                               init=init)
    return complex(sol.values[0])


def solve_stieltjes_grid(z_grid, c, sigma, zeta: ZetaDistribution,
                         damping=0.5, tol=1e-10, max_iter=10000,
                         init=None) -> StieltjesSolution:
    """Vectorized fixed-point solve over a grid of upper-half-plane points."""
    z = np.asarray(z_grid, dtype=complex).ravel()
    if np.any(z.imag <= 0):
        raise ValueError("all grid points must have Im z > 0")
    values = zeta.values[None, :]
    weights = zeta.weights
    s = np.full(z.shape, init, dtype=complex) if init is not None \
        else 1j / (1.0 + np.abs(z))
    total_iters = 0
    for eta in (damping, 0.25, 0.1):
        for it in range(max_iter):
            denom = 1.0 + c * sigma**2 * values * s[:, None]
            expect = (weights * (sigma**2 * zeta.values) / denom).sum(axis=1)
            s_new = (1.0 - eta) * s + eta / (-z + expect)
            # keep iterates in the closed upper half-plane
            s_new = np.where(s_new.imag > 0, s_new, s)
            delta = np.max(np.abs(s_new - s))
            s = s_new
            total_iters += 1
            if delta < 0.01 * tol:
                break
        res = _fixed_point_residual(s, z, c, sigma, zeta.values, weights)
        if res.max() <= tol:
            return StieltjesSolution(grid=z, values=s, iterations=total_iters,
                                     max_residual=float(res.max()))
    res = _fixed_point_residual(s, z, c, sigma, zeta.values, weights)
    raise SolverError(
        f"fixed point not converged: max residual {res.max():.3e} > tol {tol:.1e} "
        f"after {total_iters} iterations")


# ---------------------------------------------------------------------------
# Stieltjes-Perron inversion and CDF assembly
# ---------------------------------------------------------------------------

def stieltjes_invert(s_fn, x_grid, v):
    """Density approximation f(x) = Im s(x + i v) / pi on a real grid."""
    if v <= 0:
        raise ValueError("v must be positive")
    x = np.asarray(x_grid, dtype=float)
    s = np.asarray(s_fn(x + 1j * v), dtype=complex)
    f = s.imag / np.pi
    if f.min() < -1e-8:
        raise ValueError(f"inversion produced density < -1e-8 ({f.min():.3e})")
    return np.maximum(f, 0.0)


def stieltjes_invert_refined(s_fn, x_grid, v_schedule=(1e-1, 1e-2, 1e-3)):
    """Invert along a decreasing v schedule; report values at the smallest v
    plus a stability estimate (max change over the last refinement step)."""
    vs = sorted(v_schedule, reverse=True)
    prev = None
    stability = np.inf
    for v in vs:
        f = stieltjes_invert(s_fn, x_grid, v)
        if prev is not None:
            stability = float(np.max(np.abs(f - prev)))
        prev = f
    return prev, stability


def estimate_atom_at_zero(s_fn, v=1e-4):
    """Mass estimate v * |s(i v)| for an atom at 0 (reported, not certified)."""
    return float(v * abs(s_fn(1j * v)))


def generalized_mp_cdf(x_grid, density, atom_at_zero=0.0):
    """Monotone CDF from a density grid (trapezoid accumulation) plus an atom
    at 0; renormalizes when total mass is within [0.97, 1.03] and errors when
    outside [0.9, 1.1].
    """
    x = np.asarray(x_grid, dtype=float)
    f = np.asarray(density, dtype=float)
    if np.any(f < 0):
        raise ValueError("density must be nonnegative")
    widths = np.diff(x)
    partial = np.concatenate(([0.0], np.cumsum(0.5 * (f[1:] + f[:-1]) * widths)))
    mass = partial[-1] + atom_at_zero
    if not 0.9 <= mass <= 1.1:
        raise InversionQualityError(
            f"inverted density mass {mass:.4f} outside [0.9, 1.1]")
    correction = 1.0 / mass
    cont = partial * correction
    atom = atom_at_zero * correction

    def cdf(t):
        t = np.asarray(t, dtype=float)
        val = np.interp(t, x, cont, left=0.0, right=cont[-1])
        val = val + np.where(t >= 0, atom, 0.0)
        out = np.minimum(val, 1.0)
        return out if out.ndim else float(out)

    cdf.mass_correction = correction
    return cdf
