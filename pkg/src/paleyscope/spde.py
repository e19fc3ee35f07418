r"""Monte Carlo for the additive-noise evolution driven by Wiener increments.

The mild solution with zero initial data is the stochastic convolution

    u(t, x) = sum_k int_0^t (p(t, s, .) * f^k(s, .))(x) dw^k_s,

discretized with the left-point rule, which is exact in distribution for
deterministic integrands sampled at grid times.  Increments come from a
counter-based generator keyed on (seed, path), so every path is reproducible
in isolation and ensembles parallelize without shared state.

All convolutions happen on the frequency side: with I[j] the cumulative
symbol integrals, the solution mode amplitudes are

    u_hat(t_i) = sum_k sum_{j < i} exp(I[i] - I[j]) fhat^k(s_j) dW^k_j.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import (
    SpaceTimeField,
    cumulative_symbol_integrals,
    fractional_multiplier,
    to_frequency,
)
from .squarefn import DegenerateFieldError, lp_space_time_norm, square_function

__all__ = [
    "NoiseSpec",
    "MomentEstimate",
    "PathEnsemble",
    "sample_brownian_increments",
    "stochastic_convolution",
    "ito_isometry_check",
    "moment_bound_check",
    "simulate_ensemble",
    "gaussianity_diagnostic",
]


@dataclass(frozen=True)
class NoiseSpec:
    """Wiener discretization: K independent modes, nt steps of size dt."""

    K: int
    seed: int
    dt: float
    nt: int

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("K must be at least 1")
        if not (self.dt > 0 and np.isfinite(self.dt)):
            raise ValueError("dt must be positive")
        if self.nt < 2:
            raise ValueError("nt must be at least 2")


@dataclass(frozen=True)
class MomentEstimate:
    """A Monte Carlo estimate with its standard error and sample count.

    ``majorant`` carries the deterministic square-function pathway value
    when the check computes one.
    """

    value: float
    std_error: float
    M: int
    majorant: float | None = None


@dataclass(frozen=True)
class PathEnsemble:
    """Solution samples u(t, .) for M paths at selected observation times.

    ``values`` has shape (M, len(t_indices)) + grid.shape; path m was driven
    by the increment stream keyed on (spec.seed, base_path + m).
    """

    spec: NoiseSpec
    grid: object
    t0: float
    t_indices: tuple
    base_path: int
    values: np.ndarray

    @property
    def M(self) -> int:
        return self.values.shape[0]


def sample_brownian_increments(spec, path):
    """Increment table dW[k, j] ~ N(0, dt), reproducible per (seed, path)."""
    key = np.array([spec.seed, path], dtype=np.uint64)
    rng = np.random.Generator(np.random.Philox(key=key))
    return rng.standard_normal((spec.K, spec.nt)) * np.sqrt(spec.dt)


def _check_compatible(f, spec):
    if f.k_h != spec.K:
        raise ValueError("field channel count must equal the noise mode count K")
    if f.nt != spec.nt:
        raise ValueError("field and noise specify different step counts")
    if not np.isclose(f.dt, spec.dt, rtol=1e-12, atol=0.0):
        raise ValueError("field and noise specify different time steps")


def _solution_modes(fhat, integrals, dW):
    """u_hat per output time from transformed slices and one increment table."""
    nt = fhat.shape[0]
    z = np.einsum("jk...,kj->j...", fhat, dW)
    uhat = np.zeros((nt,) + fhat.shape[2:], dtype=complex)
    for i in range(1, nt):
        decay = np.exp(integrals[i][None] - integrals[:i])
        uhat[i] = np.sum(decay * z[:i], axis=0)
    return uhat


def stochastic_convolution(sym, f, spec, path):
    """One solution path as a single-channel SpaceTimeField.

    ``f`` holds the K deterministic forcing channels; causality makes
    u(t_0) = 0 and u(t_i) depend only on increments with j < i.
    """
    _check_compatible(f, spec)
    g = f.grid
    fhat = to_frequency(f).values
    integrals = cumulative_symbol_integrals(sym, g, f.t0, f.dt, f.nt)
    dW = sample_brownian_increments(spec, path)
    uhat = _solution_modes(fhat, integrals, dW)
    axes = tuple(range(-g.d, 0))
    u = np.fft.ifftn(g.phase() * uhat, axes=axes) / g.h ** g.d
    return SpaceTimeField(grid=g, t0=f.t0, dt=f.dt, values=u[:, None],
                          domain="space")


def _point_coefficients(sym, f, t_index):
    """Frequency-side convolved slices (p(t*, s_j) * f^k(s_j)) for j < t*.

    Slices at j >= t_index stay zero; exponentials are only formed for
    nonpositive real parts, so elliptic decay cannot overflow.
    """
    g = f.grid
    fhat = to_frequency(f).values                      # (nt, K) + shape
    integrals = cumulative_symbol_integrals(sym, g, f.t0, f.dt, f.nt)
    conv_hat = np.zeros_like(fhat)
    decay = np.exp(integrals[t_index][None] - integrals[:t_index])
    conv_hat[:t_index] = decay[:, None] * fhat[:t_index]
    return conv_hat, integrals


def _evaluate_at_point(grid, freq_values, x_index):
    """Inverse transform of frequency-side values at one grid point."""
    x = grid.x_axis()
    xi = grid.xi_grid()
    point = np.array([x[i] for i in x_index])
    wave = np.exp(1j * np.tensordot(xi, point, axes=([-1], [0])))
    flat = freq_values.reshape(freq_values.shape[:-grid.d] + (-1,))
    return flat @ wave.ravel() / grid.L ** grid.d


def _default_point(grid):
    return (grid.n // 2,) * grid.d


def _increment_block(spec, M, base_path=0):
    """Stacked increment tables for paths base_path .. base_path + M - 1."""
    out = np.empty((M, spec.K, spec.nt))
    for m in range(M):
        out[m] = sample_brownian_increments(spec, base_path + m)
    return out


def ito_isometry_check(sym, f, spec, M, t_index=None, x_index=None,
                       base_path=0):
    """Relative error of the MC second moment against the exact discrete sum.

    At the observation point, E|u|^2 equals sum_{k, j < i*} |c_kj|^2 dt
    exactly for the left-point scheme, so the returned value is a pure MC
    convergence measurement: |mean - exact| / exact, with the standard error
    of the mean (also relative to the exact value) alongside.
    """
    _check_compatible(f, spec)
    if t_index is None:
        t_index = f.nt - 1
    if x_index is None:
        x_index = _default_point(f.grid)
    conv_hat, _ = _point_coefficients(sym, f, t_index)
    coeff = _evaluate_at_point(f.grid, conv_hat, x_index).T.copy()  # (K, nt)
    exact = float(np.sum(np.abs(coeff) ** 2) * spec.dt)
    if exact == 0.0:
        raise DegenerateFieldError("deterministic second moment is zero")
    dw = _increment_block(spec, M, base_path)
    samples = np.einsum("mkj,kj->m", dw, coeff)
    sq = np.abs(samples) ** 2
    mc = float(np.mean(sq))
    std_err = float(np.std(sq, ddof=1) / np.sqrt(M))
    return MomentEstimate(value=abs(mc - exact) / exact,
                          std_error=std_err / exact, M=M)


def moment_bound_check(sym, f, spec, M, p, derivative_order, base_path=0):
    """MC p-th moment of the derivative's space-time norm against ||f||_p^p.

    ``value`` is E ||D^eta u||_p^p / || |f| ||_p^p with eta the requested
    derivative order (applied as the Riesz multiplier |xi|^eta); ``majorant``
    reports the deterministic square-function pathway (||G f||_p/||f||_p)^p
    with the same eta.
    """
    if p < 2:
        raise ValueError("p must be at least 2")
    if derivative_order < 0:
        raise ValueError("derivative order must be nonnegative")
    _check_compatible(f, spec)
    g = f.grid
    eta = float(derivative_order)
    norm_f = lp_space_time_norm(f, p)
    if norm_f == 0.0:
        return MomentEstimate(value=0.0, std_error=0.0, M=M, majorant=0.0)
    fhat = to_frequency(f).values
    integrals = cumulative_symbol_integrals(sym, g, f.t0, f.dt, f.nt)
    riesz = fractional_multiplier(g, eta)
    axes = tuple(range(-g.d, 0))
    norms = np.empty(M)
    for m in range(M):
        dW = sample_brownian_increments(spec, base_path + m)
        uhat = _solution_modes(fhat, integrals, dW)
        du = np.fft.ifftn(g.phase() * (riesz * uhat), axes=axes) / g.h ** g.d
        mag = np.abs(du)
        norms[m] = np.sum(mag ** p) * g.h ** g.d * f.dt
    value = float(np.mean(norms)) / norm_f ** p
    std_err = float(np.std(norms, ddof=1) / np.sqrt(M)) / norm_f ** p
    G = square_function(sym, eta, f)
    majorant = (lp_space_time_norm(G, p) / norm_f) ** p
    return MomentEstimate(value=value, std_error=std_err, M=M,
                          majorant=float(majorant))


def simulate_ensemble(sym, f, spec, M, t_indices=None, base_path=0):
    """Solution fields for M paths at the requested observation times.

    The per-time mode coefficients are precomputed once, so each path costs
    one tensor contraction and one inverse transform per observation.
    """
    _check_compatible(f, spec)
    if t_indices is None:
        t_indices = (f.nt - 1,)
    t_indices = tuple(int(i) for i in t_indices)
    g = f.grid
    fhat = to_frequency(f).values
    integrals = cumulative_symbol_integrals(sym, g, f.t0, f.dt, f.nt)
    axes = tuple(range(-g.d, 0))
    coeffs = []
    for i in t_indices:
        a = np.zeros_like(fhat)                        # (nt, K) + shape
        decay = np.exp(integrals[i][None] - integrals[:i])
        a[:i] = decay[:, None] * fhat[:i]
        coeffs.append(np.moveaxis(a, 1, 0))            # (K, nt) + shape
    dw = _increment_block(spec, M, base_path)
    values = np.empty((M, len(t_indices)) + g.shape, dtype=complex)
    for slot, a in enumerate(coeffs):
        uhat = np.tensordot(dw, a, axes=([1, 2], [0, 1]))
        values[:, slot] = np.fft.ifftn(g.phase() * uhat, axes=axes) / g.h ** g.d
    return PathEnsemble(spec=spec, grid=g, t0=f.t0, t_indices=t_indices,
                        base_path=base_path, values=values)


def gaussianity_diagnostic(ensemble, t_slot=0, x_index=None):
    """Excess kurtosis of Re u at one observation point across paths."""
    if x_index is None:
        x_index = _default_point(ensemble.grid)
    samples = ensemble.values[(slice(None), t_slot) + tuple(x_index)].real
    centered = samples - samples.mean()
    m2 = float(np.mean(centered ** 2))
    if m2 == 0.0:
        raise DegenerateFieldError("degenerate ensemble: zero variance")
    m4 = float(np.mean(centered ** 4))
    return m4 / m2 ** 2 - 3.0
