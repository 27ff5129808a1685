"""Schrödinger moment decomposition of a kernel density field.

The base potential at ``x`` is

    V(x) = E + (sigma^2 / 2) * laplacian(psi)(x) / psi(x)

with ``psi`` the wavefunction of a :class:`~qipf.kernel_field.KernelField`.
Higher modes replace ``psi`` by its Hermite projection ``psi_p = H*_p(psi)``.
Each energy is fixed so that the minimum of its mode over a calibration set
is exactly zero.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exceptions import InvalidParameterError, ShapeError
from .kernel_field import field_moments

DEFAULT_GUARD = 1e-10


def _check_order(p, minimum=0):
    if int(p) != p or p < minimum:
        raise InvalidParameterError(f"Hermite order must be an integer >= {minimum}, got {p!r}")
    return int(p)


def hermite(p, x):
    """Physicists' Hermite polynomial ``H_p(x)`` by three-term recurrence."""
    p = _check_order(p)
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if p == 0:
        return prev if prev.ndim else float(prev)
    cur = 2.0 * x
    for n in range(1, p):
        prev, cur = cur, 2.0 * x * cur - 2.0 * n * prev
    return cur if cur.ndim else float(cur)


def hermite_norm(p):
    """Oscillator normalization constant ``1 / sqrt(2^p p! sqrt(pi))``."""
    p = _check_order(p)
    return 1.0 / math.sqrt(2.0**p * math.factorial(p) * math.sqrt(math.pi))


def hermite_normalized(p, x):
    """``H*_p(x) = H_p(x) / sqrt(2^p p! sqrt(pi))``."""
    return hermite_norm(p) * hermite(p, x)


def hermite_normalized_derivatives(p, x):
    """Return ``H*_p``, ``H*_p'`` and ``H*_p''`` at ``x``.

    Uses ``H_p' = 2p H_{p-1}`` twice.
    """
    p = _check_order(p)
    c = hermite_norm(p)
    x = np.asarray(x, dtype=float)
    h0 = c * hermite(p, x)
    h1 = c * 2.0 * p * hermite(p - 1, x) if p >= 1 else np.zeros_like(x)
    h2 = c * 4.0 * p * (p - 1) * hermite(p - 2, x) if p >= 2 else np.zeros_like(x)
    return h0, h1, h2


@lru_cache(maxsize=None)
def _power_coefficients(p):
    # exact integer coefficients of H_p in the monomial basis, lowest degree first
    prev, cur = [1], [0, 2]
    if p == 0:
        return tuple(prev)
    for n in range(1, p):
        nxt = [0] * (n + 2)
        for j, a in enumerate(cur):
            nxt[j + 1] += 2 * a
        for j, a in enumerate(prev):
            nxt[j] -= 2 * n * a
        prev, cur = cur, nxt
    return tuple(cur)


def _reduced_denominator(p, psi):
    """``H*_p(psi)`` for even ``p``; ``H*_p(psi) / psi`` for odd ``p``.

    Odd Hermite polynomials vanish at the origin, but ``psi > 0`` strictly,
    so that root is divided out before guarding.
    """
    if p % 2 == 0:
        return hermite_normalized(p, psi)
    coeffs = np.array(_power_coefficients(p)[1:], dtype=float)
    return hermite_norm(p) * np.polynomial.polynomial.polyval(psi, coeffs)


def _guard(values, guard):
    small = np.abs(values) < guard
    if not np.any(small):
        return values
    values = values.copy()
    values[small] = np.where(values[small] < 0, -guard, guard)
    return values


def _mode_ratios(moments, orders, guard):
    psi = moments.wavefunction
    lap = moments.laplacian_ratio
    grad_sq = moments.gradient_ratio_sq
    half_s2 = moments.sigma**2 / 2.0
    out = np.empty((psi.shape[0], len(orders)))
    for j, p in enumerate(orders):
        _, d1, d2 = hermite_normalized_derivatives(p, psi)
        if p % 2 == 0:
            num = d2 * psi * psi * grad_sq + d1 * psi * lap
        else:
            num = d2 * psi * grad_sq + d1 * lap
        den = _guard(_reduced_denominator(p, psi), guard)
        out[:, j] = half_s2 * num / den
    return out


def _base_ratio(moments):
    return moments.sigma**2 / 2.0 * moments.laplacian_ratio


def base_ratio(query, field):
    """Un-shifted base term ``(sigma^2/2) laplacian(psi)/psi``."""
    _, single = field.as_queries(query)
    r = _base_ratio(field_moments(query, field))
    return float(r[0]) if single else r


def mode_laplacian(p, query, field):
    """Laplacian of ``psi_p = H*_p(psi)`` by the chain rule."""
    p = _check_order(p, 1)
    _, single = field.as_queries(query)
    mom = field_moments(query, field)
    psi = mom.wavefunction
    _, d1, d2 = hermite_normalized_derivatives(p, psi)
    grad_sq = psi * psi * mom.gradient_ratio_sq
    lap = psi * mom.laplacian_ratio
    out = d2 * grad_sq + d1 * lap
    return float(out[0]) if single else out


def raw_mode_ratio(p, query, field, guard=DEFAULT_GUARD):
    """Un-shifted mode term ``(sigma^2/2) laplacian(psi_p)/psi_p``.

    Denominators with magnitude below ``guard`` are clamped to
    ``+-guard`` so values near polynomial zeros stay finite.
    """
    p = _check_order(p, 1)
    _, single = field.as_queries(query)
    r = _mode_ratios(field_moments(query, field), [p], guard)[:, 0]
    return float(r[0]) if single else r


@dataclass(frozen=True)
class Energies:
    """Per-mode shifts that zero each mode's minimum on a calibration set."""

    base: float
    modes: np.ndarray
    orders: tuple


@dataclass(frozen=True)
class ModeSpectrum:
    base_qipf: np.ndarray
    modes: np.ndarray
    energies: Energies
    far_field: np.ndarray

    @property
    def orders(self):
        return self.energies.orders

    @property
    def m(self):
        return self.modes.shape[1]

    @property
    def score(self):
        return self.modes.mean(axis=1)


def _resolve_orders(m, orders):
    if orders is None:
        if int(m) != m or m < 1:
            raise InvalidParameterError(f"mode count must be a positive integer, got {m!r}")
        return tuple(range(1, int(m) + 1))
    orders = tuple(_check_order(p, 1) for p in orders)
    if not orders:
        raise InvalidParameterError("at least one mode order is required")
    return orders


def calibrate_energies(field, calibration_set, m=4, orders=None, guard=DEFAULT_GUARD):
    """Energies ``E = -min ratio`` over ``calibration_set`` for the base and each mode."""
    q = np.asarray(calibration_set, dtype=float)
    if q.size == 0:
        raise InvalidParameterError("calibration set is empty")
    orders = _resolve_orders(m, orders)
    mom = field_moments(q, field)
    base = -float(np.min(_base_ratio(mom)))
    modes = -np.min(_mode_ratios(mom, orders, guard), axis=0)
    return Energies(base=base, modes=modes, orders=orders)


def decompose(queries, field, energies, guard=DEFAULT_GUARD, clip=None):
    """Base potential and shifted modes at each query.

    ``clip`` optionally caps reported mode values (useful for plotting
    near polynomial zeros); scoring leaves it unset.
    """
    q, _ = field.as_queries(queries)
    if q.shape[0] == 0:
        raise ShapeError("no queries given")
    mom = field_moments(q, field)
    base = _base_ratio(mom) + energies.base
    modes = _mode_ratios(mom, energies.orders, guard) + energies.modes
    if clip is not None:
        modes = np.minimum(modes, clip)
    return ModeSpectrum(base_qipf=base, modes=modes, energies=energies, far_field=mom.far_field)
