"""Gaussian-kernel density field over a set of inducing points.

The field value at ``x`` is the mean of unnormalized Gaussian bumps

    f(x) = 1/N * sum_i exp(-|x - y_i|^2 / (2 sigma^2))

and the wavefunction is its square root.  All sums are accumulated with
Kahan compensation in the stored order of the inducing points, one query at
a time (vectorized across queries), so results do not depend on how queries
are batched.

Every kernel weight is computed relative to the nearest inducing point,
``w_i = exp(-(r_i^2 - r_min^2) / (2 sigma^2))``.  Ratios such as
``laplacian(psi) / psi`` are invariant to that common factor, so they stay
finite even where ``f`` itself underflows.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidParameterError, ShapeError

FAR_FIELD_THRESHOLD = 1e-300

# floats per block of the (queries x points x dim) difference tensor
_BLOCK_FLOATS = 2_000_000


def _check_sigma(sigma):
    sigma = float(sigma)
    if not np.isfinite(sigma) or sigma <= 0:
        raise InvalidParameterError(f"kernel width must be positive, got {sigma!r}")
    return sigma


def gaussian_kernel(u, sigma):
    """Unnormalized isotropic Gaussian ``exp(-|u|^2 / (2 sigma^2))``.

    ``u`` may be a single vector (returns a float) or an ``(n, d)`` array of
    vectors (returns an ``(n,)`` array).
    """
    sigma = _check_sigma(sigma)
    u = np.asarray(u, dtype=float)
    if u.ndim == 0:
        u = u.reshape(1)
    sq = np.sum(u * u, axis=-1)
    out = np.exp(-sq / (2.0 * sigma * sigma))
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True, eq=False)
class KernelField:
    """Inducing points ``(N, d)`` plus a scalar kernel width."""

    points: np.ndarray
    sigma: float

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ShapeError(f"inducing points must be a non-empty (N, d) array, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise InvalidParameterError("inducing points must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "sigma", _check_sigma(self.sigma))

    @property
    def n_points(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]

    def as_queries(self, query):
        """Coerce ``query`` to a 2-D array matching the field dimension.

        Returns the array and whether the input was a single vector.
        """
        q = np.asarray(query, dtype=float)
        single = False
        if q.ndim == 0:
            q = q.reshape(1, 1)
            single = True
        elif q.ndim == 1:
            if self.dim == 1 and q.shape[0] != 1:
                q = q.reshape(-1, 1)
            else:
                q = q.reshape(1, -1)
                single = True
        if q.ndim != 2 or q.shape[1] != self.dim:
            raise ShapeError(f"query dimension {q.shape[-1]} does not match field dimension {self.dim}")
        return q, single


@dataclass(frozen=True)
class FieldMoments:
    """Compensated kernel sums at a batch of queries.

    ``weight_sum``, ``offset_sum`` and ``sq_dist_sum`` are the sums of
    ``w_i``, ``w_i (y_i - x)`` and ``w_i |y_i - x|^2`` with weights taken
    relative to the nearest inducing point (``min_sq_dist``).
    """

    min_sq_dist: np.ndarray
    weight_sum: np.ndarray
    offset_sum: np.ndarray
    sq_dist_sum: np.ndarray
    n_points: int
    sigma: float

    @property
    def dim(self):
        return self.offset_sum.shape[1]

    @property
    def ipf(self):
        s2 = self.sigma**2
        return np.exp(-self.min_sq_dist / (2.0 * s2)) * (self.weight_sum / self.n_points)

    @property
    def wavefunction(self):
        s2 = self.sigma**2
        return np.exp(-self.min_sq_dist / (4.0 * s2)) * np.sqrt(self.weight_sum / self.n_points)

    @property
    def ipf_gradient(self):
        s2 = self.sigma**2
        return self.ipf[:, None] * self.offset_sum / (self.weight_sum[:, None] * s2)

    @property
    def ipf_laplacian(self):
        s2 = self.sigma**2
        mean_sq = self.sq_dist_sum / self.weight_sum
        return self.ipf * (mean_sq / s2**2 - self.dim / s2)

    @property
    def laplacian_ratio(self):
        """``laplacian(psi) / psi``, finite everywhere."""
        s2 = self.sigma**2
        mean_sq = self.sq_dist_sum / self.weight_sum
        mean_off = self.offset_sum / self.weight_sum[:, None]
        drift = np.sum(mean_off * mean_off, axis=1)
        return mean_sq / (2.0 * s2**2) - self.dim / (2.0 * s2) - drift / (4.0 * s2**2)

    @property
    def gradient_ratio_sq(self):
        """``|grad psi|^2 / psi^2``, finite everywhere."""
        s2 = self.sigma**2
        mean_off = self.offset_sum / self.weight_sum[:, None]
        return np.sum(mean_off * mean_off, axis=1) / (4.0 * s2**2)

    @property
    def far_field(self):
        """Queries where the field value underflows below ``FAR_FIELD_THRESHOLD``."""
        return self.ipf < FAR_FIELD_THRESHOLD


def field_moments(queries, field):
    """Kahan-compensated kernel sums for an ``(Q, d)`` batch of queries."""
    q, _ = field.as_queries(queries)
    pts = field.points
    n, d = pts.shape
    two_s2 = 2.0 * field.sigma**2
    nq = q.shape[0]

    min_sq = np.empty(nq)
    sums = np.empty((nq, d + 2))
    block = max(1, _BLOCK_FLOATS // max(1, n * d))
    for start in range(0, nq, block):
        qb = q[start : start + block]
        diff = pts[None, :, :] - qb[:, None, :]
        sq = np.sum(diff * diff, axis=2)
        m = sq.min(axis=1)
        s = np.zeros((qb.shape[0], d + 2))
        c = np.zeros_like(s)
        term = np.empty_like(s)
        for i in range(n):
            w = np.exp(-(sq[:, i] - m) / two_s2)
            term[:, 0] = w
            term[:, 1 : d + 1] = w[:, None] * diff[:, i, :]
            term[:, d + 1] = w * sq[:, i]
            y = term - c
            t = s + y
            c = (t - s) - y
            s = t
        min_sq[start : start + block] = m
        sums[start : start + block] = s

    return FieldMoments(
        min_sq_dist=min_sq,
        weight_sum=sums[:, 0],
        offset_sum=sums[:, 1 : d + 1],
        sq_dist_sum=sums[:, d + 1],
        n_points=n,
        sigma=field.sigma,
    )


def _unwrap(values, single):
    return float(values[0]) if single else values


def ipf(query, field):
    """Information potential field: mean Gaussian bump value at ``query``."""
    _, single = field.as_queries(query)
    return _unwrap(field_moments(query, field).ipf, single)


def wavefunction(query, field):
    """Square root of :func:`ipf`."""
    _, single = field.as_queries(query)
    return _unwrap(field_moments(query, field).wavefunction, single)


def ipf_gradient(query, field):
    """Analytic gradient of :func:`ipf`; shape ``(d,)`` or ``(Q, d)``."""
    _, single = field.as_queries(query)
    grad = field_moments(query, field).ipf_gradient
    return grad[0] if single else grad


def wavefunction_laplacian(query, field):
    """Analytic Laplacian of the wavefunction ``sqrt(ipf)``.

    Computed as ``psi * (laplacian(psi) / psi)`` so that the ratio stays
    exact when ``psi`` is tiny; it underflows to 0 only with ``psi``.
    """
    _, single = field.as_queries(query)
    mom = field_moments(query, field)
    return _unwrap(mom.wavefunction * mom.laplacian_ratio, single)
