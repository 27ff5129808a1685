"""Kernel width selection: Silverman's rule times a cross-validated factor."""

from dataclasses import dataclass

import numpy as np

from .decomposition import calibrate_energies, decompose
from .exceptions import DegenerateDataError, InvalidParameterError
from .kernel_field import KernelField
from .metrics import roc_auc

DEFAULT_FACTOR_GRID = (0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0)


def silverman(points):
    """Silverman's rule-of-thumb width for ``(N, d)`` points.

    ``sigma_bar * (4 / ((d + 2) N)) ** (1 / (d + 4))`` with ``sigma_bar`` the
    mean of the per-dimension sample standard deviations.
    """
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    n, d = x.shape
    if n < 2:
        raise DegenerateDataError(f"Silverman's rule needs at least 2 points, got {n}")
    sd = x.std(axis=0, ddof=1).mean()
    if not sd > 0:
        raise DegenerateDataError("all points are identical")
    return float(sd * (4.0 / ((d + 2) * n)) ** (1.0 / (d + 4)))


@dataclass
class BandwidthConfig:
    silverman_sigma: float
    factor_grid: tuple = DEFAULT_FACTOR_GRID
    chosen_factor: float = None
    validation_fraction: float = 0.2
    seed: int = 0

    @property
    def sigma(self):
        if self.chosen_factor is None:
            raise InvalidParameterError("no factor has been chosen yet")
        return self.silverman_sigma * self.chosen_factor


def validation_split(n, fraction, seed):
    """Seeded (retained, held_out) index arrays, each sorted."""
    if not 0 < fraction < 1:
        raise InvalidParameterError(f"validation fraction must be in (0, 1), got {fraction!r}")
    n_val = int(round(n * fraction))
    if n_val < 1 or n_val >= n:
        raise InvalidParameterError(f"cannot hold out {fraction} of {n} samples")
    perm = np.random.default_rng(seed).permutation(n)
    return np.sort(perm[n_val:]), np.sort(perm[:n_val])


def factor_roc_aucs(train_preds, config, m=4, orders=None):
    """Held-out error-detection ROC-AUC for every factor in the grid.

    Returns ``None`` when the held-out split lacks either correct or wrong
    predictions, since the objective is then undefined.
    """
    if len(config.factor_grid) == 0:
        raise InvalidParameterError("factor grid is empty")
    if any(f <= 0 for f in config.factor_grid):
        raise InvalidParameterError("factors must be positive")
    keep, held = validation_split(len(train_preds), config.validation_fraction, config.seed)
    errors = train_preds.errors[held]
    if errors.sum() in (0, errors.size):
        return None
    points = train_preds.logits[keep]
    queries = train_preds.logits[held]
    aucs = {}
    for factor in config.factor_grid:
        field = KernelField(points, config.silverman_sigma * factor)
        energies = calibrate_energies(field, points, m=m, orders=orders)
        aucs[factor] = roc_auc(decompose(queries, field, energies).score, errors)
    return aucs


def cross_validate_factor(train_preds, config, m=4, orders=None):
    """Grid factor with the best held-out ROC-AUC; ties go to the smaller factor.

    Falls back to 1 when the held-out split has no errors (or no correct
    predictions).  A singleton grid is returned without any fitting.
    """
    grid = tuple(config.factor_grid)
    if not grid:
        raise InvalidParameterError("factor grid is empty")
    if len(grid) == 1:
        return grid[0]
    aucs = factor_roc_aucs(train_preds, config, m=m, orders=orders)
    if aucs is None:
        return 1.0
    best = None
    for factor in sorted(grid):
        if best is None or aucs[factor] > aucs[best]:
            best = factor
    return best
