"""Scikit-learn style front end for QIPF uncertainty scoring."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .bandwidth import DEFAULT_FACTOR_GRID, BandwidthConfig, cross_validate_factor, silverman
from .data import PredictionSet, downsample
from .decomposition import DEFAULT_GUARD, calibrate_energies, decompose
from .exceptions import InvalidParameterError, ShapeError
from .kernel_field import KernelField


class QIPFUncertainty(TransformerMixin, BaseEstimator):
    """Uncertainty modes of raw predictions in a Gaussian kernel field.

    ``fit`` takes the training raw predictions (logits) and builds the field
    from a seeded subsample of at most ``downsample_n`` of them.
    ``transform`` returns the ``(n_samples, n_modes)`` mode values of new
    predictions, and ``uncertainty`` their mean, used as the score.

    Parameters
    ----------
    n_modes : int
        Number of Hermite modes; orders ``1..n_modes`` unless
        ``mode_orders`` is given.
    mode_orders : sequence of int, optional
        Explicit mode orders (each >= 1).
    sigma : float, optional
        Absolute kernel width; bypasses Silverman's rule and ``sigma_factor``.
    sigma_factor : "auto" or float
        Multiplier on Silverman's width.  ``"auto"`` picks it from
        ``factor_grid`` by held-out error-detection ROC-AUC and needs ``y``.
    factor_grid : sequence of float
    val_frac : float
        Held-out fraction for the factor search.
    downsample_n : int or None
        Cap on the number of inducing points; ``None`` keeps all.
    calibration_set : array-like, optional
        Points over which energies are zeroed; defaults to the inducing set.
    guard : float
        Denominator clamp for Hermite modes near polynomial zeros.
    random_state : int
    """

    def __init__(
        self,
        n_modes=4,
        mode_orders=None,
        sigma=None,
        sigma_factor="auto",
        factor_grid=DEFAULT_FACTOR_GRID,
        val_frac=0.2,
        downsample_n=6000,
        calibration_set=None,
        guard=DEFAULT_GUARD,
        random_state=0,
    ):
        self.n_modes = n_modes
        self.mode_orders = mode_orders
        self.sigma = sigma
        self.sigma_factor = sigma_factor
        self.factor_grid = factor_grid
        self.val_frac = val_frac
        self.downsample_n = downsample_n
        self.calibration_set = calibration_set
        self.guard = guard
        self.random_state = random_state

    def fit(self, X, y=None):
        """Build the kernel field and calibrate mode energies.

        ``y`` holds true labels for ``X``; it is only needed when
        ``sigma_factor="auto"`` with more than one grid factor.
        """
        X = check_array(X, dtype=float)
        self.n_features_in_ = X.shape[1]
        labels = np.full(X.shape[0], -1) if y is None else np.asarray(y, dtype=int)
        preds = PredictionSet(X, labels)

        target = len(preds) if self.downsample_n is None else min(int(self.downsample_n), len(preds))
        inducing = downsample(preds, target, seed=self.random_state)
        if self.sigma is not None:
            self.silverman_sigma_ = None
            self.sigma_factor_ = None
            self.sigma_ = float(self.sigma)
            self.bandwidth_ = None
            return self._build(inducing)
        self.silverman_sigma_ = silverman(inducing.logits)

        config = BandwidthConfig(
            silverman_sigma=self.silverman_sigma_,
            factor_grid=tuple(self.factor_grid),
            validation_fraction=self.val_frac,
            seed=self.random_state,
        )
        if self.sigma_factor == "auto":
            if y is None and len(config.factor_grid) > 1:
                raise InvalidParameterError("sigma_factor='auto' needs true labels y")
            config.chosen_factor = cross_validate_factor(inducing, config, m=self.n_modes, orders=self.mode_orders)
        else:
            factor = float(self.sigma_factor)
            if not factor > 0:
                raise InvalidParameterError(f"sigma factor must be positive, got {self.sigma_factor!r}")
            config.chosen_factor = factor
        self.bandwidth_ = config
        self.sigma_factor_ = config.chosen_factor
        self.sigma_ = config.sigma
        return self._build(inducing)

    def _build(self, inducing):
        self.field_ = KernelField(inducing.logits, self.sigma_)
        calib = inducing.logits if self.calibration_set is None else self.calibration_set
        self.energies_ = calibrate_energies(self.field_, calib, m=self.n_modes, orders=self.mode_orders, guard=self.guard)
        return self

    def decompose(self, X):
        """Full :class:`~qipf.decomposition.ModeSpectrum` for new predictions."""
        check_is_fitted(self, "field_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ShapeError(f"expected {self.n_features_in_} logits per row, got {X.shape[1]}")
        return decompose(X, self.field_, self.energies_, guard=self.guard)

    def transform(self, X):
        return self.decompose(X).modes

    def uncertainty(self, X):
        """Mean mode value per row; larger means more uncertain."""
        return self.decompose(X).score
