"""Small NumPy MLP classifier and the sampling-based uncertainty baselines.

The classifier exposes its raw logits through ``decision_function``; those
are what the QIPF estimator consumes.  MC-Dropout and ensembles score each
input by the population standard deviation of the max-softmax probability
across stochastic runs or members.
"""

import json

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .data import PredictionSet
from .exceptions import InvalidParameterError, ParseError, ShapeError, TrainingDivergedError

MODEL_FORMAT = "qipf-toy-mlp"
MODEL_VERSION = 1


def softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    ez = np.exp(z)
    return ez / ez.sum(axis=1, keepdims=True)


def _dense(x, w, b):
    # fixed accumulation order over inputs; identical for batched and single rows
    out = np.broadcast_to(b, (x.shape[0], w.shape[1])).copy()
    for j in range(w.shape[0]):
        out += x[:, j : j + 1] * w[j]
    return out


def dropout_mask(shape, rate, rng):
    """Inverted-dropout mask: kept units are scaled by ``1 / (1 - rate)``."""
    if not 0 <= rate < 1:
        raise InvalidParameterError(f"dropout rate must be in [0, 1), got {rate!r}")
    if rate == 0:
        return np.ones(shape)
    return (rng.random(shape) >= rate) / (1.0 - rate)


class ToyMLP(ClassifierMixin, BaseEstimator):
    """ReLU MLP trained with Adam on softmax cross-entropy.

    Parameters
    ----------
    hidden_layer_sizes : tuple of int
        Widths of the hidden layers.
    epochs : int
        Full passes over the training data.
    learning_rate : float
        Adam step size.
    batch_size : int
        Minibatch size; batch order is reshuffled every epoch.
    dropout_rate : float
        Training-time dropout applied before each dense layer.
    random_state : int
        Seed for initialization, shuffling and dropout masks.
    """

    def __init__(
        self,
        hidden_layer_sizes=(64, 32),
        epochs=200,
        learning_rate=1e-3,
        batch_size=32,
        dropout_rate=0.0,
        random_state=0,
    ):
        self.hidden_layer_sizes = hidden_layer_sizes
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.dropout_rate = dropout_rate
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=float)
        if self.epochs < 1:
            raise InvalidParameterError(f"epochs must be >= 1, got {self.epochs!r}")
        if not 0 <= self.dropout_rate < 1:
            raise InvalidParameterError(f"dropout rate must be in [0, 1), got {self.dropout_rate!r}")
        y = np.asarray(y, dtype=int)
        if y.min() < 0 or len(np.unique(y)) < 2:
            raise InvalidParameterError("need at least two classes with labels in 0..k-1")
        k = int(y.max()) + 1
        self.classes_ = np.arange(k)
        self.n_features_in_ = X.shape[1]
        sizes = [X.shape[1], *self.hidden_layer_sizes, k]
        rng = np.random.default_rng(self.random_state)
        self.coefs_ = [rng.normal(0.0, np.sqrt(2.0 / a), size=(a, b)) for a, b in zip(sizes[:-1], sizes[1:])]
        self.intercepts_ = [np.zeros(b) for b in sizes[1:]]

        params = self.coefs_ + self.intercepts_
        m = [np.zeros_like(p) for p in params]
        v = [np.zeros_like(p) for p in params]
        beta1, beta2, eps = 0.9, 0.999, 1e-8
        onehot = np.eye(k)[y]
        n = X.shape[0]
        step = 0
        self.loss_curve_ = []
        for epoch in range(1, self.epochs + 1):
            order = rng.permutation(n)
            total = 0.0
            for start in range(0, n, self.batch_size):
                idx = order[start : start + self.batch_size]
                loss, grads = self._loss_and_grads(X[idx], onehot[idx], rng)
                total += loss * len(idx)
                step += 1
                for i, (p, g) in enumerate(zip(params, grads)):
                    m[i] = beta1 * m[i] + (1 - beta1) * g
                    v[i] = beta2 * v[i] + (1 - beta2) * g * g
                    mhat = m[i] / (1 - beta1**step)
                    vhat = v[i] / (1 - beta2**step)
                    p -= self.learning_rate * mhat / (np.sqrt(vhat) + eps)
            epoch_loss = total / n
            if not np.isfinite(epoch_loss):
                raise TrainingDivergedError(epoch)
            self.loss_curve_.append(epoch_loss)
        self.training_accuracy_ = float(np.mean(self.predict(X) == y))
        return self

    def _loss_and_grads(self, x, target, rng):
        n_layers = len(self.coefs_)
        inputs, masks, pre = [], [], []
        a = x
        for i, (w, b) in enumerate(zip(self.coefs_, self.intercepts_)):
            mask = dropout_mask(a.shape, self.dropout_rate, rng)
            a = a * mask
            inputs.append(a)
            masks.append(mask)
            z = a @ w + b
            pre.append(z)
            a = np.maximum(z, 0.0) if i < n_layers - 1 else z
        prob = softmax(a)
        with np.errstate(divide="ignore", invalid="ignore"):
            loss = -np.mean(np.sum(target * np.log(prob), axis=1))
        delta = (prob - target) / x.shape[0]
        gw, gb = [None] * n_layers, [None] * n_layers
        for i in reversed(range(n_layers)):
            gw[i] = inputs[i].T @ delta
            gb[i] = delta.sum(axis=0)
            if i > 0:
                delta = (delta @ self.coefs_[i].T) * masks[i] * (pre[i - 1] > 0)
        return float(loss), gw + gb

    def forward(self, X, rate=0.0, rng=None, masks=None):
        """Logits with optional inverted dropout before each dense layer.

        ``masks`` overrides sampling with one explicit mask per layer.
        """
        check_is_fitted(self, "coefs_")
        a = np.asarray(X, dtype=float)
        if a.ndim != 2 or a.shape[1] != self.n_features_in_:
            raise ShapeError(f"expected inputs with {self.n_features_in_} features, got shape {a.shape}")
        n_layers = len(self.coefs_)
        for i, (w, b) in enumerate(zip(self.coefs_, self.intercepts_)):
            if masks is not None:
                a = a * masks[i]
            elif rate > 0:
                a = a * dropout_mask(a.shape, rate, rng)
            a = _dense(a, w, b)
            if i < n_layers - 1:
                a = np.maximum(a, 0.0)
        return a

    def decision_function(self, X):
        """Raw prediction vectors (logits before softmax)."""
        X = check_array(X, dtype=float)
        return self.forward(X)

    def predict_proba(self, X):
        return softmax(self.decision_function(X))

    def predict(self, X):
        return np.argmax(self.decision_function(X), axis=1)

    @property
    def layer_sizes_(self):
        return [self.coefs_[0].shape[0]] + [w.shape[1] for w in self.coefs_]

    def to_dict(self):
        check_is_fitted(self, "coefs_")
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "layer_sizes": self.layer_sizes_,
            "params": self.get_params(),
            "weights": [w.tolist() for w in self.coefs_],
            "biases": [b.tolist() for b in self.intercepts_],
            "training": {
                "accuracy": self.training_accuracy_,
                "final_loss": self.loss_curve_[-1] if self.loss_curve_ else None,
            },
        }

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def from_dict(cls, data):
        if data.get("format") != MODEL_FORMAT or data.get("version") != MODEL_VERSION:
            raise ParseError("not a version-1 toy MLP document")
        params = dict(data["params"])
        params["hidden_layer_sizes"] = tuple(params["hidden_layer_sizes"])
        model = cls(**params)
        model.coefs_ = [np.array(w, dtype=float) for w in data["weights"]]
        model.intercepts_ = [np.array(b, dtype=float) for b in data["biases"]]
        model.n_features_in_ = model.coefs_[0].shape[0]
        model.classes_ = np.arange(model.coefs_[-1].shape[1])
        model.training_accuracy_ = data["training"]["accuracy"]
        model.loss_curve_ = [] if data["training"]["final_loss"] is None else [data["training"]["final_loss"]]
        return model

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}: {exc}") from None
        return cls.from_dict(data)


def train(dataset, epochs=200, learning_rate=1e-3, seed=0, **kwargs):
    """Fit a :class:`ToyMLP` on the training split of ``dataset``."""
    model = ToyMLP(epochs=epochs, learning_rate=learning_rate, random_state=seed, **kwargs)
    return model.fit(dataset.X_train, dataset.y_train)


def predict_raw(model, inputs, labels):
    return PredictionSet(model.decision_function(inputs), labels)


def train_ensemble(dataset, size=10, seed=0, **kwargs):
    """Independently initialized members, seeded ``seed, seed + 1, ...``."""
    if size < 2:
        raise InvalidParameterError(f"ensemble needs at least 2 members, got {size}")
    return [train(dataset, seed=seed + i, **kwargs) for i in range(size)]


def _spread(top):
    # population std over runs; centring on the first run makes identical runs exactly 0
    return (top - top[0]).std(axis=0)


def mc_dropout_score(model, X, rate=0.2, T=100, seed=0, masks=None):
    """Std of the max-softmax probability over ``T`` dropout forward passes.

    ``masks``, if given, is a list of per-run mask lists and fixes ``T``.
    """
    if not 0 <= rate < 1:
        raise InvalidParameterError(f"dropout rate must be in [0, 1), got {rate!r}")
    X = np.asarray(X, dtype=float)
    if masks is None:
        if T < 2:
            raise InvalidParameterError(f"need at least 2 forward runs, got {T}")
        rng = np.random.default_rng(seed)
        runs = [model.forward(X, rate=rate, rng=rng) for _ in range(T)]
    else:
        runs = [model.forward(X, masks=mk) for mk in masks]
    return _spread(np.stack([softmax(z).max(axis=1) for z in runs]))


def ensemble_score(models, X):
    """Std of the max-softmax probability across ensemble members."""
    if len(models) < 2:
        raise InvalidParameterError(f"ensemble needs at least 2 members, got {len(models)}")
    shapes = {tuple(m.layer_sizes_) for m in models}
    if len(shapes) != 1:
        raise ShapeError(f"ensemble members disagree on layer sizes: {sorted(shapes)}")
    return _spread(np.stack([m.predict_proba(X).max(axis=1) for m in models]))
