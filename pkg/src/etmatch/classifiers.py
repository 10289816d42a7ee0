"""Four binary classifiers behind the scikit-learn estimator API.

All four are implemented here directly (no fitting delegated to external
libraries) so that trained parameters serialize to plain numbers and
reload to bit-identical predictions. They follow the usual conventions:
hyperparameters in ``__init__``, learned state in trailing-underscore
attributes, ``fit`` / ``predict`` / ``predict_proba``, and compatibility
with ``sklearn.base.clone``.

Fitting is deterministic: randomized families consume named streams
derived from ``random_state``, and the full-batch logistic model fixes a
canonical row order before summing gradients.
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .errors import TrainingDataError
from .seeds import child_seed

MODEL_TYPES = ("random_forest", "sgd_linear", "decision_tree", "logistic_regression")


def _check_binary(y: np.ndarray) -> None:
    classes = np.unique(y)
    if classes.size != 2 or not np.array_equal(classes, [0, 1]):
        raise TrainingDataError(
            f"training data must contain both classes 0 and 1, found {classes.tolist()}"
        )


def _canonical_order(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    # Gradient sums are order-sensitive in floating point; fixing a
    # canonical row order makes full-batch fitting permutation-invariant.
    keys = [y] + [X[:, j] for j in range(X.shape[1] - 1, -1, -1)]
    return np.lexsort(keys)


def _sigmoid(z: np.ndarray | float) -> np.ndarray | float:
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))


class LogisticRegressionGD(BaseEstimator, ClassifierMixin):
    """Log-loss linear model fitted by full-batch gradient descent."""

    def __init__(self, learning_rate: float = 0.1, epochs: int = 500, l2: float = 1e-4):
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.l2 = l2

    def fit(self, X, y) -> "LogisticRegressionGD":
        X, y = check_X_y(X, y)
        _check_binary(y)
        order = _canonical_order(X, y)
        X = X[order]
        y = y[order].astype(np.float64)
        n, d = X.shape
        w = np.zeros(d)
        b = 0.0
        for _ in range(self.epochs):
            p = _sigmoid(X @ w + b)
            diff = p - y
            grad_w = X.T @ diff / n + self.l2 * w
            grad_b = float(np.sum(diff)) / n
            w -= self.learning_rate * grad_w
            b -= self.learning_rate * grad_b
        self.coef_ = w
        self.intercept_ = b
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = d
        return self

    def decision_function(self, X) -> np.ndarray:
        check_is_fitted(self, "coef_")
        X = check_array(X)
        return X @ self.coef_ + self.intercept_

    def predict_proba(self, X) -> np.ndarray:
        p1 = _sigmoid(self.decision_function(X))
        return np.column_stack([1.0 - p1, p1])

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X)[:, 1] >= 0.5).astype(np.int64)

    def to_payload(self) -> dict:
        check_is_fitted(self, "coef_")
        return {"weights": self.coef_.tolist(), "bias": float(self.intercept_)}

    def load_payload(self, payload: dict) -> "LogisticRegressionGD":
        self.coef_ = np.asarray(payload["weights"], dtype=np.float64)
        self.intercept_ = float(payload["bias"])
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = self.coef_.size
        return self


class HingeSGDClassifier(BaseEstimator, ClassifierMixin):
    """Hinge-loss linear model fitted by per-example stochastic updates.

    Epoch order is shuffled from a stream derived from ``random_state``;
    scores are calibrated through a sigmoid on the margin.
    """

    def __init__(self, learning_rate: float = 0.01, epochs: int = 20, random_state: int = 0):
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.random_state = random_state

    def fit(self, X, y) -> "HingeSGDClassifier":
        X, y = check_X_y(X, y)
        _check_binary(y)
        n, d = X.shape
        signed = np.where(y == 1, 1.0, -1.0)
        w = np.zeros(d)
        b = 0.0
        rng = np.random.Generator(np.random.PCG64(child_seed(self.random_state, "sgd")))
        for _ in range(self.epochs):
            for i in rng.permutation(n):
                if signed[i] * (X[i] @ w + b) < 1.0:
                    w += self.learning_rate * signed[i] * X[i]
                    b += self.learning_rate * signed[i]
        self.coef_ = w
        self.intercept_ = b
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = d
        return self

    def decision_function(self, X) -> np.ndarray:
        check_is_fitted(self, "coef_")
        X = check_array(X)
        return X @ self.coef_ + self.intercept_

    def predict_proba(self, X) -> np.ndarray:
        p1 = _sigmoid(self.decision_function(X))
        return np.column_stack([1.0 - p1, p1])

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X)[:, 1] >= 0.5).astype(np.int64)

    def to_payload(self) -> dict:
        check_is_fitted(self, "coef_")
        return {"weights": self.coef_.tolist(), "bias": float(self.intercept_)}

    def load_payload(self, payload: dict) -> "HingeSGDClassifier":
        self.coef_ = np.asarray(payload["weights"], dtype=np.float64)
        self.intercept_ = float(payload["bias"])
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = self.coef_.size
        return self


def _gini(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts / total
    return float(1.0 - np.sum(p * p))


def _grow_tree(X: np.ndarray, y: np.ndarray, depth: int, max_depth: int, min_leaf: int) -> dict:
    n = y.size
    n_pos = int(y.sum())
    leaf = {"value": n_pos / n, "samples": n}
    if depth >= max_depth or n < 2 * min_leaf or n_pos in (0, n):
        return leaf

    parent_gini = _gini(np.array([n - n_pos, n_pos]))
    best: tuple[float, int, float] | None = None  # (weighted gini, feature, threshold)
    for j in range(X.shape[1]):
        column = X[:, j]
        values = np.unique(column)
        if values.size < 2:
            continue
        thresholds = (values[:-1] + values[1:]) / 2.0
        for t in thresholds:
            mask = column <= t
            n_left = int(mask.sum())
            if n_left < min_leaf or n - n_left < min_leaf:
                continue
            left_pos = int(y[mask].sum())
            right_pos = n_pos - left_pos
            gini_left = _gini(np.array([n_left - left_pos, left_pos]))
            gini_right = _gini(np.array([(n - n_left) - right_pos, right_pos]))
            weighted = (n_left * gini_left + (n - n_left) * gini_right) / n
            cand = (weighted, j, float(t))
            if best is None or cand < best:
                best = cand
    if best is None or best[0] >= parent_gini:
        return leaf
    _, feature, threshold = best
    mask = X[:, feature] <= threshold
    return {
        "feature": feature,
        "threshold": threshold,
        "left": _grow_tree(X[mask], y[mask], depth + 1, max_depth, min_leaf),
        "right": _grow_tree(X[~mask], y[~mask], depth + 1, max_depth, min_leaf),
    }


def _tree_score(node: dict, row: np.ndarray) -> float:
    while "feature" in node:
        node = node["left"] if row[node["feature"]] <= node["threshold"] else node["right"]
    return node["value"]


class CartDecisionTree(BaseEstimator, ClassifierMixin):
    """Binary CART tree: Gini impurity, midpoint threshold splits.

    Splits are evaluated exhaustively; ties break on the lowest weighted
    impurity, then lowest feature index and threshold, so fitting needs no
    randomness. Leaves store the positive-class fraction.
    """

    def __init__(self, max_depth: int = 8, min_leaf: int = 2):
        self.max_depth = max_depth
        self.min_leaf = min_leaf

    def fit(self, X, y) -> "CartDecisionTree":
        X, y = check_X_y(X, y)
        _check_binary(y)
        self.tree_ = _grow_tree(X, y.astype(np.int64), 0, self.max_depth, self.min_leaf)
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = X.shape[1]
        return self

    def predict_proba(self, X) -> np.ndarray:
        check_is_fitted(self, "tree_")
        X = check_array(X)
        p1 = np.asarray([_tree_score(self.tree_, row) for row in X])
        return np.column_stack([1.0 - p1, p1])

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X)[:, 1] >= 0.5).astype(np.int64)

    def to_payload(self) -> dict:
        check_is_fitted(self, "tree_")
        return {"tree": self.tree_}

    def load_payload(self, payload: dict) -> "CartDecisionTree":
        self.tree_ = payload["tree"]
        self.classes_ = np.array([0, 1])
        return self


class RandomForest(BaseEstimator, ClassifierMixin):
    """Bagged CART trees with per-tree feature subsampling.

    Every tree draws its bootstrap sample and its sqrt(d) feature subset
    from an independent stream derived from ``random_state``, so a
    sequential and a parallel fit produce the same forest. Scores average
    the per-tree leaf fractions.
    """

    def __init__(
        self,
        n_trees: int = 100,
        max_depth: int = 8,
        min_leaf: int = 2,
        random_state: int = 0,
    ):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.random_state = random_state

    def fit(self, X, y) -> "RandomForest":
        X, y = check_X_y(X, y)
        _check_binary(y)
        n, d = X.shape
        n_sub = max(1, int(math.sqrt(d)))
        trees: list[dict] = []
        for i in range(self.n_trees):
            rng = np.random.Generator(np.random.PCG64(child_seed(self.random_state, f"tree:{i}")))
            boot = rng.integers(0, n, size=n)
            feats = np.sort(rng.choice(d, size=n_sub, replace=False))
            Xb = X[boot][:, feats]
            yb = y[boot].astype(np.int64)
            if yb.sum() in (0, yb.size):
                node = {"value": float(yb.sum()) / yb.size, "samples": int(yb.size)}
            else:
                node = _grow_tree(Xb, yb, 0, self.max_depth, self.min_leaf)
            trees.append({"features": feats.tolist(), "tree": node})
        self.trees_ = trees
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = d
        return self

    def predict_proba(self, X) -> np.ndarray:
        check_is_fitted(self, "trees_")
        X = check_array(X)
        scores = np.zeros(X.shape[0])
        for member in self.trees_:
            feats = member["features"]
            sub = X[:, feats]
            scores += np.asarray([_tree_score(member["tree"], row) for row in sub])
        p1 = scores / len(self.trees_)
        return np.column_stack([1.0 - p1, p1])

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X)[:, 1] >= 0.5).astype(np.int64)

    def to_payload(self) -> dict:
        check_is_fitted(self, "trees_")
        return {"trees": self.trees_}

    def load_payload(self, payload: dict) -> "RandomForest":
        self.trees_ = payload["trees"]
        self.classes_ = np.array([0, 1])
        return self


_FAMILIES = {
    "logistic_regression": LogisticRegressionGD,
    "sgd_linear": HingeSGDClassifier,
    "decision_tree": CartDecisionTree,
    "random_forest": RandomForest,
}

DEFAULT_HYPERPARAMS: dict[str, dict] = {
    "logistic_regression": {"learning_rate": 0.1, "epochs": 500, "l2": 1e-4},
    "sgd_linear": {"learning_rate": 0.01, "epochs": 20},
    "decision_tree": {"max_depth": 8, "min_leaf": 2},
    "random_forest": {"n_trees": 100, "max_depth": 8, "min_leaf": 2},
}

_SEEDED = {"sgd_linear", "random_forest"}


def make_classifier(model_type: str, hyperparams: dict | None = None, seed: int = 0):
    """Instantiate one of the four families with defaults filled in."""
    if model_type not in _FAMILIES:
        raise ValueError(f"unknown model type {model_type!r}; expected one of {MODEL_TYPES}")
    params = dict(DEFAULT_HYPERPARAMS[model_type])
    unknown = sorted(set(hyperparams or {}) - set(params))
    if unknown:
        raise ValueError(f"unknown hyperparameter(s) for {model_type}: {unknown}")
    params.update(hyperparams or {})
    if model_type in _SEEDED:
        params["random_state"] = child_seed(seed, "train")
    return _FAMILIES[model_type](**params)
