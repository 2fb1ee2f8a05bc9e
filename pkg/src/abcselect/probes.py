"""Probe backends.

Two families:

* a synthetic learning-curve simulator with known ground truth, used for
  verification and Monte Carlo experiments;
* lightweight from-scratch learners (SGD logistic regression, decision
  stump, majority class) over CSV datasets with seeded nested sampling.

Both are pure functions of (configuration, sizes, seed) so that parallel
Monte Carlo runs and trace replay are deterministic.
"""

from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Protocol, Sequence, runtime_checkable

import numpy as np

from .core import ProbeOutcome

__all__ = [
    "CurveSpec",
    "DatasetHandle",
    "LearnerBackend",
    "LearnerSpec",
    "ProbeBackend",
    "SyntheticBackend",
    "SyntheticInstance",
    "full_evaluate",
    "load_csv_dataset",
    "probe_learner",
    "probe_synthetic",
]

logger = logging.getLogger(__name__)

LEARNER_KINDS = ("logistic_regression_sgd", "decision_stump", "majority_class")


@runtime_checkable
class ProbeBackend(Protocol):
    """Anything that can train configuration ``i`` on ``s_tr`` training
    samples and evaluate it on ``s_te`` test samples."""

    @property
    def n_configs(self) -> int: ...

    @property
    def labels(self) -> tuple[str, ...]: ...

    @property
    def max_train_size(self) -> int: ...

    @property
    def max_test_size(self) -> int: ...

    def probe(self, config_id: int, s_tr: int, s_te: int) -> ProbeOutcome: ...

    def estimate_cost(self, config_id: int, s_tr: int, s_te: int) -> float | None:
        """Predicted probe cost, or None when only measurable after the fact."""
        ...

    def true_accuracy(self, config_id: int) -> float | None:
        """Ground-truth real test accuracy when known by construction."""
        ...


# ---------------------------------------------------------------------------
# Synthetic learning-curve simulator
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CurveSpec:
    """Parametric learning curve with a power-law cost model.

    True accuracy at train size s is ``a_inf - b * s**-beta``, optionally
    held flat at its value at ``plateau[0]`` for s inside the plateau range.
    Train accuracy sits above the true curve by ``overfit_gap * s**-gamma``,
    so by construction training accuracy never falls below the true
    accuracy and the true accuracy is nondecreasing in s. Probe cost is
    ``kappa * s**alpha``.
    """

    a_inf: float
    b: float
    beta: float
    overfit_gap: float
    gamma: float
    kappa: float
    alpha: float
    plateau: tuple[int, int] | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.a_inf <= 1.0:
            raise ValueError(f"a_inf must be in [0, 1], got {self.a_inf}")
        if self.b < 0.0:
            raise ValueError(f"b must be >= 0, got {self.b}")
        if self.beta <= 0.0:
            raise ValueError(f"beta must be > 0, got {self.beta}")
        if self.overfit_gap < 0.0:
            raise ValueError(f"overfit_gap must be >= 0, got {self.overfit_gap}")
        if self.gamma <= 0.0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if self.kappa <= 0.0:
            raise ValueError(f"kappa must be > 0, got {self.kappa}")
        if self.alpha <= 0.0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if self.plateau is not None:
            lo, hi = self.plateau
            if not 1 <= lo <= hi:
                raise ValueError(f"invalid plateau range {self.plateau}")

    def true_accuracy(self, s: int) -> float:
        """True accuracy of the model trained on s samples (frozen inside the plateau)."""
        if s < 1:
            raise ValueError("sample size must be >= 1")
        if self.plateau is not None:
            lo, hi = self.plateau
            if lo <= s <= hi:
                s = lo
        val = self.a_inf - self.b * float(s) ** (-self.beta)
        return min(1.0, max(0.0, val))

    def train_accuracy(self, s: int) -> float:
        return min(1.0, self.true_accuracy(s) + self.overfit_gap * float(s) ** (-self.gamma))

    def cost(self, s: int) -> float:
        return self.kappa * float(s) ** self.alpha

    def to_dict(self) -> dict:
        d = {
            "a_inf": self.a_inf,
            "b": self.b,
            "beta": self.beta,
            "overfit_gap": self.overfit_gap,
            "gamma": self.gamma,
            "kappa": self.kappa,
            "alpha": self.alpha,
        }
        if self.plateau is not None:
            d["plateau"] = list(self.plateau)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CurveSpec":
        allowed = {"a_inf", "b", "beta", "overfit_gap", "gamma", "kappa", "alpha", "plateau"}
        unknown = set(d) - allowed
        if unknown:
            raise ValueError(f"unknown curve field {sorted(unknown)[0]!r}")
        plateau = d.get("plateau")
        kwargs = {k: v for k, v in d.items() if k != "plateau"}
        return cls(plateau=tuple(plateau) if plateau is not None else None, **kwargs)


def probe_synthetic(
    spec: CurveSpec,
    s_tr: int,
    s_te: int,
    seed,
    population_test: bool = False,
) -> ProbeOutcome:
    """Simulate one probe.

    The test accuracy is a binomial draw with success probability equal to
    the true accuracy at s_tr, modelling evaluation on a random test sample
    of size s_te; with ``population_test`` the draw is skipped and the test
    accuracy equals the true accuracy (evaluation on the whole test set).
    ``seed`` is anything ``numpy.random.default_rng`` accepts.
    """
    if s_tr < 1 or s_te < 1:
        raise ValueError("sample sizes must be >= 1")
    truth = spec.true_accuracy(s_tr)
    train_acc = spec.train_accuracy(s_tr)
    if population_test:
        test_acc = truth
    else:
        rng = np.random.default_rng(seed)
        test_acc = rng.binomial(s_te, truth) / s_te
    return ProbeOutcome(
        train_sample_size=s_tr,
        test_sample_size=s_te,
        train_accuracy=train_acc,
        test_accuracy=test_acc,
        cost=spec.cost(s_tr),
    )


@dataclass(frozen=True)
class SyntheticInstance:
    """A named bundle of curves plus the full data sizes they live over."""

    name: str
    curves: tuple[CurveSpec, ...]
    max_train_size: int
    max_test_size: int

    def __post_init__(self) -> None:
        if not self.curves:
            raise ValueError("instance needs at least one curve")
        if self.max_train_size < 1 or self.max_test_size < 1:
            raise ValueError("full data sizes must be >= 1")

    @property
    def n_configs(self) -> int:
        return len(self.curves)

    def truncated(self, n: int) -> "SyntheticInstance":
        """Instance restricted to the first n curves."""
        if not 1 <= n <= len(self.curves):
            raise ValueError(f"cannot truncate {len(self.curves)} curves to {n}")
        return replace(self, curves=self.curves[:n])

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "max_train_size": self.max_train_size,
            "max_test_size": self.max_test_size,
            "curves": [c.to_dict() for c in self.curves],
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def from_dict(cls, d: dict) -> "SyntheticInstance":
        allowed = {"name", "max_train_size", "max_test_size", "curves"}
        unknown = set(d) - allowed
        if unknown:
            raise ValueError(f"unknown instance field {sorted(unknown)[0]!r}")
        return cls(
            name=d["name"],
            curves=tuple(CurveSpec.from_dict(c) for c in d["curves"]),
            max_train_size=d["max_train_size"],
            max_test_size=d["max_test_size"],
        )

    @classmethod
    def load(cls, path) -> "SyntheticInstance":
        return cls.from_dict(json.loads(Path(path).read_text()))


class SyntheticBackend:
    """Probe backend over a synthetic instance; deterministic per (seed, id, sizes)."""

    def __init__(self, instance: SyntheticInstance, seed: int):
        if seed < 0:
            raise ValueError("seed must be nonnegative")
        self._instance = instance
        self._seed = seed
        self._labels = tuple(f"curve-{i + 1}" for i in range(instance.n_configs))

    @property
    def instance(self) -> SyntheticInstance:
        return self._instance

    @property
    def n_configs(self) -> int:
        return self._instance.n_configs

    @property
    def labels(self) -> tuple[str, ...]:
        return self._labels

    @property
    def max_train_size(self) -> int:
        return self._instance.max_train_size

    @property
    def max_test_size(self) -> int:
        return self._instance.max_test_size

    def _spec(self, config_id: int) -> CurveSpec:
        if not 1 <= config_id <= self.n_configs:
            raise ValueError(f"config id {config_id} out of range 1..{self.n_configs}")
        return self._instance.curves[config_id - 1]

    def probe(self, config_id: int, s_tr: int, s_te: int) -> ProbeOutcome:
        spec = self._spec(config_id)
        if s_tr > self.max_train_size or s_te > self.max_test_size:
            raise ValueError("requested sizes exceed the full data sizes")
        # Evaluating on the entire test set measures the accuracy exactly.
        exact = s_te >= self.max_test_size
        seed_seq = np.random.SeedSequence([self._seed, config_id, s_tr, s_te])
        return probe_synthetic(spec, s_tr, s_te, seed_seq, population_test=exact)

    def estimate_cost(self, config_id: int, s_tr: int, s_te: int) -> float:
        return self._spec(config_id).cost(s_tr)

    def true_accuracy(self, config_id: int) -> float:
        return self._spec(config_id).true_accuracy(self.max_train_size)


# ---------------------------------------------------------------------------
# CSV datasets with nested sampling
# ---------------------------------------------------------------------------


class DatasetHandle:
    """A holdout split plus seeded nested sampling over a feature matrix.

    The partition is one seeded permutation of the row indices; samples of a
    part at growing sizes are prefixes of that part's permuted order, so
    successive samples nest.
    """

    def __init__(
        self,
        features: np.ndarray,
        labels: np.ndarray,
        holdout: float,
        seed: int,
    ):
        features = np.asarray(features, dtype=np.float64)
        labels = np.asarray(labels)
        if features.ndim != 2:
            raise ValueError("features must be a 2-D array")
        if labels.shape != (features.shape[0],):
            raise ValueError("labels must be one value per feature row")
        uniq = np.unique(labels)
        if not np.all(np.isin(uniq, (0, 1))):
            raise ValueError("labels must be binary in {0, 1}")
        if not 0.0 < holdout < 1.0:
            raise ValueError(f"holdout ratio must be in (0, 1), got {holdout}")
        n = features.shape[0]
        n_test = min(n - 1, max(1, int(round(holdout * n))))
        rng = np.random.default_rng(seed)
        perm = rng.permutation(n)
        self._features = features
        self._labels = labels.astype(np.int64)
        self._test_order = perm[:n_test]
        self._train_order = perm[n_test:]
        self._holdout = holdout
        self._seed = seed

    @property
    def n_rows(self) -> int:
        return self._features.shape[0]

    @property
    def n_features(self) -> int:
        return self._features.shape[1]

    @property
    def train_size(self) -> int:
        return len(self._train_order)

    @property
    def test_size(self) -> int:
        return len(self._test_order)

    @property
    def holdout_ratio(self) -> float:
        return self._holdout

    @property
    def seed(self) -> int:
        return self._seed

    def sample_nested(self, part: str, size: int) -> np.ndarray:
        """First ``size`` indices of the seeded permutation of a part.

        Samples at growing sizes are nested prefixes; deterministic per
        (seed, part).
        """
        if part == "train":
            order = self._train_order
        elif part == "test":
            order = self._test_order
        else:
            raise ValueError(f"part must be 'train' or 'test', got {part!r}")
        if not 1 <= size <= len(order):
            raise ValueError(f"sample size {size} out of range 1..{len(order)}")
        return order[:size]

    def train_arrays(self, size: int) -> tuple[np.ndarray, np.ndarray]:
        idx = self.sample_nested("train", size)
        return self._features[idx], self._labels[idx]

    def test_arrays(self, size: int) -> tuple[np.ndarray, np.ndarray]:
        idx = self.sample_nested("test", size)
        return self._features[idx], self._labels[idx]


def load_csv_dataset(
    path,
    header: bool = False,
    holdout: float = 0.3,
    seed: int = 0,
) -> DatasetHandle:
    """Load a numeric CSV (last column = binary label) with min-max
    normalization applied per feature."""
    data = np.loadtxt(path, delimiter=",", skiprows=1 if header else 0, ndmin=2)
    if data.shape[1] < 2:
        raise ValueError("CSV needs at least one feature column plus the label")
    features = data[:, :-1]
    labels = data[:, -1]
    if not np.all(np.isin(labels, (0.0, 1.0))):
        raise ValueError("label column must contain only 0 and 1")
    lo = features.min(axis=0)
    span = features.max(axis=0) - lo
    span[span == 0.0] = 1.0  # constant columns map to 0
    features = (features - lo) / span
    return DatasetHandle(features, labels, holdout=holdout, seed=seed)


# ---------------------------------------------------------------------------
# Lightweight learners
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LearnerSpec:
    """One candidate learner. Hyperparameters apply to the SGD kind only."""

    kind: str
    learning_rate: float = 0.1
    epochs: int = 10
    l2: float = 0.0
    batch_size: int = 32

    def __post_init__(self) -> None:
        if self.kind not in LEARNER_KINDS:
            raise ValueError(f"unknown learner kind {self.kind!r}")
        if self.kind == "logistic_regression_sgd":
            if self.learning_rate <= 0.0:
                raise ValueError("learning_rate must be > 0")
            if self.epochs < 1:
                raise ValueError("epochs must be >= 1")
            if self.l2 < 0.0:
                raise ValueError("l2 must be >= 0")
            if self.batch_size < 1:
                raise ValueError("batch_size must be >= 1")

    @property
    def label(self) -> str:
        if self.kind == "logistic_regression_sgd":
            return (
                f"sgd(lr={self.learning_rate:g},epochs={self.epochs},"
                f"l2={self.l2:g})"
            )
        return self.kind

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind}
        if self.kind == "logistic_regression_sgd":
            d.update(
                learning_rate=self.learning_rate,
                epochs=self.epochs,
                l2=self.l2,
                batch_size=self.batch_size,
            )
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "LearnerSpec":
        allowed = {"kind", "learning_rate", "epochs", "l2", "batch_size"}
        unknown = set(d) - allowed
        if unknown:
            raise ValueError(f"unknown learner field {sorted(unknown)[0]!r}")
        if "kind" not in d:
            raise ValueError("learner needs a 'kind'")
        if d["kind"] != "logistic_regression_sgd" and len(d) > 1:
            extra = sorted(set(d) - {"kind"})[0]
            raise ValueError(f"learner kind {d['kind']!r} takes no field {extra!r}")
        return cls(**d)


class _ConstantModel:
    def __init__(self, label: int):
        self.label = label

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.full(X.shape[0], self.label, dtype=np.int64)


class _StumpModel:
    def __init__(self, feature: int, threshold: float, polarity: int):
        self.feature = feature
        self.threshold = threshold
        self.polarity = polarity  # +1: predict 1 above threshold, -1: below

    def predict(self, X: np.ndarray) -> np.ndarray:
        above = X[:, self.feature] > self.threshold
        if self.polarity > 0:
            return above.astype(np.int64)
        return (~above).astype(np.int64)


class _LinearModel:
    def __init__(self, weights: np.ndarray, bias: float):
        self.weights = weights
        self.bias = bias

    def predict(self, X: np.ndarray) -> np.ndarray:
        return (X @ self.weights + self.bias >= 0.0).astype(np.int64)


def _majority_label(y: np.ndarray) -> int:
    ones = int(y.sum())
    zeros = len(y) - ones
    return 1 if ones >= zeros else 0


def _train_stump(X: np.ndarray, y: np.ndarray) -> _StumpModel:
    """Exhaustive best single-feature threshold split (ties: lowest error,
    then lowest feature, lowest threshold, polarity +1 first)."""
    n = len(y)
    total_ones = int(y.sum())
    best: tuple | None = None  # (errors, feature, threshold, -polarity)
    for j in range(X.shape[1]):
        order = np.argsort(X[:, j], kind="stable")
        xs = X[order, j]
        ys = y[order]
        ones_below = np.concatenate(([0], np.cumsum(ys)))
        # Candidate split points between distinct consecutive values, plus
        # the everything-above split at -inf.
        ks = np.concatenate(([0], np.flatnonzero(xs[1:] > xs[:-1]) + 1))
        thresholds = np.where(ks == 0, -np.inf, (xs[ks - 1] + xs[np.minimum(ks, n - 1)]) / 2.0)
        ones_lo = ones_below[ks]
        # polarity +1 predicts 1 for x > threshold; -1 predicts 1 for x <= it
        err_pos = ones_lo + (n - ks - (total_ones - ones_lo))
        err_neg = n - err_pos
        for errs, pol in ((err_pos, 1), (err_neg, -1)):
            i = int(np.argmin(errs))  # first minimum -> lowest threshold
            cand = (int(errs[i]), j, float(thresholds[i]), -pol)
            if best is None or cand < best:
                best = cand
    assert best is not None
    _, feature, threshold, neg_pol = best
    return _StumpModel(feature, threshold, -neg_pol)


def _train_logreg_sgd(
    X: np.ndarray, y: np.ndarray, spec: LearnerSpec, rng: np.random.Generator
) -> _LinearModel:
    """Minibatch SGD on the logistic loss, zero-initialized, seeded shuffles."""
    n, d = X.shape
    w = np.zeros(d)
    b = 0.0
    lr = spec.learning_rate
    for _ in range(spec.epochs):
        order = rng.permutation(n)
        for start in range(0, n, spec.batch_size):
            idx = order[start : start + spec.batch_size]
            Xb, yb = X[idx], y[idx]
            z = Xb @ w + b
            p = 1.0 / (1.0 + np.exp(-np.clip(z, -35.0, 35.0)))
            resid = p - yb
            grad_w = Xb.T @ resid / len(idx) + spec.l2 * w
            grad_b = resid.mean()
            w -= lr * grad_w
            b -= lr * grad_b
    return _LinearModel(w, b)


def _fit(X: np.ndarray, y: np.ndarray, spec: LearnerSpec, rng: np.random.Generator):
    classes = np.unique(y)
    if len(classes) < 2:
        logger.warning(
            "degenerate training sample (single class %d); using constant model",
            int(classes[0]),
        )
        return _ConstantModel(int(classes[0]))
    if spec.kind == "majority_class":
        return _ConstantModel(_majority_label(y))
    if spec.kind == "decision_stump":
        return _train_stump(X, y)
    return _train_logreg_sgd(X, y, spec, rng)


def _accuracy(model, X: np.ndarray, y: np.ndarray) -> float:
    return float(np.mean(model.predict(X) == y))


def probe_learner(
    handle: DatasetHandle,
    learner: LearnerSpec,
    s_tr: int,
    s_te: int,
    seed,
) -> ProbeOutcome:
    """Train on the nested train sample, evaluate on it and on the nested
    test sample; cost is the measured wall time of the whole probe."""
    t0 = time.perf_counter()
    X, y = handle.train_arrays(s_tr)
    rng = np.random.default_rng(seed)
    model = _fit(X, y, learner, rng)
    train_acc = _accuracy(model, X, y)
    X_te, y_te = handle.test_arrays(s_te)
    test_acc = _accuracy(model, X_te, y_te)
    cost = time.perf_counter() - t0
    return ProbeOutcome(
        train_sample_size=s_tr,
        test_sample_size=s_te,
        train_accuracy=train_acc,
        test_accuracy=test_acc,
        cost=cost,
    )


def full_evaluate(handle: DatasetHandle, learner: LearnerSpec, seed=0) -> float:
    """Real test accuracy: train on all training data, evaluate on all test data."""
    outcome = probe_learner(handle, learner, handle.train_size, handle.test_size, seed)
    return outcome.test_accuracy


class LearnerBackend:
    """Probe backend over a dataset and a list of learner specs.

    ``cost_model`` optionally replaces measured wall time with
    ``kappa * s_tr**alpha`` per configuration, which makes traces
    reproducible across machines.
    """

    def __init__(
        self,
        handle: DatasetHandle,
        learners: Sequence[LearnerSpec],
        seed: int = 0,
        cost_model: Sequence[tuple[float, float]] | None = None,
    ):
        if not learners:
            raise ValueError("need at least one learner")
        if cost_model is not None and len(cost_model) != len(learners):
            raise ValueError("cost_model must give (kappa, alpha) per learner")
        if seed < 0:
            raise ValueError("seed must be nonnegative")
        self._handle = handle
        self._learners = tuple(learners)
        self._seed = seed
        self._cost_model = tuple(cost_model) if cost_model is not None else None

    @property
    def handle(self) -> DatasetHandle:
        return self._handle

    @property
    def n_configs(self) -> int:
        return len(self._learners)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(spec.label for spec in self._learners)

    @property
    def max_train_size(self) -> int:
        return self._handle.train_size

    @property
    def max_test_size(self) -> int:
        return self._handle.test_size

    def _spec(self, config_id: int) -> LearnerSpec:
        if not 1 <= config_id <= self.n_configs:
            raise ValueError(f"config id {config_id} out of range 1..{self.n_configs}")
        return self._learners[config_id - 1]

    def probe(self, config_id: int, s_tr: int, s_te: int) -> ProbeOutcome:
        spec = self._spec(config_id)
        seed_seq = np.random.SeedSequence([self._seed, config_id, s_tr])
        outcome = probe_learner(self._handle, spec, s_tr, s_te, seed_seq)
        if self._cost_model is not None:
            kappa, alpha = self._cost_model[config_id - 1]
            outcome = replace(outcome, cost=kappa * float(s_tr) ** alpha)
        return outcome

    def estimate_cost(self, config_id: int, s_tr: int, s_te: int) -> float | None:
        if self._cost_model is None:
            return None
        kappa, alpha = self._cost_model[config_id - 1]
        return kappa * float(s_tr) ** alpha

    def true_accuracy(self, config_id: int) -> None:
        return None

    def full_accuracy(self, config_id: int) -> float:
        """Real test accuracy of one configuration (full train, full test)."""
        return self.probe(config_id, self.max_train_size, self.max_test_size).test_accuracy
