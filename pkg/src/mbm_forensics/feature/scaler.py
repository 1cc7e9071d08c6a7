"""
Per-dimension feature scaling fitted on a training set.

standard: sklearn StandardScaler, (x - mean) / std with population std
minmax:   sklearn MinMaxScaler onto [-1, 1]

Both are persisted as one affine form, x -> (x - loc) / spread, so a model
file carries two rows of numbers whatever the method. Constant dimensions map
to 0 under both methods.
"""

from dataclasses import dataclass
from typing import Sequence, Tuple, Dict, Any, Union

import numpy as np
from sklearn.preprocessing import MinMaxScaler, StandardScaler

from ..core.exceptions import EmptyTrainingSet, LengthMismatch, ScalingMismatch
from ..core.models import FeatureVector

SCALING_METHODS = ("standard", "minmax")
MINMAX_RANGE = (-1.0, 1.0)


@dataclass(frozen=True)
class FeatureScaler:
    method: str
    loc: Tuple[float, ...]
    spread: Tuple[float, ...]

    @property
    def dimension(self) -> int:
        return len(self.loc)

    def estimator(self) -> Union[StandardScaler, MinMaxScaler]:
        """The fitted sklearn scaler these statistics describe."""
        loc = np.asarray(self.loc, dtype=np.float64)
        spread = np.asarray(self.spread, dtype=np.float64)
        if self.method == "minmax":
            est = MinMaxScaler(feature_range=MINMAX_RANGE)
            est.scale_ = 1.0 / spread
            est.min_ = -loc / spread
            est.data_min_ = loc - spread
            est.data_max_ = loc + spread
            est.data_range_ = 2.0 * spread
        else:
            est = StandardScaler()
            est.mean_ = loc
            est.scale_ = spread
            est.var_ = spread ** 2
        est.n_features_in_ = self.dimension
        est.n_samples_seen_ = 1
        return est

    def _check(self, width: int) -> None:
        if width != self.dimension:
            raise LengthMismatch(f"vectors of length {width}, scaler expects {self.dimension}")

    def transform_array(self, matrix: np.ndarray) -> np.ndarray:
        matrix = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
        self._check(matrix.shape[-1])
        return self.estimator().transform(matrix)

    def invert_array(self, matrix: np.ndarray) -> np.ndarray:
        matrix = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
        self._check(matrix.shape[-1])
        return self.estimator().inverse_transform(matrix)

    def apply(self, v: FeatureVector) -> FeatureVector:
        if v.scaled:
            raise ScalingMismatch(f"{v.source or 'vector'} is already scaled")
        scaled = self.transform_array(np.array(v.values))[0]
        return FeatureVector(tuple(float(x) for x in scaled), scaled=True, label=v.label, source=v.source)

    def invert(self, v: FeatureVector) -> FeatureVector:
        if not v.scaled:
            raise ScalingMismatch(f"{v.source or 'vector'} is not scaled")
        raw = self.invert_array(np.array(v.values))[0]
        return FeatureVector(tuple(float(x) for x in raw), scaled=False, label=v.label, source=v.source)

    def to_dict(self) -> Dict[str, Any]:
        return {"method": self.method, "loc": list(self.loc), "spread": list(self.spread)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "FeatureScaler":
        return cls(
            method=str(data["method"]),
            loc=tuple(float(x) for x in data["loc"]),
            spread=tuple(float(x) for x in data["spread"]),
        )


def fit_scaler(training: Sequence[FeatureVector], method: str = "standard") -> FeatureScaler:
    """
    Fit per-dimension statistics on training vectors.

    Raises:
        EmptyTrainingSet: No training vectors
        LengthMismatch: Vectors of differing length
    """
    if method not in SCALING_METHODS:
        raise ValueError(f"Unknown scaling method {method!r}")
    if not training:
        raise EmptyTrainingSet("cannot fit a scaler on zero vectors")
    lengths = {v.n for v in training}
    if len(lengths) != 1:
        raise LengthMismatch(f"training vectors of mixed length {sorted(lengths)}")

    matrix = np.array([v.values for v in training], dtype=np.float64)
    if method == "minmax":
        est = MinMaxScaler(feature_range=MINMAX_RANGE).fit(matrix)
        spread = 1.0 / est.scale_
        loc = -est.min_ * spread
        # sklearn sends a constant column to the bottom of the range; centre it
        loc = np.where(est.data_range_ > 0.0, loc, est.data_min_)
    else:
        est = StandardScaler().fit(matrix)
        loc, spread = est.mean_, est.scale_

    return FeatureScaler(
        method=method,
        loc=tuple(float(x) for x in loc),
        spread=tuple(float(x) for x in spread),
    )


def apply_scaler(scaler: FeatureScaler, v: FeatureVector) -> FeatureVector:
    return scaler.apply(v)
