"""scikit-learn style wrapper: fit on a divisor, transform measures into heights."""
from __future__ import annotations

import os
from contextlib import contextmanager
from typing import Mapping

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

__all__ = ["ToricAnalyzer"]


@contextmanager
def _settings(bits, tol):
    from . import adelic

    old_bits = os.environ.get("TSP_PRECISION_BITS")
    old_tol = adelic.NUM_TOL
    try:
        if bits is not None:
            os.environ["TSP_PRECISION_BITS"] = str(int(bits))
        if tol is not None:
            adelic.set_tolerance(tol)
        yield
    finally:
        if old_bits is None:
            os.environ.pop("TSP_PRECISION_BITS", None)
        else:
            os.environ["TSP_PRECISION_BITS"] = old_bits
        adelic.NUM_TOL = old_tol


class ToricAnalyzer(TransformerMixin, BaseEstimator):
    """Analyze one adelic toric metrized divisor and evaluate eta on measures.

    fit(X) accepts an AdelicToricDivisor, a Config, a mapping in config
    form or a path to a TOML file.  transform(X) takes a sequence of
    AdelicMeasures, or (family, level) pairs, and returns the column of
    values eta_D(nu) (equal to the heights of the points for orbit
    measures).
    """

    def __init__(self, precision_bits=None, tolerance=None, norm="l1"):
        self.precision_bits = precision_bits
        self.tolerance = tolerance
        self.norm = norm

    def _divisor(self, X):
        from .adelic import AdelicToricDivisor, validate_divisor
        from .config import Config, divisor_from_mapping, load_config

        if isinstance(X, AdelicToricDivisor):
            d = X
        elif isinstance(X, Config):
            d = X.divisor
        elif isinstance(X, Mapping):
            d = divisor_from_mapping(X.get("divisor", X), norm=self.norm)
        elif isinstance(X, (str, os.PathLike)):
            d = load_config(X).divisor
        else:
            raise TypeError(f"cannot fit on {type(X).__name__}")
        if d is None:
            raise ValueError("no divisor to fit")
        if d.norm != self.norm:
            d = AdelicToricDivisor(d.polytope, d.metrics, self.norm, d.name)
        return validate_divisor(d)

    def fit(self, X, y=None):
        from .adelic import analyze

        with _settings(self.precision_bits, self.tolerance):
            d = self._divisor(X)
            rep = analyze(d)
        self.divisor_ = d
        self.report_ = rep
        self.ess_min_ = rep.ess_min
        self.monocritical_ = rep.monocritical
        self.critical_point_ = rep.critical_point
        self.quasi_canonical_ = rep.quasi_canonical
        self.abf_ = rep.abf
        self.n_features_in_ = d.dim
        return self

    def _one(self, item):
        from .adelic import eta
        from .points import orbit_measure

        if isinstance(item, tuple) and len(item) == 2 and not hasattr(item, "entries"):
            f, l = item
            item = orbit_measure(f, int(l))
        return eta(self.divisor_, item)

    def transform(self, X):
        check_is_fitted(self, "ess_min_")
        with _settings(self.precision_bits, self.tolerance):
            vals = [float(self._one(x)) for x in X]
        return np.asarray(vals, dtype=float).reshape(-1, 1)

    def transform_exact(self, X) -> list:
        """Like transform, but LogScalars are kept whenever the path is exact."""
        check_is_fitted(self, "ess_min_")
        with _settings(self.precision_bits, self.tolerance):
            return [self._one(x) for x in X]

    def smallness(self, X) -> np.ndarray:
        """eta - ess_min per measure; nonnegative by the measure-minimum lemma."""
        return self.transform(X)[:, 0] - float(self.ess_min_)
