"""scikit-learn compatible wrappers.

``EcologyTransformer`` turns parent ids into (N, C, G, X, R, S, H) feature
rows, so the metrics can feed any downstream estimator in a ``Pipeline``.
``PunctuationDetector`` learns adaptive thresholds from a (year, R, H)
series and labels each year. ``EntropyCitationRegressor`` fits entropy
against log citations.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import events as ev
from .graph import CitationIndex, build_parent_network, snapshot
from .metrics import EcologyMetrics, compute_metrics, fit_log_linear
from .validation import check_citations, check_edge_array, check_parent_ids, check_series_array

FEATURES = ("N", "C", "G", "X", "R", "S", "H")

NO_EVENT, REACH_JUMP, PAIRED = 0, 1, 2


class EcologyTransformer(TransformerMixin, BaseEstimator):
    """Citation-ecology features for parent papers of a fixed corpus.

    Parameters
    ----------
    edges : array-like of shape (n_edges, 2)
        Directed ``(citing, cited)`` blind-id pairs of the corpus.
    years : dict, optional
        Publication year per blind id. Needed when ``year`` is set.
    year : int, optional
        Compute metrics on the snapshot at the end of this year instead of
        on the full network.
    p_mode : {"degree", "in_degree"}
        Which degree share defines the entropy distribution.
    """

    def __init__(self, edges=None, years=None, year=None, p_mode="degree"):
        self.edges = edges
        self.years = years
        self.year = year
        self.p_mode = p_mode

    def fit(self, X=None, y=None):
        arr = check_edge_array(np.empty((0, 2)) if self.edges is None else self.edges)
        self.index_ = CitationIndex(map(tuple, arr.tolist()))
        known = set(arr.ravel().tolist())
        years = dict(self.years or {})
        self.years_ = {n: years.get(n) for n in known | set(years)}
        self.n_features_out_ = len(FEATURES)
        return self

    def _metrics(self, parent: int) -> EcologyMetrics:
        net = build_parent_network(parent, self.years_, self.index_)
        if self.year is not None:
            net = snapshot(net, self.year)
        return compute_metrics(net, self.year, self.p_mode)

    def transform(self, X):
        check_is_fitted(self, "index_")
        ids = check_parent_ids(X)
        return np.array([self._metrics(int(p)).as_tuple() for p in ids], dtype=float)

    def get_feature_names_out(self, input_features=None):
        return np.array(FEATURES, dtype=object)


class PunctuationDetector(BaseEstimator):
    """Label each year of a (year, R, H) series.

    ``fit`` fixes the thresholds (the adaptive default when a parameter is
    None); ``predict`` returns 0 for no event, 1 for a reach jump and 2 for
    a jump paired with an entropy drop. The first year is always 0.
    """

    def __init__(self, jump_threshold=None, drop_threshold=None):
        self.jump_threshold = jump_threshold
        self.drop_threshold = drop_threshold

    def fit(self, X, y=None):
        arr = check_series_array(X)
        jump = self.jump_threshold
        drop = self.drop_threshold
        if jump is None:
            jump = ev.adaptive_threshold(np.diff(arr[:, 1]), ev.JUMP_FLOOR)
        if drop is None:
            drop = ev.adaptive_threshold(np.diff(arr[:, 2]), ev.DROP_FLOOR)
        if jump <= 0 or drop <= 0:
            raise ValueError("thresholds must be positive")
        self.jump_threshold_ = float(jump)
        self.drop_threshold_ = float(drop)
        return self

    def events(self, X) -> list[ev.PunctuationEvent]:
        check_is_fitted(self, "jump_threshold_")
        arr = check_series_array(X)
        return ev.find_punctuations(
            arr[:, 0].astype(int), arr[:, 1], arr[:, 2], self.jump_threshold_, self.drop_threshold_
        )

    def predict(self, X):
        arr = check_series_array(X)
        labels = np.zeros(len(arr), dtype=int)
        first = int(arr[0, 0])
        for e in self.events(arr):
            labels[e.year - first] = PAIRED if e.paired else REACH_JUMP
        return labels

    def fit_predict(self, X, y=None):
        return self.fit(X).predict(X)


class EntropyCitationRegressor(RegressorMixin, BaseEstimator):
    """Least-squares line of entropy ``S`` against ``ln(citations)``."""

    def fit(self, X, y):
        fit = fit_log_linear(check_citations(X), y)
        self.slope_, self.intercept_, self.r_squared_ = fit.slope, fit.intercept, fit.r_squared
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "slope_")
        return self.intercept_ + self.slope_ * np.log(check_citations(X))

