import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import StandardScaler

from citeco.estimators import (
    FEATURES,
    NO_EVENT,
    PAIRED,
    REACH_JUMP,
    EcologyTransformer,
    EntropyCitationRegressor,
    PunctuationDetector,
)
from citeco.metrics import compute_metrics, metrics_timeline
from citeco.synth import prototype_network, relabel
from citeco.validation import check_edge_array, check_parent_ids, check_series_array


def corpus():
    b = prototype_network("B")
    d = relabel(prototype_network("D"), 100)
    edges = sorted(b.arcs) + sorted(d.arcs)
    years = {**b.years, **d.years}
    return edges, years


def test_transformer_features_match_compute_metrics():
    edges, years = corpus()
    t = EcologyTransformer(edges=edges, years=years).fit()
    out = t.transform([0, 100])
    assert out.shape == (2, len(FEATURES))
    assert out[0].tolist() == list(compute_metrics(prototype_network("B")).as_tuple())
    assert out[1].tolist() == list(compute_metrics(prototype_network("D")).as_tuple())
    assert list(t.get_feature_names_out()) == list(FEATURES)


def test_transformer_snapshot_year():
    edges, years = corpus()
    out = EcologyTransformer(edges=edges, years=years, year=1992).fit_transform(np.array([[100]]))
    assert out[0, 4] == 1.375


def test_transformer_in_pipeline_and_clone():
    edges, years = corpus()
    pipe = make_pipeline(EcologyTransformer(edges=edges, years=years), StandardScaler())
    assert pipe.fit_transform([0, 100]).shape == (2, 7)
    c = clone(EcologyTransformer(edges=edges, p_mode="in_degree"))
    assert c.get_params()["p_mode"] == "in_degree"


def test_transformer_requires_fit():
    with pytest.raises(NotFittedError):
        EcologyTransformer().transform([0])


def test_detector_labels():
    X = np.array([[2000, 0.0, 0.9], [2001, 0.0, 0.9], [2002, 0.5, 0.7], [2003, 1.0, 0.72]])
    det = PunctuationDetector(jump_threshold=0.1, drop_threshold=0.05).fit(X)
    assert det.predict(X).tolist() == [NO_EVENT, NO_EVENT, PAIRED, REACH_JUMP]
    assert [e.year for e in det.events(X)] == [2002, 2003]


def test_detector_learns_adaptive_thresholds():
    series = metrics_timeline(prototype_network("D"))
    X = np.column_stack([series.years, series.column("R"), series.column("H")])
    det = PunctuationDetector().fit(X)
    assert det.jump_threshold_ >= 0.05 and det.drop_threshold_ >= 0.01
    assert det.fit_predict(X)[0] == NO_EVENT
    assert det.get_params() == {"jump_threshold": None, "drop_threshold": None}


def test_detector_rejects_gaps():
    with pytest.raises(ValueError):
        PunctuationDetector().fit([[2000, 0, 0], [2002, 1, 0]])


def test_regressor_fits_log_line():
    C = np.array([1, 3, 10, 30, 100])
    S = 0.5 * np.log(C) + 2
    reg = EntropyCitationRegressor().fit(C.reshape(-1, 1), S)
    assert reg.slope_ == pytest.approx(0.5)
    assert reg.score(C.reshape(-1, 1), S) == pytest.approx(1.0)
    assert reg.predict([[np.e]]) == pytest.approx([2.5])


def test_regressor_rejects_zero_citations():
    with pytest.raises(ValueError):
        EntropyCitationRegressor().fit([[0], [1]], [0.0, 1.0])


def test_validation_helpers():
    assert check_edge_array([[1, 2], [3, 4]]).dtype == np.int64
    assert check_edge_array(np.empty((0, 2))).shape == (0, 2)
    with pytest.raises(ValueError):
        check_edge_array([[1, 2, 3]])
    with pytest.raises(ValueError):
        check_edge_array([[1.5, 2]])
    with pytest.raises(ValueError):
        check_edge_array([[np.nan, 2]])
    assert check_parent_ids([[1], [2]]).tolist() == [1, 2]
    with pytest.raises(ValueError):
        check_parent_ids([[1, 2]])
    with pytest.raises(ValueError):
        check_series_array([[2000, 0, 0]])
