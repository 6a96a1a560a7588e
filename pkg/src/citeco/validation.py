"""Input checks shared by the estimator wrappers."""

from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array


def check_edge_array(edges) -> np.ndarray:
    """Coerce ``edges`` to an ``(n, 2)`` int64 array of (citing, cited)."""
    arr = check_array(edges, dtype=None, ensure_min_samples=0, ensure_all_finite=True)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"edges must have shape (n, 2), got {arr.shape}")
    if arr.size and not np.all(np.equal(np.mod(arr, 1), 0)):
        raise ValueError("edge endpoints must be integer blind ids")
    return arr.astype(np.int64)


def check_parent_ids(X) -> np.ndarray:
    """Accept ``(n,)`` or ``(n, 1)`` integer ids; return a 1-D int64 array."""
    arr = np.asarray(X)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    arr = check_array(arr, dtype=None, ensure_min_samples=1)
    if arr.shape[1] != 1:
        raise ValueError(f"expected one column of parent ids, got {arr.shape[1]}")
    if not np.all(np.equal(np.mod(arr, 1), 0)):
        raise ValueError("parent ids must be integers")
    return arr[:, 0].astype(np.int64)


def check_series_array(X) -> np.ndarray:
    """Validate a ``(n, 3)`` array of ``(year, R, H)`` rows with contiguous
    increasing years."""
    arr = check_array(X, dtype=np.float64, ensure_min_samples=2)
    if arr.shape[1] != 3:
        raise ValueError(f"series must have columns (year, R, H), got {arr.shape[1]} columns")
    years = arr[:, 0]
    if not np.all(np.equal(np.mod(years, 1), 0)):
        raise ValueError("years must be integers")
    if not np.all(np.diff(years) == 1):
        raise ValueError("years must be contiguous and increasing")
    return arr


def check_citations(X) -> np.ndarray:
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 2:
        if arr.shape[1] != 1:
            raise ValueError("expected a single citation-count column")
        arr = arr[:, 0]
    arr = check_array(arr.reshape(-1, 1), dtype=np.float64)[:, 0]
    if np.any(arr < 1):
        raise ValueError("citation counts must be >= 1 to take logarithms")
    return arr
