"""Input coercion and validation helpers shared by the estimator classes."""

from __future__ import annotations

from typing import Iterable, Union

import numpy as np

from .sequences import Sequence, SequenceSet


def as_sequence_set(X: Union[SequenceSet, Iterable]) -> SequenceSet:
    """Coerce raw strings, Sequence objects, or a SequenceSet into a SequenceSet.

    Plain strings get positional ids, so list-of-str inputs compose with the
    estimator API without ceremony.
    """
    if isinstance(X, SequenceSet):
        return X
    items = list(X)
    if all(isinstance(s, Sequence) for s in items):
        return SequenceSet(items)
    return SequenceSet(Sequence(str(i), str(s)) for i, s in enumerate(items))


def check_features(X, name: str = "X") -> np.ndarray:
    """Return a 2-D float64 array, rejecting non-finite or misshaped input."""
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise ValueError(f"{name} has no rows")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_square_distances(D, name: str = "D") -> np.ndarray:
    """Validate a symmetric, zero-diagonal, nonnegative distance matrix."""
    arr = np.asarray(D, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be square, got shape {arr.shape}")
    if not np.array_equal(arr, arr.T):
        raise ValueError(f"{name} must be symmetric")
    if np.any(np.diagonal(arr) != 0.0):
        raise ValueError(f"{name} must have a zero diagonal")
    if arr.min() < 0.0:
        raise ValueError(f"{name} contains negative distances")
    return arr
