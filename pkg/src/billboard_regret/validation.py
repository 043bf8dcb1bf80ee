"""Input validation helpers for the estimator layer."""

from __future__ import annotations

import os
from typing import Mapping

from sklearn.exceptions import NotFittedError

from .model import Instance, InstanceError, validate_instance
from .serialization import instance_from_dict, load_instance


def check_instance(X, validate: bool = True) -> Instance:
    """Coerce ``X`` to a validated :class:`Instance`.

    Accepts an instance, a serialized instance dict or a path to an instance
    file.
    """
    if isinstance(X, Instance):
        instance = X
    elif isinstance(X, Mapping):
        instance = instance_from_dict(dict(X), validate=False)
    elif isinstance(X, (str, os.PathLike)):
        instance = load_instance(X, validate=False)
    else:
        raise TypeError(f"expected an Instance, an instance dict or a file path, got {type(X).__name__}")
    if validate:
        problems = validate_instance(instance)
        if problems:
            raise InstanceError(problems)
    return instance


def check_epsilon(epsilon: float) -> float:
    epsilon = float(epsilon)
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    return epsilon


def check_is_fitted(estimator, attribute: str = "allocation_") -> None:
    if not hasattr(estimator, attribute):
        raise NotFittedError(f"{type(estimator).__name__} is not fitted; call fit(instance) first")
