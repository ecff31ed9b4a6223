"""Per-property, per-adversary disclosure for the four function families,
plus aggregation into the overall scalar.

All evaluators return a dense (k, |P|) matrix of values in [0, 1]:
row ``a`` holds what adversary ``a`` learns about each property from the
entries assigned to it. Adversaries never pool information, so each row
depends only on that adversary's column of the assignment.

* step       -- 1 exactly when all of a property's members are co-revealed
* linear     -- weighted fraction of members revealed
* quadratic  -- square of the linear value
* cosine     -- trajectory similarity of the property's two users,
                restricted to the published check-ins
"""

from __future__ import annotations

import numpy as np

from .instance import Assignment, Instance, DisclosureModel, InstanceError

__all__ = [
    "DisclosureModel",
    "step_disclosure",
    "linear_disclosure",
    "quadratic_disclosure",
    "cosine_disclosure",
    "disclosure_vector",
    "aggregate_disclosure",
    "per_property_disclosure",
    "overall_disclosure",
]


def _require_validated(instance: Instance) -> None:
    if not instance.validated:
        raise InstanceError("instance must be validated first")


def step_disclosure(instance: Instance, assignment: Assignment) -> np.ndarray:
    """1 exactly for (a, p) where adversary a holds every member of p."""
    _require_validated(instance)
    counts = instance._member_matrix @ assignment.bits.astype(np.float64)  # |P| x k
    return (counts.T == instance._sizes[None, :]).astype(np.float64)


def linear_disclosure(instance: Instance, assignment: Assignment) -> np.ndarray:
    """Weighted member coverage: sum of a_dp over revealed members."""
    _require_validated(instance)
    _require_weights(instance)
    sums = instance._weight_matrix @ assignment.bits.astype(np.float64)
    return np.clip(sums.T, 0.0, 1.0)


def quadratic_disclosure(instance: Instance, assignment: Assignment) -> np.ndarray:
    _require_validated(instance)
    _require_weights(instance)
    sums = instance._weight_matrix @ assignment.bits.astype(np.float64)
    return np.clip(sums.T, 0.0, 1.0) ** 2


def _require_weights(instance: Instance) -> None:
    for p in instance.hypergraph.properties:
        if p.weights is None:
            raise InstanceError(f"property {p.id} is missing disclosure weights")


def cosine_disclosure(instance: Instance, assignment: Assignment) -> np.ndarray:
    """Cosine similarity of the two users' location-count vectors,
    restricted per adversary to the entries it received. Defined as 0
    whenever either restricted vector is all-zero."""
    _require_validated(instance)
    cache = instance._cosine
    if cache is None:
        raise InstanceError("instance was not validated with a cosine model")
    k = instance.k
    num_p = instance.num_properties
    out = np.zeros((k, num_p), dtype=np.float64)
    if num_p == 0:
        return out
    ui = cache["prop_users"][:, 0]
    uj = cache["prop_users"][:, 1]
    for a in range(k):
        mask = assignment.bits[:, a].astype(np.float64)
        norms = np.bincount(
            cache["user_idx"], weights=cache["sq_counts"] * mask, minlength=cache["num_users"]
        )
        dots = np.zeros(num_p, dtype=np.float64)
        if cache["pair_prop"].size:
            active = cache["pair_prod"] * mask[cache["pair_e1"]] * mask[cache["pair_e2"]]
            np.add.at(dots, cache["pair_prop"], active)
        denom = norms[ui] * norms[uj]
        nz = denom > 0.0
        out[a, nz] = dots[nz] / np.sqrt(denom[nz])
    return np.clip(out, 0.0, 1.0)


_FAMILY_FUNCS = {
    "step": step_disclosure,
    "linear": linear_disclosure,
    "quadratic": quadratic_disclosure,
    "cosine": cosine_disclosure,
}


def disclosure_vector(instance: Instance, assignment: Assignment) -> np.ndarray:
    """Dispatch on the instance's disclosure family."""
    return _FAMILY_FUNCS[instance.model.family](instance, assignment)


def aggregate_disclosure(vector: np.ndarray, mode: str) -> float:
    """Collapse a (k, |P|) disclosure matrix to the overall scalar.

    ``worst`` is the largest single component; ``average`` is the largest
    per-adversary mean. Both are 0 for property-free instances.
    """
    vector = np.asarray(vector, dtype=np.float64)
    if vector.size == 0:
        return 0.0
    if mode == "worst":
        return float(vector.max())
    if mode == "average":
        return float(vector.mean(axis=1).max())
    raise InstanceError(f"unknown aggregation {mode!r}")


def per_property_disclosure(vector: np.ndarray) -> np.ndarray:
    """Max over adversaries, per property (length |P|)."""
    vector = np.asarray(vector, dtype=np.float64)
    if vector.size == 0:
        return np.zeros(vector.shape[1] if vector.ndim == 2 else 0)
    return vector.max(axis=0)


def overall_disclosure(instance: Instance, assignment: Assignment) -> float:
    return aggregate_disclosure(
        disclosure_vector(instance, assignment), instance.model.aggregation
    )
