import json

import numpy as np
import pytest

from privpart import (
    Assignment,
    DataEntry,
    DependencyHypergraph,
    DisclosureModel,
    Instance,
    InstanceError,
    Move,
    MoveError,
    SensitiveProperty,
    apply_move,
    bipartite_to_hypergraph,
    hypergraph_to_edges,
    instance_from_json,
    instance_to_json,
    validate_instance,
)


def small_instance(model=DisclosureModel("step", "worst"), k=2, t=1, weights=None):
    hg = DependencyHypergraph(2, [SensitiveProperty(0, (0, 1), weights)])
    w = np.array([[0.9, 0.1], [0.1, 0.8]])
    return Instance(hg, w, k=k, t=t, model=model)


def test_validate_small_instance_sets_dimension_warning():
    inst = validate_instance(small_instance())
    # largest hyperedge (2) does not exceed k=2: flagged, not rejected
    assert inst.validated
    assert inst.dimension_warning


def test_validate_rejects_t_exceeding_k():
    with pytest.raises(InstanceError, match="t exceeds k"):
        validate_instance(small_instance(k=2, t=3))


def test_validate_rejects_bad_weight_sum():
    bad = small_instance(
        model=DisclosureModel("linear", "worst"), weights=(0.5, 0.6)
    )
    with pytest.raises(InstanceError, match="sum"):
        validate_instance(bad)


def test_validate_rejects_empty_entries_negative_weights_empty_members():
    with pytest.raises(InstanceError, match="no data entries"):
        validate_instance(Instance(DependencyHypergraph(0, []), np.zeros((0, 2)), 2, 1))
    hg = DependencyHypergraph(2, [SensitiveProperty(0, ())])
    with pytest.raises(InstanceError, match="empty member"):
        validate_instance(Instance(hg, np.ones((2, 2)), 2, 1))
    inst = small_instance()
    inst.utility_weights[0, 0] = -0.5
    with pytest.raises(InstanceError, match="nonnegative"):
        validate_instance(inst)


def test_validate_requires_weights_for_linear():
    with pytest.raises(InstanceError, match="requires weights"):
        validate_instance(small_instance(model=DisclosureModel("linear", "worst")))


def test_validate_is_idempotent():
    inst = validate_instance(small_instance())
    assert validate_instance(inst) is inst


def test_property_free_instance_is_valid():
    inst = Instance(DependencyHypergraph(3, []), np.ones((3, 2)), k=2, t=1)
    assert validate_instance(inst).num_properties == 0


def test_bipartite_roundtrip():
    edges = {(0, 0), (1, 0), (1, 1), (2, 1)}
    hg = bipartite_to_hypergraph(edges, 3, 2)
    assert hg.properties[0].members == (0, 1)
    assert hg.properties[1].members == (1, 2)
    assert hg.dimension == 2
    assert hypergraph_to_edges(hg) == edges


def test_bipartite_rejects_empty_property():
    with pytest.raises(InstanceError, match="no incident edge"):
        bipartite_to_hypergraph({(0, 0)}, 1, 2)


def test_bipartite_rejects_out_of_range():
    with pytest.raises(InstanceError, match="out of range"):
        bipartite_to_hypergraph({(5, 0)}, 2, 1)


def test_apply_move_swap_remove_add():
    a = Assignment(np.array([[True, False]]))
    swapped = apply_move(a, Move("swap", 0, from_adversary=0, to_adversary=1))
    assert swapped.bits.tolist() == [[False, True]]
    removed = apply_move(a, Move("remove", 0, from_adversary=0))
    assert removed.per_entry_count[0] == 0
    with pytest.raises(MoveError, match="already set"):
        apply_move(a, Move("add", 0, to_adversary=0))
    # original untouched
    assert a.bits.tolist() == [[True, False]]


def test_move_field_consistency():
    with pytest.raises(MoveError):
        Move("swap", 0, from_adversary=1, to_adversary=1)
    with pytest.raises(MoveError):
        Move("add", 0, from_adversary=1)
    with pytest.raises(MoveError):
        Move("remove", 0, to_adversary=1)


def test_count_cache_tracks_random_move_sequences():
    rng = np.random.default_rng(0)
    a = Assignment(np.zeros((5, 3), dtype=bool))
    for _ in range(300):
        d = int(rng.integers(5))
        setbits = np.nonzero(a.bits[d])[0]
        unset = np.nonzero(~a.bits[d])[0]
        if setbits.size and rng.random() < 0.4:
            a = apply_move(a, Move("remove", d, from_adversary=int(rng.choice(setbits))))
        elif setbits.size and unset.size and rng.random() < 0.5:
            a = apply_move(
                a,
                Move("swap", d, from_adversary=int(rng.choice(setbits)),
                     to_adversary=int(rng.choice(unset))),
            )
        elif unset.size:
            a = apply_move(a, Move("add", d, to_adversary=int(rng.choice(unset))))
        assert np.array_equal(a.per_entry_count, a.bits.sum(axis=1))


def test_json_roundtrip_is_exact():
    inst = validate_instance(
        small_instance(model=DisclosureModel("linear", "average"), weights=(0.5, 0.5))
    )
    text = instance_to_json(inst)
    back = instance_from_json(text)
    assert instance_to_json(back) == text
    assert back.k == inst.k and back.t == inst.t
    assert np.array_equal(back.utility_weights, inst.utility_weights)


def test_json_schema_keys():
    doc = json.loads(instance_to_json(validate_instance(small_instance())))
    assert set(doc) == {
        "num_entries", "num_adversaries", "t", "lambda", "tau_I",
        "model", "properties", "utility_weights",
    }
    assert set(doc["model"]) == {"family", "aggregation"}
    assert set(doc["properties"][0]) == {"id", "members", "weights"}


def test_json_roundtrip_with_payloads():
    entries = [DataEntry(0, ("u1", "L1", 2)), DataEntry(1, ("u2", "L1", 1))]
    hg = DependencyHypergraph(2, [SensitiveProperty(0, (0, 1))])
    inst = validate_instance(
        Instance(hg, np.ones((2, 2)), 2, 1, model=DisclosureModel("cosine", "average"),
                 entries=entries)
    )
    back = instance_from_json(instance_to_json(inst))
    assert back.entries[0].payload == ("u1", "L1", 2)
