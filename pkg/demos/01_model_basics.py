"""Tour of the data model: build a tiny instance by hand, evaluate every
disclosure family on it, and inspect the tradeoff objective.

Run:  python demos/01_model_basics.py
"""

import numpy as np

from privpart import (
    Assignment,
    DependencyHypergraph,
    DisclosureModel,
    Instance,
    SensitiveProperty,
    aggregate_disclosure,
    disclosure_vector,
    instance_to_json,
    tradeoff_objective,
    validate_instance,
)

# Four data entries, two untrusted recipients. Entries 0 and 1 jointly
# reveal a secret; so do entries 2 and 3. Each entry may go to exactly
# one recipient (t = 1).
properties = [
    SensitiveProperty(0, (0, 1), (0.5, 0.5)),
    SensitiveProperty(1, (2, 3), (0.5, 0.5)),
]
weights = np.array([
    [0.9, 0.2],
    [0.8, 0.3],
    [0.1, 0.7],
    [0.2, 0.9],
])

for family in ("step", "linear", "quadratic"):
    inst = validate_instance(Instance(
        DependencyHypergraph(4, properties), weights, k=2, t=1,
        model=DisclosureModel(family, "worst"),
    ))

    # Naive utility-maximizing split: everyone to their best recipient.
    greedy_bits = np.zeros((4, 2), dtype=bool)
    greedy_bits[np.arange(4), weights.argmax(axis=1)] = True
    naive = Assignment(greedy_bits)

    # Privacy-aware split: separate each property's members.
    safe_bits = np.array([[1, 0], [0, 1], [1, 0], [0, 1]], dtype=bool)
    safe = Assignment(safe_bits)

    print(f"== {family} disclosure, worst-case aggregation")
    for name, a in (("utility-first", naive), ("privacy-aware", safe)):
        vec = disclosure_vector(inst, a)
        obj = tradeoff_objective(inst, a)
        print(f"  {name:14s} disclosure={aggregate_disclosure(vec, 'worst'):.3f} "
              f"utility={obj.utility:.3f} objective={obj.value:.3f}")

print("\nSerialized form (normative key names):")
inst = validate_instance(Instance(
    DependencyHypergraph(4, properties), weights, k=2, t=1,
    model=DisclosureModel("linear", "average"),
))
print(instance_to_json(inst)[:400], "...")
