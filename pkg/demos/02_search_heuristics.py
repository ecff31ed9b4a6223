"""Generate a synthetic benchmark instance and compare the search
heuristics against the weighted random baseline.

Run:  python demos/02_search_heuristics.py
"""

from privpart import (
    DisclosureModel,
    SearchParams,
    SynthConfig,
    generate_instance,
    rand_plus,
    solve,
)

inst = generate_instance(
    SynthConfig(num_entries=200, num_properties=30, k=5, t=1, seed=42),
    model=DisclosureModel("linear", "average"),
)
print(f"instance: |D|={inst.num_entries} |P|={inst.num_properties} "
      f"k={inst.k} t={inst.t} dimension={inst.hypergraph.dimension}")

runs = [
    ("RAND+ (100 restarts)", lambda: rand_plus(inst, runs=100, seed=0)),
    ("GREEDY  (global)", lambda: solve(inst, SearchParams("greedy", "global", seed=0))),
    ("GREEDYL (myopic)", lambda: solve(inst, SearchParams("greedy", "myopic", seed=0))),
    ("GRASP   (n=5, r=10)", lambda: solve(inst, SearchParams("grasp", "global", n=5, r=10, seed=0))),
    ("GRASPL  (n=3, r=10)", lambda: solve(inst, SearchParams("grasp", "myopic", n=3, r=10, seed=0))),
]
print(f"{'algorithm':22s} {'objective':>9s} {'utility':>8s} {'disclosure':>10s} {'ms':>7s}")
for name, fn in runs:
    res = fn()
    o = res.objective
    print(f"{name:22s} {o.value:9.4f} {o.utility:8.4f} {o.disclosure:10.4f} "
          f"{res.wall_time * 1000:7.1f}")
