"""Oracle sandwich on a desk-scale instance: exhaustive enumeration,
branch-and-bound, the LP relaxation bound, and randomized rounding.

Run:  python demos/03_exact_and_relaxation.py
"""

from privpart import (
    DisclosureModel,
    SearchParams,
    SynthConfig,
    enumerate_optimum,
    generate_instance,
    round_and_repair,
    rounding_mean_objective,
    solve,
    solve_exact,
    solve_lp_relaxation,
)

inst = generate_instance(
    SynthConfig(num_entries=6, num_properties=3, k=3, t=2, seed=11),
    model=DisclosureModel("linear", "average"),
)

reference = enumerate_optimum(inst)
bnb = solve_exact(inst)
heur = solve(inst, SearchParams("grasp", "global", n=3, r=5, seed=1))
frac = solve_lp_relaxation(inst)

print(f"enumeration optimum   {reference.objective.value:.6f} "
      f"({reference.iterations} assignments scored)")
print(f"branch-and-bound      {bnb.objective.value:.6f} ({bnb.iterations} nodes)")
print(f"heuristic             {heur.objective.value:.6f}")
print(f"LP relaxation bound   {frac.lp_objective:.6f}")
assert heur.objective.value <= bnb.objective.value + 1e-9 <= frac.lp_objective + 2e-9

rounded = round_and_repair(inst, frac, runs=100, seed=3)
mean, stderr = rounding_mean_objective(inst, frac, draws=2000, seed=3)
print(f"best repaired rounding {rounded.objective.value:.6f}")
print(f"mean raw rounding      {mean:.6f} +- {stderr:.6f} "
      f"(relaxation value {frac.lp_objective:.6f})")

print("\nbudgeted variant (maximize utility under a strict disclosure cap):")
cap = bnb.objective.disclosure + 0.05  # a little above the tradeoff optimum
capped = generate_instance(
    SynthConfig(num_entries=6, num_properties=3, k=3, t=2, seed=11),
    model=DisclosureModel("linear", "average"),
    tau=cap,
)
budget = solve_exact(capped, formulation="discbudget")
print(f"best utility {budget.objective.utility:.6f} at disclosure "
      f"{budget.objective.disclosure:.6f} < {cap:.3f}")
