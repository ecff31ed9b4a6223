import numpy as np
import pytest

from privpart import (
    DependencyHypergraph,
    DisclosureModel,
    FractionalSolution,
    InfeasibleError,
    Instance,
    LpInfeasibleError,
    SearchParams,
    SensitiveProperty,
    SizeGuardError,
    enumerate_optimum,
    random_small_instance,
    round_and_repair,
    rounding_mean_objective,
    solve,
    solve_exact,
    solve_lp_relaxation,
    validate_instance,
)
from privpart.relaxation import repair


def pair_instance(lam=1.0, tau=0.0, family="step", weights=None, t=1, k=2):
    props = [SensitiveProperty(0, (0, 1), weights)]
    hg = DependencyHypergraph(2, props)
    w = np.array([[0.9, 0.1], [0.1, 0.8]])
    return validate_instance(
        Instance(hg, w, k=k, t=t, lam=lam, tau=tau, model=DisclosureModel(family, "worst"))
    )


def test_exact_splits_the_step_pair():
    inst = pair_instance()
    res = solve_exact(inst)
    assert res.objective.value == pytest.approx(1.0)
    assert res.objective.disclosure == 0.0
    adv = res.assignment.bits.argmax(axis=1)
    assert adv[0] != adv[1]


def test_exact_discbudget_infeasible_when_everything_leaks():
    # single-member property: any assignment of its entry discloses fully
    props = [SensitiveProperty(0, (0,))]
    hg = DependencyHypergraph(1, props)
    inst = validate_instance(Instance(hg, np.array([[0.5, 0.5]]), 2, 1, tau=0.0,
                                      model=DisclosureModel("step", "worst")))
    with pytest.raises(InfeasibleError):
        solve_exact(inst, formulation="discbudget")
    with pytest.raises(InfeasibleError):
        enumerate_optimum(inst, formulation="discbudget")


def test_exact_matches_greedy_without_properties():
    rng = np.random.default_rng(4)
    w = rng.random((5, 3))
    inst = validate_instance(Instance(DependencyHypergraph(5, []), w, 3, 2))
    exact = solve_exact(inst)
    greedy = solve(inst, SearchParams("greedy", "global", seed=0))
    assert exact.objective.value == pytest.approx(greedy.objective.value)
    assert exact.objective.utility == pytest.approx(1.0)


def test_exact_agrees_with_enumeration_and_brackets_heuristic():
    for trial in range(40):
        inst = random_small_instance(800 + trial)
        ref = enumerate_optimum(inst)
        bnb = solve_exact(inst)
        assert bnb.objective.value == pytest.approx(ref.objective.value, abs=1e-12)
        heur = solve(inst, SearchParams("grasp", "global", n=2, r=2, seed=trial))
        assert heur.objective.value <= bnb.objective.value + 1e-9


def test_maxmin_formulation_equals_tradeoff_value():
    for trial in range(15):
        inst = random_small_instance(300 + trial)
        a = solve_exact(inst, formulation="tradeoff")
        b = solve_exact(inst, formulation="maxmin")
        assert a.objective.value == pytest.approx(b.objective.value, abs=1e-12)


def test_size_guard_refuses_large_instances():
    inst = validate_instance(
        Instance(DependencyHypergraph(500, []), np.ones((500, 2)), 2, 1)
    )
    with pytest.raises(SizeGuardError):
        solve_exact(inst)


def test_discbudget_exact_maximizes_utility_under_budget():
    weights = (0.5, 0.5)
    inst = pair_instance(family="linear", weights=weights, tau=0.6, t=1)
    res = solve_exact(inst, formulation="discbudget")
    ref = enumerate_optimum(inst, formulation="discbudget")
    assert res.objective.utility == pytest.approx(ref.objective.utility, abs=1e-12)
    assert res.objective.disclosure < 0.6


# -- LP relaxation ------------------------------------------------------------

def test_lp_step_pair_is_integral_and_tight():
    inst = pair_instance()
    frac = solve_lp_relaxation(inst)
    assert np.allclose(np.sort(frac.x_hat.ravel()), [0, 0, 1, 1], atol=1e-8)
    assert frac.lp_objective == pytest.approx(1.0, abs=1e-8)


def test_lp_without_properties_uses_top_t():
    rng = np.random.default_rng(8)
    w = rng.random((4, 3))
    inst = validate_instance(Instance(DependencyHypergraph(4, []), w, 3, 2))
    frac = solve_lp_relaxation(inst, family="step")
    top2 = np.argsort(w, axis=1)[:, ::-1][:, :2]
    for d in range(4):
        assert frac.x_hat[d].sum() == pytest.approx(2.0, abs=1e-6)
        assert frac.x_hat[d, top2[d]].sum() == pytest.approx(2.0, abs=1e-6)


def test_lp_step_infeasible_with_singleton_property():
    props = [SensitiveProperty(0, (0,))]
    hg = DependencyHypergraph(1, props)
    inst = validate_instance(Instance(hg, np.array([[0.5, 0.5]]), 2, 1,
                                      model=DisclosureModel("step", "worst")))
    with pytest.raises(LpInfeasibleError):
        solve_lp_relaxation(inst)


def test_lp_bounds_exact_for_linear_any_lambda():
    for trial in range(30):
        inst = random_small_instance(600 + trial, family="linear")
        try:
            frac = solve_lp_relaxation(inst)
        except LpInfeasibleError:
            continue
        exact = solve_exact(inst)
        assert frac.lp_objective >= exact.objective.value - 1e-9


# -- rounding -----------------------------------------------------------------

def test_rounding_integral_solution_is_identity():
    inst = pair_instance()
    frac = solve_lp_relaxation(inst)
    res = round_and_repair(inst, frac, runs=5, seed=0)
    assert res.objective.value == pytest.approx(frac.lp_objective, abs=1e-8)
    assert res.assignment.is_cardinality_feasible(inst.t)


def test_repair_assigns_orphans_to_highest_fraction():
    inst = pair_instance()
    frac = FractionalSolution(np.array([[0.5, 0.5], [0.2, 0.8]]), 0.0)
    bits = np.zeros((2, 2), dtype=bool)
    fixed = repair(inst, bits, frac)
    assert fixed[0].tolist() == [True, False]  # tie broken toward lower id
    assert fixed[1].tolist() == [False, True]


def test_repair_trims_overfull_rows_keeping_high_fractions():
    inst = pair_instance(t=1)
    frac = FractionalSolution(np.array([[0.1, 0.9], [1.0, 0.0]]), 0.0)
    bits = np.ones((2, 2), dtype=bool)
    fixed = repair(inst, bits, frac)
    assert fixed.sum(axis=1).tolist() == [1, 1]
    assert fixed[0].tolist() == [False, True]
    assert fixed[1].tolist() == [True, False]


def random_feasible_bits(inst, rng):
    b = np.zeros((inst.num_entries, inst.k), dtype=bool)
    for d in range(inst.num_entries):
        size = int(rng.integers(1, inst.t + 1))
        b[d, rng.choice(inst.k, size=size, replace=False)] = True
    return b


def test_round_and_repair_is_always_cardinality_feasible():
    rng = np.random.default_rng(31)
    for trial in range(20):
        inst = random_small_instance(900 + trial, family="linear")
        # blend of two feasible assignments: rows stay in [1, t]
        x = 0.5 * random_feasible_bits(inst, rng) + 0.5 * random_feasible_bits(inst, rng)
        frac = FractionalSolution(x, 0.0)
        res = round_and_repair(inst, frac, runs=3, seed=trial)
        assert res.assignment.is_cardinality_feasible(inst.t)


def dominant_instance():
    """Linear instance whose relaxation concentrates all disclosure on one
    adversary, making the rounded objective's expectation exact."""
    props = [
        SensitiveProperty(0, (0, 1), (0.5, 0.5)),
        SensitiveProperty(1, (2, 3), (0.5, 0.5)),
    ]
    hg = DependencyHypergraph(5, props)
    w = np.array([
        [0.45, 0.0],   # members of p0, pulled to adversary 0
        [0.45, 0.0],
        [0.0, 0.5],    # members of p1, pinned on adversary 1
        [0.0, 0.5],
        [0.3, 0.3],
    ])
    return validate_instance(Instance(
        hg, w, k=2, t=2, lam=0.5, tau=0.3,
        model=DisclosureModel("linear", "average"),
    ))


def test_unrepaired_rounding_matches_lp_objective_in_expectation():
    inst = dominant_instance()
    frac = solve_lp_relaxation(inst)
    mean, stderr = rounding_mean_objective(inst, frac, draws=4000, seed=7)
    assert abs(mean - frac.lp_objective) <= 3.0 * stderr + 1e-9


def test_unrepaired_rounding_matches_fractional_value_with_true_randomness():
    # Hand-built fractional point with adversary-1 disclosure dominant in
    # every realization: the expected rounded objective equals the
    # fractional objective exactly, and the draw really is random.
    inst = dominant_instance()
    x = np.array([
        [1.0, 0.0],
        [1.0, 0.0],
        [0.0, 1.0],
        [0.0, 1.0],
        [0.7, 0.4],
    ])
    util = float((inst.utility_weights * x).sum()) / inst._normalizer
    # adversary 1 discloses everything of p1; fractional overall f' is its mean
    f_frac = (0.0 + 1.0) / 2.0
    frac = FractionalSolution(x, util + inst.lam * (inst.tau - f_frac))
    mean, stderr = rounding_mean_objective(inst, frac, draws=6000, seed=11)
    assert stderr > 0.0
    assert abs(mean - frac.lp_objective) <= 3.0 * stderr + 1e-9
