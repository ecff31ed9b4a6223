"""Search heuristics: weighted random baseline, greedy/randomized
construction (global and myopic), single-pass local search, and the
repeated outer loop that keeps the best of r independent runs.

Strategy semantics:

* GREEDY picks the candidate with the largest objective gain, breaking
  ties toward the lowest (entry, adversary) pair.
* GRASP collects the up-to-n best strictly improving candidates and
  draws one uniformly; with n=1 it reproduces GREEDY exactly.

Both accept a move only on strict improvement, which (together with the
unassigned-entry penalty in the objective) guarantees every entry ends
up with between 1 and t adversaries.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .disclosure import disclosure_vector, per_property_disclosure
from .evaluator import IncrementalEvaluator
from .instance import Assignment, Instance, InstanceError, Move, validate_instance
from .objective import ObjectiveValue, tradeoff_objective

STRATEGIES = ("greedy", "grasp")
SCOPES = ("global", "myopic")


@dataclass(frozen=True)
class SearchParams:
    strategy: str = "greedy"
    scope: str = "global"
    n: int = 1
    r: int = 1
    t: int | None = None  # None: use the instance's cap
    seed: int = 0

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise InstanceError(f"unknown strategy {self.strategy!r}")
        if self.scope not in SCOPES:
            raise InstanceError(f"unknown scope {self.scope!r}")
        if self.n < 1:
            raise InstanceError("candidate-list size n must be >= 1")
        if self.r < 1:
            raise InstanceError("repetition count r must be >= 1")


@dataclass
class SolveResult:
    assignment: Assignment
    objective: ObjectiveValue
    per_property_disclosure: np.ndarray
    iterations: int
    wall_time: float
    seed_used: int


def finalize_result(instance: Instance, assignment: Assignment, iterations: int,
            started: float, seed: int) -> SolveResult:
    """Package a result, recomputing the objective from scratch so the
    reported value is exactly reproducible from the assignment."""
    vec = disclosure_vector(instance, assignment)
    return SolveResult(
        assignment=assignment,
        objective=tradeoff_objective(instance, assignment),
        per_property_disclosure=per_property_disclosure(vec),
        iterations=iterations,
        wall_time=time.perf_counter() - started,
        seed_used=seed,
    )


# -- RAND+ baseline ---------------------------------------------------------

def rand_plus(instance: Instance, runs: int = 100, seed: int = 0) -> SolveResult:
    """Assign every entry to exactly t adversaries, sampled without
    replacement with probability proportional to the utility weight;
    keep the best of ``runs`` draws by tradeoff objective."""
    instance = validate_instance(instance)
    if runs < 1:
        raise InstanceError("runs must be >= 1")
    started = time.perf_counter()
    rng = np.random.default_rng(seed)
    w = instance.utility_weights.copy()
    zero_rows = w.sum(axis=1) == 0.0
    w[zero_rows] = 1.0  # uniform fallback for all-zero weight rows

    best_bits = None
    best_value = -np.inf
    t = instance.t
    for _ in range(runs):
        # Weighted sampling without replacement via exponential racing:
        # the t smallest Exp(1)/w values per row are a draw proportional
        # to w.
        keys = rng.exponential(1.0, size=w.shape) / w
        chosen = np.argpartition(keys, t - 1, axis=1)[:, :t]
        bits = np.zeros_like(instance.utility_weights, dtype=bool)
        np.put_along_axis(bits, chosen, True, axis=1)
        value = tradeoff_objective(instance, Assignment(bits)).value
        if value > best_value:
            best_value = value
            best_bits = bits
    return finalize_result(instance, Assignment(best_bits), runs, started, seed)


# -- candidate selection (construction) ---------------------------------------

def _select_from_gain_matrix(gains: np.ndarray, params: SearchParams, rng) -> Move | None:
    """Pick an addition from a (|D|, k) gain matrix; None when nothing
    strictly improves."""
    k = gains.shape[1]
    if params.strategy == "greedy":
        flat = int(np.argmax(gains))  # first max in row-major = lowest (d, a)
        if not gains.flat[flat] > 0.0:
            return None
        return Move("add", flat // k, to_adversary=flat % k)
    flat_gains = gains.ravel()
    improving = np.nonzero(flat_gains > 0.0)[0]
    if improving.size == 0:
        return None
    order = improving[np.lexsort((improving, -flat_gains[improving]))]
    top = order[: params.n]
    flat = int(top[rng.integers(top.size)])
    return Move("add", flat // k, to_adversary=flat % k)


def _select_from_gain_row(d: int, gains: np.ndarray, params: SearchParams, rng) -> Move | None:
    if params.strategy == "greedy":
        a = int(np.argmax(gains))
        if not gains[a] > 0.0:
            return None
        return Move("add", d, to_adversary=a)
    improving = np.nonzero(gains > 0.0)[0]
    if improving.size == 0:
        return None
    order = improving[np.lexsort((improving, -gains[improving]))]
    top = order[: params.n]
    return Move("add", d, to_adversary=int(top[rng.integers(top.size)]))


def pick_next_best(instance: Instance, assignment: Assignment, g: float,
                   candidates, params: SearchParams, rng) -> Move | None:
    """Choose the next addition among explicit (entry, adversary)
    candidates: the gain-maximizing one (GREEDY) or a uniform draw from
    the up-to-n best (GRASP); None if nothing beats the current value g."""
    cands = sorted(candidates)
    if not cands:
        return None
    ev = IncrementalEvaluator(instance, assignment)
    base = ev.objective
    scored = []
    for (d, a) in cands:
        value = base + ev.gain(Move("add", d, to_adversary=a))
        scored.append((value, d, a))
    if params.strategy == "greedy":
        value, d, a = max(scored, key=lambda s: (s[0], -s[1], -s[2]))
        if not value > g:
            return None
        return Move("add", d, to_adversary=a)
    improving = sorted((s for s in scored if s[0] > g), key=lambda s: (-s[0], s[1], s[2]))
    if not improving:
        return None
    top = improving[: params.n]
    _, d, a = top[rng.integers(len(top))]
    return Move("add", d, to_adversary=a)


# -- construction phase --------------------------------------------------------

def construction(instance: Instance, params: SearchParams, rng,
                 evaluator: IncrementalEvaluator | None = None):
    """Build an assignment from scratch by repeatedly adding the chosen
    candidate. Returns (assignment, objective value, additions made)."""
    instance = validate_instance(instance)
    ev = evaluator if evaluator is not None else IncrementalEvaluator(instance)
    if params.scope == "global":
        applied = _construct_global(ev, params, rng)
    else:
        applied = _construct_myopic(ev, params, rng)
    return ev.assignment(), ev.objective, applied


def _construct_global(ev: IncrementalEvaluator, params: SearchParams, rng) -> int:
    inst = ev.inst
    applied = 0
    for _ in range(inst.t * inst.num_entries):
        move = _select_from_gain_matrix(ev.add_gain_matrix(), params, rng)
        if move is None:
            break
        ev.apply(move)
        applied += 1
    return applied


def _construct_myopic(ev: IncrementalEvaluator, params: SearchParams, rng) -> int:
    inst = ev.inst
    order = rng.permutation(inst.num_entries)  # fixed entry ordering per run
    applied = 0
    for _ in range(inst.t):
        for d in order:
            d = int(d)
            if ev.counts[d] >= inst.t:
                continue
            move = _select_from_gain_row(d, ev.add_gain_row(d), params, rng)
            if move is not None:
                ev.apply(move)
                applied += 1
    return applied


# -- local search ---------------------------------------------------------------

def local_search(instance: Instance, assignment: Assignment, params: SearchParams, rng,
                 evaluator: IncrementalEvaluator | None = None):
    """One pass over the entries in seeded random order, taking for each
    the best strictly-improving neighbor (stay / add / remove / swap).
    Returns (assignment, objective value, moves applied)."""
    instance = validate_instance(instance)
    ev = evaluator if evaluator is not None else IncrementalEvaluator(instance, assignment)
    applied = 0
    for d in rng.permutation(instance.num_entries):
        d = int(d)
        best_move = None
        best_gain = 0.0
        for move, gain in ev.neighborhood_gains(d):
            if gain > best_gain:
                best_gain = gain
                best_move = move
        if best_move is not None:
            ev.apply(best_move)
            applied += 1
    return ev.assignment(), ev.objective, applied


# -- outer loop -------------------------------------------------------------------

def _with_cap(instance: Instance, t: int) -> Instance:
    clone = Instance(
        instance.hypergraph, instance.utility_weights, instance.k, t,
        instance.lam, instance.tau, instance.model, instance.entries,
    )
    return validate_instance(clone)


def solve(instance: Instance, params: SearchParams) -> SolveResult:
    """Run construction + local search r times on independent seeded
    streams and return the best result; deterministic in (instance,
    params)."""
    instance = validate_instance(instance)
    if params.t is not None and params.t != instance.t:
        instance = _with_cap(instance, params.t)
    started = time.perf_counter()
    streams = np.random.SeedSequence(params.seed).spawn(params.r)
    best_bits = None
    best_value = -np.inf
    total = 0
    for rep in range(params.r):
        rng = np.random.default_rng(streams[rep])
        ev = IncrementalEvaluator(instance)
        _, _, made = construction(instance, params, rng, evaluator=ev)
        _, value, moved = local_search(instance, None, params, rng, evaluator=ev)
        total += made + moved
        if value > best_value:
            best_value = value
            best_bits = ev.bits.copy()
    return finalize_result(instance, Assignment(best_bits), total, started, params.seed)
