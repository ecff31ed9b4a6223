"""Incremental objective evaluation engine.

The construction phase scores every candidate (entry, adversary) pair in
every iteration, so candidate gains must come from state deltas rather
than full re-evaluations. This module keeps, per adversary, the running
per-property disclosure state (member counts, weighted sums, or cosine
dot products and norms) together with the per-adversary aggregate, and
offers three access paths:

* ``gain(move)``        -- exact objective delta for one move, computed
                           by apply + snapshot-restore
* ``add_gain_row(d)``   -- gains for adding entry d to each adversary,
                           vectorized across adversaries
* ``add_gain_matrix()`` -- gains for every eligible addition, vectorized
                           across entries per adversary

Snapshot-restore (rather than arithmetic undo) keeps the state bit-exact
across millions of trial evaluations. A ``cross_check`` mode recomputes
everything from scratch after each applied move and asserts agreement to
1e-9; the test suite runs it on random move sequences.

Note on cosine: unlike the other three families, cosine components can
*decrease* when an entry is added (the added mass inflates one vector's
norm without necessarily adding overlap), so worst-aggregation updates
always rescan the affected adversary's row.
"""

from __future__ import annotations

import numpy as np

from .instance import Assignment, Instance, InstanceError, Move
from .objective import ObjectiveValue

_NEG_INF = -np.inf


class IncrementalEvaluator:
    def __init__(self, instance: Instance, assignment: Assignment | None = None,
                 cross_check: bool = False):
        if not instance.validated:
            raise InstanceError("instance must be validated first")
        if instance._normalizer <= 0.0:
            raise InstanceError("degenerate instance: all utility weights are zero")
        self.inst = instance
        self.cross_check = cross_check
        self.k = instance.k
        self.num_p = instance.num_properties
        self.z = instance._normalizer
        self.family = instance.model.family
        self.worst = instance.model.aggregation == "worst"

        ew = instance._entry_weights  # |D| x |P| csr of a_dp
        self._indptr = ew.indptr
        self._pcols = ew.indices
        self._pw = ew.data
        self._colsum = instance._entry_colsum
        self._sqsum = instance._entry_sqsum

        if self.family == "cosine":
            self._init_cosine_tables()

        # Lazy per-adversary candidate columns for the global construction
        # scan; a flip only invalidates the touched adversary's column.
        self._col_cache: np.ndarray | None = None
        self._col_dirty = np.ones(self.k, dtype=bool)

        self.reset(assignment)

    # -- state construction ---------------------------------------------
    def reset(self, assignment: Assignment | None = None) -> None:
        inst = self.inst
        self._col_dirty[:] = True
        if assignment is None:
            assignment = Assignment.empty(inst)
        self.bits = assignment.bits.copy()
        self.counts = assignment.per_entry_count.copy()
        self.util_raw = float((inst.utility_weights * self.bits).sum())
        self.c_unassigned = int(np.count_nonzero(self.counts == 0))

        dense = self.bits.astype(np.float64)
        if self.family == "step":
            self.sums = np.asarray(inst._member_matrix @ dense).T.copy()
            self.f_ap = (self.sums == inst._sizes[None, :]).astype(np.float64)
        elif self.family in ("linear", "quadratic"):
            self.sums = np.asarray(inst._weight_matrix @ dense).T.copy()
            self.f_ap = (self.sums if self.family == "linear" else self.sums**2).copy()
        else:
            self._reset_cosine(dense)

        if self.worst:
            self.fprime = self.f_ap.max(axis=1) if self.num_p else np.zeros(self.k)
        else:
            self.f_row_sum = self.f_ap.sum(axis=1) if self.num_p else np.zeros(self.k)
            self.fprime = self.f_row_sum / self.num_p if self.num_p else np.zeros(self.k)
        self.f = float(self.fprime.max())

    def _init_cosine_tables(self) -> None:
        cache = self.inst._cosine
        if "entry_pair_others" not in cache:
            num_e = self.inst.num_entries
            by_entry: list[list[tuple[int, float, int]]] = [[] for _ in range(num_e)]
            for row in range(cache["pair_prop"].size):
                p = int(cache["pair_prop"][row])
                e1 = int(cache["pair_e1"][row])
                e2 = int(cache["pair_e2"][row])
                prod = float(cache["pair_prod"][row])
                by_entry[e1].append((e2, prod, p))
                by_entry[e2].append((e1, prod, p))
            others, prods, props, cols = [], [], [], []
            indptr = self.inst._entry_weights.indptr
            pcols = self.inst._entry_weights.indices
            for d in range(num_e):
                others.append(np.array([o for (o, _, _) in by_entry[d]], dtype=np.int64))
                prods.append(np.array([w for (_, w, _) in by_entry[d]]))
                pp = np.array([p for (_, _, p) in by_entry[d]], dtype=np.int64)
                props.append(pp)
                own = pcols[indptr[d]:indptr[d + 1]]
                lookup = {int(q): i for i, q in enumerate(own)}
                cols.append(np.array([lookup[int(q)] for q in pp], dtype=np.int64))
            cache["entry_pair_others"] = others
            cache["entry_pair_prods"] = prods
            cache["entry_pair_props"] = props
            cache["entry_pair_cols"] = cols
        self._cos = cache
        self._prop_u = cache["prop_users"]
        self._e_user = cache["user_idx"]
        self._e_sq = cache["sq_counts"]

    def _reset_cosine(self, dense: np.ndarray) -> None:
        cache = self._cos
        self.norms = np.zeros((self.k, cache["num_users"]))
        for a in range(self.k):
            self.norms[a] = np.bincount(
                cache["user_idx"], weights=cache["sq_counts"] * dense[:, a],
                minlength=cache["num_users"],
            )
        self.dots = np.zeros((self.k, self.num_p))
        if cache["pair_prop"].size:
            for a in range(self.k):
                active = (
                    cache["pair_prod"] * dense[cache["pair_e1"], a] * dense[cache["pair_e2"], a]
                )
                np.add.at(self.dots[a], cache["pair_prop"], active)
        if self.num_p:
            ui = self._prop_u[:, 0]
            uj = self._prop_u[:, 1]
            denom = self.norms[:, ui] * self.norms[:, uj]
            self.f_ap = np.where(
                denom > 0.0, self.dots / np.sqrt(np.where(denom > 0.0, denom, 1.0)), 0.0
            )
        else:
            self.f_ap = np.zeros((self.k, 0))

    # -- objective views --------------------------------------------------
    @property
    def objective(self) -> float:
        return (
            self.util_raw / self.z
            + self.inst.lam * (self.inst.tau - self.f)
            - self.c_unassigned
        )

    def components(self) -> ObjectiveValue:
        return ObjectiveValue.compose(
            self.util_raw / self.z, self.f, self.c_unassigned, self.inst.lam, self.inst.tau
        )

    def per_property(self) -> np.ndarray:
        """Max-over-adversaries disclosure, per property."""
        if self.num_p == 0:
            return np.zeros(0)
        return self.f_ap.max(axis=0)

    def assignment(self) -> Assignment:
        return Assignment(self.bits.copy())

    # -- mutation with snapshot-restore ------------------------------------
    def _props_of(self, d: int):
        i0, i1 = self._indptr[d], self._indptr[d + 1]
        return self._pcols[i0:i1], self._pw[i0:i1]

    def _flip(self, d: int, a: int, on: bool, log: list | None) -> None:
        if log is not None:
            log.append((
                "base", d, a, bool(self.bits[d, a]), int(self.counts[d]),
                self.util_raw, self.c_unassigned, self.f, self.fprime.copy(),
                None if self.worst else self.f_row_sum.copy(),
            ))
        w = self.inst.utility_weights[d, a]
        self._col_dirty[a] = True
        if on:
            if self.bits[d, a]:
                raise InstanceError(f"bit ({d}, {a}) already set")
            self.bits[d, a] = True
            self.counts[d] += 1
            if self.counts[d] == 1:
                self.c_unassigned -= 1
            self.util_raw += w
        else:
            if not self.bits[d, a]:
                raise InstanceError(f"bit ({d}, {a}) not set")
            self.bits[d, a] = False
            self.counts[d] -= 1
            if self.counts[d] == 0:
                self.c_unassigned += 1
            self.util_raw -= w
        if self.num_p:
            if self.family == "cosine":
                self._flip_cosine(d, a, on, log)
            else:
                self._flip_sums(d, a, on, log)

    def _flip_sums(self, d: int, a: int, on: bool, log: list | None) -> None:
        props, w = self._props_of(d)
        if props.size == 0:
            return
        if log is not None:
            log.append(("row", a, props, self.sums[a, props].copy(), self.f_ap[a, props].copy()))
        sign = 1.0 if on else -1.0
        if self.family == "step":
            new_s = self.sums[a, props] + sign
            new_f = (new_s == self.inst._sizes[props]).astype(np.float64)
        else:
            new_s = self.sums[a, props] + sign * w
            new_f = new_s if self.family == "linear" else new_s**2
        old_f = self.f_ap[a, props]
        delta_sum = float((new_f - old_f).sum())
        self.sums[a, props] = new_s
        self.f_ap[a, props] = new_f
        self._refresh_agg(a, delta_sum, may_decrease=not on)

    def _flip_cosine(self, d: int, a: int, on: bool, log: list | None) -> None:
        cache = self._cos
        u = int(self._e_user[d])
        props, _ = self._props_of(d)
        pprops = cache["entry_pair_props"][d]
        if log is not None:
            log.append((
                "cosine", a, u, float(self.norms[a, u]),
                pprops, self.dots[a, pprops].copy(),
                props, self.f_ap[a, props].copy(),
            ))
        sq = self._e_sq[d]
        self.norms[a, u] += sq if on else -sq
        if pprops.size:
            mask = self.bits[cache["entry_pair_others"][d], a]
            if mask.any():
                delta = cache["entry_pair_prods"][d][mask]
                np.add.at(self.dots[a], pprops[mask], delta if on else -delta)
        if props.size == 0:
            return
        new_f = self._cosine_values(self.norms[a], self.dots[a, props], props, u,
                                    float(self.norms[a, u]))
        old_f = self.f_ap[a, props]
        delta_sum = float((new_f - old_f).sum())
        self.f_ap[a, props] = new_f
        # Cosine components can move either way on any flip.
        self._refresh_agg(a, delta_sum, may_decrease=True)

    def _cosine_values(self, norms_row, dots_vals, props, u, norm_u):
        ui = self._prop_u[props, 0]
        uj = self._prop_u[props, 1]
        partner = np.where(ui == u, uj, ui)
        denom = norm_u * norms_row[partner]
        return np.where(denom > 0.0, dots_vals / np.sqrt(np.where(denom > 0.0, denom, 1.0)), 0.0)

    def _refresh_agg(self, a: int, delta_sum: float, may_decrease: bool) -> None:
        if self.worst:
            if may_decrease:
                self.fprime[a] = float(self.f_ap[a].max())
            else:
                self.fprime[a] = max(self.fprime[a], float(self.f_ap[a].max()))
        else:
            self.f_row_sum[a] += delta_sum
            self.fprime[a] = self.f_row_sum[a] / self.num_p
        self.f = float(self.fprime.max())

    def _undo(self, log: list) -> None:
        for rec in reversed(log):
            tag = rec[0]
            if tag == "base":
                (_, d, a, old_bit, old_count, util, c_un, f, fprime, frs) = rec
                self.bits[d, a] = old_bit
                self.counts[d] = old_count
                self.util_raw = util
                self.c_unassigned = c_un
                self.f = f
                self.fprime = fprime
                if frs is not None:
                    self.f_row_sum = frs
            elif tag == "row":
                _, a, props, old_s, old_f = rec
                self.sums[a, props] = old_s
                self.f_ap[a, props] = old_f
            else:
                _, a, u, old_norm, touched, old_dots, props, old_f = rec
                self.norms[a, u] = old_norm
                if touched.size:
                    self.dots[a, touched] = old_dots
                self.f_ap[a, props] = old_f

    def _move_flips(self, move: Move):
        if move.kind == "add":
            return ((move.entry, move.to_adversary, True),)
        if move.kind == "remove":
            return ((move.entry, move.from_adversary, False),)
        return (
            (move.entry, move.from_adversary, False),
            (move.entry, move.to_adversary, True),
        )

    def gain(self, move: Move) -> float:
        """Objective delta of one move, leaving the state untouched."""
        before = self.objective
        log: list = []
        for (d, a, on) in self._move_flips(move):
            self._flip(d, a, on, log)
        after = self.objective
        self._undo(log)
        return after - before

    def apply(self, move: Move) -> None:
        for (d, a, on) in self._move_flips(move):
            self._flip(d, a, on, None)
        if self.cross_check:
            self._assert_consistent()

    def _assert_consistent(self) -> None:
        fresh = IncrementalEvaluator(self.inst, self.assignment())
        if abs(fresh.objective - self.objective) > 1e-9:
            raise AssertionError(
                f"incremental objective {self.objective!r} drifted from "
                f"scratch value {fresh.objective!r}"
            )
        if self.num_p and np.abs(fresh.f_ap - self.f_ap).max() > 1e-9:
            raise AssertionError("incremental disclosure state drifted")

    # -- vectorized candidate gains -----------------------------------------
    def _other_max(self) -> np.ndarray:
        """For each adversary, the max aggregate among the others."""
        order = np.sort(self.fprime)
        m1, m2 = order[-1], order[-2]
        return np.where(self.fprime == m1, m2, m1)

    def add_gain_row(self, d: int) -> np.ndarray:
        """Gains for Move('add', d, to=a) for every adversary a; already
        set bits come back as -inf. Callers check the per-entry cap."""
        inst = self.inst
        newfp = self._new_fprime_add_row(d)
        new_f = np.maximum(self._other_max(), newfp)
        bonus = 1.0 if self.counts[d] == 0 else 0.0
        gains = inst.utility_weights[d] / self.z + inst.lam * (self.f - new_f) + bonus
        gains[self.bits[d]] = _NEG_INF
        return gains

    def _new_fprime_add_row(self, d: int) -> np.ndarray:
        if self.num_p == 0:
            return self.fprime.copy()
        props, w = self._props_of(d)
        if self.family == "cosine":
            return self._new_fprime_add_row_cosine(d, props)
        if props.size == 0:
            return self.fprime.copy()
        s = self.sums[:, props]
        if self.family == "step":
            completing = s == (self.inst._sizes[props] - 1.0)[None, :]
            if self.worst:
                return np.maximum(self.fprime, completing.any(axis=1).astype(np.float64))
            return self.fprime + completing.sum(axis=1) / self.num_p
        if self.family == "linear":
            if self.worst:
                return np.maximum(self.fprime, (s + w[None, :]).max(axis=1))
            return self.fprime + self._colsum[d] / self.num_p
        if self.worst:
            return np.maximum(self.fprime, ((s + w[None, :]) ** 2).max(axis=1))
        return self.fprime + (2.0 * (s @ w) + self._sqsum[d]) / self.num_p

    def _new_fprime_add_row_cosine(self, d: int, props: np.ndarray) -> np.ndarray:
        cache = self._cos
        u = int(self._e_user[d])
        if props.size == 0:
            return self.fprime.copy()
        new_norm_u = self.norms[:, u] + self._e_sq[d]  # (k,)
        dots_new = self.dots[:, props].copy()  # (k, deg)
        others = cache["entry_pair_others"][d]
        if others.size:
            active = self.bits[others].T * cache["entry_pair_prods"][d]  # (k, pairs)
            np.add.at(dots_new.T, cache["entry_pair_cols"][d], active.T)
        ui = self._prop_u[props, 0]
        uj = self._prop_u[props, 1]
        partner = np.where(ui == u, uj, ui)
        denom = new_norm_u[:, None] * self.norms[:, partner]
        new_f = np.where(denom > 0.0, dots_new / np.sqrt(np.where(denom > 0.0, denom, 1.0)), 0.0)
        old_f = self.f_ap[:, props]
        if not self.worst:
            return self.fprime + (new_f - old_f).sum(axis=1) / self.num_p
        out = np.maximum(self.fprime, new_f.max(axis=1))
        # A component that drops may have owned the row max; rescan those rows.
        for a in np.nonzero((new_f < old_f).any(axis=1))[0]:
            row = self.f_ap[a].copy()
            row[props] = new_f[a]
            out[a] = row.max()
        return out

    def _new_fprime_remove_row(self, d: int, asg: np.ndarray) -> dict[int, float]:
        """fprime[a] after removing entry d from adversary a, for each
        currently assigned a."""
        out: dict[int, float] = {}
        if self.num_p == 0 or asg.size == 0:
            return {int(a): float(self.fprime[a]) for a in asg}
        props, w = self._props_of(d)
        if props.size == 0 and self.family != "cosine":
            return {int(a): float(self.fprime[a]) for a in asg}

        if self.family == "cosine":
            cache = self._cos
            u = int(self._e_user[d])
            others = cache["entry_pair_others"][d]
            pcols = cache["entry_pair_cols"][d]
            prods = cache["entry_pair_prods"][d]
            for a in asg:
                a = int(a)
                if props.size == 0:
                    out[a] = float(self.fprime[a])
                    continue
                dots_new = self.dots[a, props].copy()
                if others.size:
                    mask = self.bits[others, a]
                    np.subtract.at(dots_new, pcols[mask], prods[mask])
                norm_u = float(self.norms[a, u]) - float(self._e_sq[d])
                new_f = self._cosine_values(self.norms[a], dots_new, props, u, norm_u)
                out[a] = self._row_aggregate(a, props, new_f)
            return out

        for a in asg:
            a = int(a)
            s = self.sums[a, props]
            if self.family == "step":
                new_f = np.zeros(props.size)  # a removed member always breaks fullness
            elif self.family == "linear":
                new_f = s - w
            else:
                new_f = (s - w) ** 2
            out[a] = self._row_aggregate(a, props, new_f)
        return out

    def _row_aggregate(self, a: int, props: np.ndarray, new_vals: np.ndarray) -> float:
        if not self.worst:
            delta = float((new_vals - self.f_ap[a, props]).sum())
            return (self.f_row_sum[a] + delta) / self.num_p
        row = self.f_ap[a].copy()
        row[props] = new_vals
        return float(row.max())

    def neighborhood_gains(self, d: int) -> list[tuple[Move, float]]:
        """Gains for every single-entry neighbor of the current state:
        additions (if below the cap), then per assigned adversary its
        removal and swaps. Composes per-adversary row updates, which is
        exact because a move touches each adversary's state independently."""
        inst = self.inst
        w = inst.utility_weights[d]
        count = int(self.counts[d])
        asg = np.nonzero(self.bits[d])[0]
        free = [int(b) for b in range(self.k) if not self.bits[d, b]]
        add_newfp = self._new_fprime_add_row(d) if free else None
        rem_newfp = self._new_fprime_remove_row(d, asg)

        order = np.argsort(-self.fprime, kind="stable")[: min(3, self.k)]
        top = [(int(i), float(self.fprime[i])) for i in order]

        def max_excluding(excl: tuple) -> float:
            for idx, val in top:
                if idx not in excl:
                    return val
            return -np.inf

        lam = inst.lam
        f_cur = self.f
        out: list[tuple[Move, float]] = []
        if count < inst.t:
            for b in free:
                f_new = max(max_excluding((b,)), float(add_newfp[b]))
                gain = w[b] / self.z + lam * (f_cur - f_new) + (1.0 if count == 0 else 0.0)
                out.append((Move("add", d, to_adversary=b), gain))
        for a in asg:
            a = int(a)
            f_after_rem = rem_newfp[a]
            f_new = max(max_excluding((a,)), f_after_rem)
            gain = -w[a] / self.z + lam * (f_cur - f_new) - (1.0 if count == 1 else 0.0)
            out.append((Move("remove", d, from_adversary=a), gain))
            for b in free:
                f_new = max(max_excluding((a, b)), f_after_rem, float(add_newfp[b]))
                gain = (w[b] - w[a]) / self.z + lam * (f_cur - f_new)
                out.append((Move("swap", d, from_adversary=a, to_adversary=b), gain))
        return out

    def add_gain_matrix(self) -> np.ndarray:
        """(|D|, k) matrix of addition gains; ineligible cells are -inf.
        Eligible means: bit unset and entry below the per-entry cap."""
        inst = self.inst
        num_d = inst.num_entries
        if self.family == "cosine":
            gains = np.full((num_d, self.k), _NEG_INF)
            for d in np.nonzero(self.counts < inst.t)[0]:
                gains[d] = self.add_gain_row(int(d))
            return gains

        if self._col_cache is None:
            self._col_cache = np.empty((num_d, self.k))
            self._col_dirty[:] = True
        for a in np.nonzero(self._col_dirty)[0]:
            self._col_cache[:, a] = self._new_fprime_add_col(int(a))
            self._col_dirty[a] = False
        newfp = self._col_cache
        new_f = np.maximum(newfp, self._other_max()[None, :])
        bonus = (self.counts == 0).astype(np.float64)
        gains = inst.utility_weights / self.z + inst.lam * (self.f - new_f) + bonus[:, None]
        gains[self.bits] = _NEG_INF
        gains[self.counts >= inst.t, :] = _NEG_INF
        return gains

    def _new_fprime_add_col(self, a: int) -> np.ndarray:
        """fprime[a] after adding entry d to adversary a, for every d."""
        inst = self.inst
        num_d = inst.num_entries
        if self.num_p == 0:
            return np.full(num_d, self.fprime[a])
        s_row = self.sums[a]
        if self.family == "step":
            completing = (s_row == inst._sizes - 1.0).astype(np.float64)
            cnt = inst._entry_members @ completing
            if self.worst:
                return np.maximum(self.fprime[a], (cnt > 0).astype(np.float64))
            return self.fprime[a] + cnt / self.num_p
        if self.family == "linear" and not self.worst:
            return self.fprime[a] + self._colsum / self.num_p
        if self.family == "quadratic" and not self.worst:
            delta = 2.0 * (inst._entry_weights @ s_row) + self._sqsum
            return self.fprime[a] + delta / self.num_p
        # Worst-aggregation linear/quadratic: segmented max over each
        # entry's incident properties.
        vals = s_row[self._pcols] + self._pw
        if self.family == "quadratic":
            vals = vals**2
        return np.maximum(self.fprime[a], _segment_max(vals, self._indptr, num_d))


def _segment_max(vals: np.ndarray, indptr: np.ndarray, n: int) -> np.ndarray:
    """Per-segment max with empty segments mapped to -inf."""
    out = np.full(n, _NEG_INF)
    if vals.size == 0:
        return out
    padded = np.append(vals, _NEG_INF)
    seg = np.maximum.reduceat(padded, indptr[:-1])
    lengths = np.diff(indptr)
    out[lengths > 0] = seg[lengths > 0]
    return out
