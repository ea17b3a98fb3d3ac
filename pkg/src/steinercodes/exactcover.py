"""Exact cover search and cyclic Steiner systems.

A design invariant under ``x -> x+1 (mod v)`` is a union of orbits of
k-subsets.  Choosing those orbits is an exact cover problem whose columns are
the orbits of t-subsets, which is far smaller than the raw problem.
"""

from __future__ import annotations

import random
import time
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from typing import Hashable, Sequence

from .designs import Block, Design, verify_design
from .errors import AdmissibilityError, ParameterError, Undecided, VerificationError
from .seeding import derive_seed


@dataclass
class ExactCoverInstance:
    num_columns: int
    rows: list[tuple[int, ...]]
    row_labels: list[Hashable] | None = None

    def __post_init__(self):
        self.rows = [tuple(sorted(r)) for r in self.rows]
        for idx, row in enumerate(self.rows):
            if not row:
                raise ParameterError(f"row {idx} is empty")
            if len(set(row)) != len(row):
                raise ParameterError(f"row {idx} repeats a column")
            if row[0] < 0 or row[-1] >= self.num_columns:
                raise ParameterError(f"row {idx} has a column outside [0, {self.num_columns})")


@dataclass(frozen=True)
class SolverBudget:
    max_nodes: int = 50_000_000
    time_limit: float = 600.0
    seed: int = 0

    def __post_init__(self):
        if self.max_nodes <= 0 or self.time_limit <= 0 or self.seed < 0:
            raise ParameterError("budget fields must be positive")


@dataclass
class ExactCoverResult:
    status: str  # "solved", "infeasible" or "undecided"
    rows: list[int] = field(default_factory=list)
    nodes: int = 0
    elapsed: float = 0.0

    @property
    def solved(self) -> bool:
        return self.status == "solved"


class _BudgetExhausted(Exception):
    pass


def solve_exact_cover(instance: ExactCoverInstance, budget: SolverBudget = SolverBudget()) -> ExactCoverResult:
    """Algorithm X with fewest-candidates column choice.

    Rows are tried in an order fixed once by ``budget.seed``; ties between
    equally constrained columns go to the lowest column index.
    """
    n = instance.num_columns
    rows = instance.rows
    rng = random.Random(derive_seed(budget.seed, "exactcover.row-order"))
    order = list(range(len(rows)))
    rng.shuffle(order)
    rank = {r: pos for pos, r in enumerate(order)}

    cols: list[set[int]] = [set() for _ in range(n)]
    for r, row in enumerate(rows):
        for c in row:
            cols[c].add(r)
    active = set(range(n))
    solution: list[int] = []
    start = time.monotonic()
    nodes = 0

    def select(r):
        for c in rows[r]:
            for other in cols[c]:
                for c2 in rows[other]:
                    if c2 != c:
                        cols[c2].discard(other)
            active.discard(c)

    def deselect(r):
        for c in reversed(rows[r]):
            active.add(c)
            for other in cols[c]:
                for c2 in rows[other]:
                    if c2 != c:
                        cols[c2].add(other)

    def search() -> bool:
        nonlocal nodes
        if not active:
            return True
        nodes += 1
        if nodes > budget.max_nodes:
            raise _BudgetExhausted
        if nodes % 4096 == 0 and time.monotonic() - start > budget.time_limit:
            raise _BudgetExhausted
        c = min(active, key=lambda j: (len(cols[j]), j))
        for r in sorted(cols[c], key=rank.__getitem__):
            solution.append(r)
            select(r)
            if search():
                return True
            deselect(r)
            solution.pop()
        return False

    try:
        found = search()
    except _BudgetExhausted:
        return ExactCoverResult("undecided", nodes=nodes, elapsed=time.monotonic() - start)
    elapsed = time.monotonic() - start
    if not found:
        return ExactCoverResult("infeasible", nodes=nodes, elapsed=elapsed)
    chosen = sorted(solution)
    if not is_exact_cover(instance, chosen):
        raise VerificationError("solver returned rows that are not an exact cover")
    return ExactCoverResult("solved", chosen, nodes, elapsed)


def is_exact_cover(instance: ExactCoverInstance, chosen: Sequence[int]) -> bool:
    hits = Counter(c for r in chosen for c in instance.rows[r])
    return len(hits) == instance.num_columns and all(h == 1 for h in hits.values())


# --------------------------------------------------------------------------
# cyclic orbits


def translate(subset: Sequence[int], shift: int, v: int) -> Block:
    return tuple(sorted((x + shift) % v for x in subset))


def canonical_translate(subset: Sequence[int], v: int) -> Block:
    return min(translate(subset, s, v) for s in range(v))


def orbit(subset: Sequence[int], v: int) -> list[Block]:
    seen = []
    for s in range(v):
        img = translate(subset, s, v)
        if img == tuple(sorted(subset)) and s:
            break
        seen.append(img)
    return seen


@dataclass
class OrbitCatalog:
    v: int
    t: int
    k: int
    k_orbits: list[tuple[Block, int]]
    t_orbits: list[tuple[Block, int]]
    # incidence[i] maps t-orbit index -> blocks of k-orbit i through each element of that t-orbit
    incidence: list[dict[int, int]]


def _orbit_map(v: int, size: int) -> tuple[list[tuple[Block, int]], dict[Block, int]]:
    """Orbit representatives with lengths, and the orbit index of every subset."""
    reps: list[tuple[Block, int]] = []
    index: dict[Block, int] = {}
    for subset in combinations(range(v), size):
        if subset in index:
            continue
        members = orbit(subset, v)
        for m in members:
            index[m] = len(reps)
        reps.append((subset, len(members)))
    # combinations() is lexicographic, so each first-seen subset is its orbit's least member
    return reps, index


def build_orbit_catalog(t: int, v: int, k: int) -> OrbitCatalog:
    if not (0 < t < k < v):
        raise ParameterError(f"need 0 < t < k < v, got t={t}, k={k}, v={v}")
    k_orbits, _ = _orbit_map(v, k)
    t_orbits, t_index = _orbit_map(v, t)
    if sum(n for _, n in k_orbits) != comb(v, k) or sum(n for _, n in t_orbits) != comb(v, t):
        raise VerificationError("orbit lengths do not partition the subsets")

    incidence = []
    for rep, _length in k_orbits:
        counts = Counter()
        for block in orbit(rep, v):
            counts.update(combinations(block, t))
        per_orbit: dict[int, set[int]] = {}
        reached: Counter = Counter()
        for sub, c in counts.items():
            j = t_index[sub]
            per_orbit.setdefault(j, set()).add(c)
            reached[j] += 1
        row = {}
        for j, values in per_orbit.items():
            # symmetry forces a constant, everywhere-positive count across the t-orbit
            if len(values) != 1 or reached[j] != t_orbits[j][1]:
                raise VerificationError(f"non-constant coverage of t-orbit {t_orbits[j][0]} by {rep}")
            row[j] = values.pop()
        incidence.append(row)
    return OrbitCatalog(v, t, k, k_orbits, t_orbits, incidence)


def steiner_admissible(t: int, v: int, k: int) -> bool:
    """Divisibility conditions C(k-s, t-s) | C(v-s, t-s) for all s < t."""
    return all(comb(v - s, t - s) % comb(k - s, t - s) == 0 for s in range(t))


def cyclic_instance(catalog: OrbitCatalog) -> tuple[ExactCoverInstance, list[int]]:
    """Rows are k-orbits that cover each t-orbit element at most once."""
    rows, kept = [], []
    for i, inc in enumerate(catalog.incidence):
        if all(c == 1 for c in inc.values()):
            kept.append(i)
            rows.append(tuple(sorted(inc)))
    labels = [catalog.k_orbits[i][0] for i in kept]
    return ExactCoverInstance(len(catalog.t_orbits), rows, labels), kept


def construct_cyclic_steiner(t: int, v: int, k: int, budget: SolverBudget = SolverBudget()) -> Design:
    """Search for a Steiner t-(v,k,1) design invariant under the v-cycle."""
    if not steiner_admissible(t, v, k):
        raise AdmissibilityError(f"Steiner {t}-({v},{k},1) fails the divisibility conditions")
    catalog = build_orbit_catalog(t, v, k)
    instance, kept = cyclic_instance(catalog)
    result = solve_exact_cover(instance, budget)
    if result.status == "undecided":
        raise Undecided(
            f"cyclic {t}-({v},{k},1) search exhausted its budget after {result.nodes} nodes"
        )
    if result.status == "infeasible":
        raise AdmissibilityError(f"no cyclic {t}-({v},{k},1) design exists (a non-cyclic one may)")
    blocks = sorted(b for r in result.rows for b in orbit(catalog.k_orbits[kept[r]][0], v))
    design = Design(t, v, k, 1, tuple(blocks))
    if not verify_design(design).is_valid:
        raise VerificationError("cyclic search produced a design that fails verification")
    return design


def base_blocks(design: Design) -> list[Block]:
    """Canonical orbit representatives of a cyclic design."""
    return sorted({canonical_translate(b, design.v) for b in design.blocks})


def is_cyclic(design: Design) -> bool:
    blocks = design.block_set()
    return all(translate(b, 1, design.v) in blocks for b in blocks)
