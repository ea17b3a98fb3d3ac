"""Ordering design blocks into an encoding matrix with balanced column statistics.

A matrix gives perfect t*-fold secrecy under a uniform encoding strategy when
every t*-subset of messages appears in every t*-subset of columns equally
often, namely ``b / C(v, t*)`` times.
"""

from __future__ import annotations

import io
import math
import os
import random
import time
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations
from math import comb
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .designs import Design, atomic_write_text
from .errors import AdmissibilityError, DesignError, ParameterError, Undecided, VerificationError
from .exactcover import base_blocks, is_cyclic, orbit
from .seeding import derive_seed


@dataclass(frozen=True)
class EncodingMatrix:
    v: int
    k: int
    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(tuple(r) for r in self.rows))
        for idx, row in enumerate(self.rows):
            if len(row) != self.k:
                raise DesignError(f"row {idx} has {len(row)} entries, expected {self.k}")
            if len(set(row)) != self.k:
                raise DesignError(f"row {idx} repeats a message")
            if any(not (0 <= m < self.v) for m in row):
                raise DesignError(f"row {idx} has a message outside [0, {self.v})")

    @property
    def b(self) -> int:
        return len(self.rows)

    @classmethod
    def sorted_rows(cls, design: Design) -> EncodingMatrix:
        """Every block in ascending order; usually not balanced."""
        return cls(design.v, design.k, design.blocks)

    def row_sets(self) -> Counter:
        return Counter(tuple(sorted(r)) for r in self.rows)


@dataclass
class FrequencyTable:
    t_star: int
    counts: dict[tuple[tuple[int, ...], tuple[int, ...]], int]

    def get(self, messages, columns) -> int:
        return self.counts.get((tuple(sorted(messages)), tuple(sorted(columns))), 0)


@dataclass(frozen=True)
class OrderingConfig:
    secrecy_level: int = 1
    seed: int = 0
    time_limit: float = 300.0
    max_restarts: int = 8
    sweeps_per_temperature: int = 1
    cooling: float = 0.95
    strategy: str = "auto"  # "auto", "cyclic" or "anneal"
    search_steps: int = 30_000  # tabu steps per restart of the cyclic search

    def __post_init__(self):
        if self.secrecy_level < 1:
            raise ParameterError("secrecy_level must be at least 1")
        if self.strategy not in ("auto", "cyclic", "anneal"):
            raise ParameterError(f"unknown ordering strategy {self.strategy!r}")


@dataclass
class OrderingVerdict:
    ok: bool
    levels: dict[int, bool] = field(default_factory=dict)
    first_violation: tuple | None = None  # (t*, message subset, column set, count, target)

    def __bool__(self):
        return self.ok


def column_frequencies(matrix: EncodingMatrix, t_star: int) -> FrequencyTable:
    if not (1 <= t_star <= matrix.k):
        raise ParameterError(f"t*={t_star} outside 1..k={matrix.k}")
    counts: Counter = Counter()
    colsets = list(combinations(range(matrix.k), t_star))
    for row in matrix.rows:
        for cs in colsets:
            counts[(tuple(sorted(row[c] for c in cs)), cs)] += 1
    return FrequencyTable(t_star, dict(counts))


def check_rows_match(matrix: EncodingMatrix, design: Design) -> None:
    if matrix.v != design.v or matrix.k != design.k:
        raise VerificationError("matrix and design disagree on v or k")
    if matrix.row_sets() != Counter(design.blocks):
        raise VerificationError("matrix rows are not an ordering of the design's blocks")


def divisibility(v: int, b: int, level: int) -> dict[int, bool]:
    return {ts: b % comb(v, ts) == 0 for ts in range(1, level + 1)}


def equal_column_frequencies(matrix: EncodingMatrix, t_star: int):
    """First message subset whose placements are not equal over all t*-column sets.

    Returns ``None`` when every message subset that occurs at all occurs
    equally often in each set of t* columns.  Otherwise returns
    ``(message subset, column set, count, expected)``.
    """
    table = column_frequencies(matrix, t_star)
    per_subset: dict[tuple[int, ...], dict[tuple[int, ...], int]] = {}
    for (ms, cs), c in table.counts.items():
        per_subset.setdefault(ms, {})[cs] = c
    colsets = list(combinations(range(matrix.k), t_star))
    for ms in sorted(per_subset):
        placed = per_subset[ms]
        total = sum(placed.values())
        for cs in colsets:
            c = placed.get(cs, 0)
            if c * len(colsets) != total:
                return ms, cs, c, Fraction(total, len(colsets))
    return None


def verify_ordering(matrix: EncodingMatrix, design: Design, secrecy_level: int) -> OrderingVerdict:
    check_rows_match(matrix, design)
    verdict = OrderingVerdict(ok=True)
    for ts in range(1, secrecy_level + 1):
        target, rem = divmod(matrix.b, comb(matrix.v, ts))
        level_ok = rem == 0
        table = column_frequencies(matrix, ts)
        expected_cells = comb(matrix.v, ts) * comb(matrix.k, ts)
        if level_ok:
            level_ok = len(table.counts) == expected_cells and all(
                c == target for c in table.counts.values()
            )
        if not level_ok and verdict.first_violation is None:
            for ms in combinations(range(matrix.v), ts):
                for cs in combinations(range(matrix.k), ts):
                    c = table.counts.get((ms, cs), 0)
                    if rem or c != target:
                        verdict.first_violation = (ts, ms, cs, c, matrix.b / comb(matrix.v, ts))
                        break
                if verdict.first_violation:
                    break
        verdict.levels[ts] = level_ok
        verdict.ok &= level_ok
    return verdict


# --------------------------------------------------------------------------
# edge colouring


def edge_color_regular_bipartite(
    edges: Sequence[tuple[int, int]], n_left: int, n_right: int, colors: int
) -> list[int]:
    """Colour the edges of a regular bipartite multigraph with ``colors`` colours.

    Every vertex must have degree exactly ``colors``.  Peels off one perfect
    matching per colour; a regular bipartite graph always has one.
    """
    deg_l = Counter(u for u, _ in edges)
    deg_r = Counter(w for _, w in edges)
    if n_left != n_right or any(deg_l[u] != colors for u in range(n_left)) or any(
        deg_r[w] != colors for w in range(n_right)
    ):
        raise ParameterError(f"graph is not {colors}-regular")
    if len(deg_l) != n_left or len(deg_r) != n_right:
        raise ParameterError("edge endpoints out of range")

    remaining: dict[tuple[int, int], list[int]] = {}
    for idx, e in enumerate(edges):
        remaining.setdefault(e, []).append(idx)
    color = [-1] * len(edges)
    for c in range(colors):
        pairs = sorted(remaining)
        rows = np.fromiter((u for u, _ in pairs), dtype=np.int64, count=len(pairs))
        cols = np.fromiter((w for _, w in pairs), dtype=np.int64, count=len(pairs))
        graph = csr_matrix((np.ones(len(pairs)), (rows, cols)), shape=(n_left, n_right))
        match = maximum_bipartite_matching(graph, perm_type="column")
        if (match < 0).any():
            raise VerificationError("regular bipartite graph without a perfect matching")
        for u, w in enumerate(match.tolist()):
            idx = remaining[(u, w)].pop()
            if not remaining[(u, w)]:
                del remaining[(u, w)]
            color[idx] = c
    return color


def order_design_onefold(design: Design, seed: int = 0) -> EncodingMatrix:
    """Balance single messages over columns via an edge colouring of the split incidence graph.

    Each point of degree r is split into r/k copies of degree k; copies are
    dealt round-robin over the point's blocks in canonical order.
    """
    v, k, b = design.v, design.k, design.b
    if b % v:
        raise AdmissibilityError(f"{v} does not divide {b}: the number of points must divide b")
    blocks = sorted(design.blocks)
    # seed only permutes block labels before colouring; output stays canonical per seed
    rng = random.Random(derive_seed(seed, "ordering.onefold"))
    relabel = list(range(b))
    rng.shuffle(relabel)

    copies_per_point = b // v
    incident: dict[int, int] = Counter()
    edges = []
    for bi, block in enumerate(blocks):
        for x in block:
            copy = incident[x] % copies_per_point
            incident[x] += 1
            edges.append((relabel[bi], x * copies_per_point + copy))
    color = edge_color_regular_bipartite(edges, b, v * copies_per_point, k)
    rows = [[-1] * k for _ in range(b)]
    for (bi, x), c in zip(((bi, x) for bi, blk in enumerate(blocks) for x in blk), color):
        rows[bi][c] = x
    matrix = EncodingMatrix(v, k, tuple(tuple(r) for r in rows))
    if not verify_ordering(matrix, design, 1):
        raise VerificationError("edge colouring produced an unbalanced ordering")
    return matrix


# --------------------------------------------------------------------------
# multi-fold search


class _Annealer:
    """Incremental frequency-deviation energy over per-block permutations."""

    def __init__(self, design: Design, rows: list[list[int]], level: int):
        self.v, self.k, self.b = design.v, design.k, design.b
        self.level = level
        self.rows = rows
        k = self.k
        self.targets = [0] + [self.b // comb(self.v, ts) for ts in range(1, level + 1)]
        self.colset_index = [
            {cs: i for i, cs in enumerate(combinations(range(k), ts))} for ts in range(level + 1)
        ]
        self.counts: list[Counter] = [Counter() for _ in range(level + 1)]
        for row in rows:
            self._add_row(row, +1)
        # moves[(p, q)] lists, per t*, (other positions, colset with p, colset with q)
        self.moves = {}
        for p, q in combinations(range(k), 2):
            per_level = []
            others = [i for i in range(k) if i not in (p, q)]
            for ts in range(1, level + 1):
                entries = []
                for rest in combinations(others, ts - 1):
                    cp = self.colset_index[ts][tuple(sorted(rest + (p,)))]
                    cq = self.colset_index[ts][tuple(sorted(rest + (q,)))]
                    entries.append((rest, cp, cq))
                per_level.append(entries)
            self.moves[(p, q)] = per_level
        self.energy = self.full_energy()

    def _add_row(self, row, sign):
        for ts in range(1, self.level + 1):
            index = self.colset_index[ts]
            for cs, ci in index.items():
                key = (tuple(sorted(row[c] for c in cs)), ci)
                self.counts[ts][key] += sign

    def full_energy(self) -> int:
        total = 0
        for ts in range(1, self.level + 1):
            target = self.targets[ts]
            cells = comb(self.v, ts) * comb(self.k, ts)
            present = [c for c in self.counts[ts].values()]
            total += sum((c - target) ** 2 for c in present)
            total += (cells - sum(1 for _ in present)) * target * target
        return total

    def delta(self, bi: int, p: int, q: int):
        """Energy change of swapping positions p and q of block bi, plus the count updates."""
        row = self.rows[bi]
        x, y = row[p], row[q]
        d = 0
        updates = []
        for ts_minus_1, entries in enumerate(self.moves[(p, q)]):
            ts = ts_minus_1 + 1
            counts, target = self.counts[ts], self.targets[ts]
            for rest, cp, cq in entries:
                others = tuple(row[i] for i in rest)
                sx = tuple(sorted(others + (x,)))
                sy = tuple(sorted(others + (y,)))
                # x leaves colset cp for cq, y leaves cq for cp
                for key, step in (((sx, cp), -1), ((sx, cq), +1), ((sy, cq), -1), ((sy, cp), +1)):
                    c = counts[key] - target
                    d += 2 * c * step + 1
                    updates.append((ts, key, step))
        return d, updates

    def apply(self, bi, p, q, d, updates):
        for ts, key, step in updates:
            self.counts[ts][key] += step
        row = self.rows[bi]
        row[p], row[q] = row[q], row[p]
        self.energy += d


def energy_of(matrix: EncodingMatrix, design: Design, level: int) -> int:
    """Sum of squared deviations of all frequency counts from their targets, up to ``level``."""
    return _Annealer(design, [list(r) for r in matrix.rows], level).energy


def _anneal(design, start_rows, level, rng, deadline, cooling, sweeps):
    state = _Annealer(design, [list(r) for r in start_rows], level)
    b, k = state.b, state.k
    pairs = list(combinations(range(k), 2))

    # warm-up: choose T0 so that about half of the uphill moves are accepted
    uphill = []
    for _ in range(2000):
        bi = rng.randrange(b)
        p, q = pairs[rng.randrange(len(pairs))]
        d, _ = state.delta(bi, p, q)
        if d > 0:
            uphill.append(d)
    temp = (sum(uphill) / len(uphill)) / math.log(2) if uphill else 1.0
    moves_per_temp = max(1, sweeps) * b * len(pairs)
    floor = 0.05
    best = state.energy
    stale = 0

    while state.energy > 0:
        if time.monotonic() > deadline:
            return None
        for _ in range(moves_per_temp):
            bi = rng.randrange(b)
            p, q = pairs[rng.randrange(len(pairs))]
            d, updates = state.delta(bi, p, q)
            if d <= 0 or rng.random() < math.exp(-d / temp):
                state.apply(bi, p, q, d, updates)
                if state.energy == 0:
                    break
        if state.energy < best:
            best, stale = state.energy, 0
        else:
            stale += 1
        if temp > floor:
            temp *= cooling
        elif stale > 200:
            return None  # frozen without progress; caller restarts
    return state.rows


def pairing_involution(k: int) -> tuple[int, ...]:
    """The column permutation (0 1)(2 3)...; the last column is fixed when k is odd."""
    return tuple(c ^ 1 if c ^ 1 < k else c for c in range(k))


class _TwistedCyclicModel:
    """Orderings of a cyclic design that commute with translation up to a column twist.

    Translating an ordered block by +1 must give the ordered translate with its
    columns permuted by ``sigma``.  One ordering per base block then fixes the
    whole matrix, and because every subset of points has a translate through
    point 0, balance only needs checking on subsets that contain 0.
    """

    def __init__(self, design: Design, level: int, sigma: tuple[int, ...]):
        v, k = design.v, design.k
        self.v, self.k, self.sigma = v, k, sigma
        powers = [tuple(range(k))]
        for _ in range(v):
            powers.append(tuple(sigma[c] for c in powers[-1]))
        if powers[v] != powers[0]:
            raise ParameterError("the column twist must have order dividing v")
        self.powers = powers

        # One cell per orbit of (point subset, column set) under the twisted action.
        # When k >= 2*level - 1, balance at the top level already forces balance
        # below it (the inclusion matrix of (L-1)- versus L-subsets of the
        # columns has full rank), and the redundant cells only slow the search.
        self.levels = [level] if 2 * level - 1 <= k else list(range(1, level + 1))
        cell_index: dict[tuple[tuple[int, ...], tuple[int, ...]], int] = {}
        targets: list[int] = []
        for ts in self.levels:
            for rest in combinations(range(1, v), ts - 1):
                pts = (0,) + rest
                for cs in combinations(range(k), ts):
                    canon = self._canonical_cell(pts, cs)
                    if canon not in cell_index:
                        cell_index[canon] = len(targets)
                        targets.append(design.b // comb(v, ts))
        self.targets = np.array(targets, dtype=np.int64)
        colsets = [list(combinations(range(k), ts)) for ts in range(level + 1)]

        self.bases = base_blocks(design)
        self.options: list[list[tuple[int, ...]]] = []
        vectors = []
        for base in self.bases:
            length = len(orbit(base, v))
            opts, vecs = [], []
            for row in permutations(base):
                rows = self.expand(row, length)
                if rows is None:
                    continue
                vec = np.zeros(len(targets), dtype=np.int64)
                for r in rows:
                    if 0 not in r:
                        continue
                    for ts in self.levels:
                        for cs in colsets[ts]:
                            pts = tuple(sorted(r[c] for c in cs))
                            if pts[0] == 0:
                                canon = self._canonical_cell(pts, cs)
                                if canon == (pts, cs):
                                    vec[cell_index[canon]] += 1
                opts.append(row)
                vecs.append(vec)
            if not opts:
                raise Undecided(f"base block {base} has no ordering compatible with the twist")
            self.options.append(opts)
            vectors.append(vecs)
        width = max(len(o) for o in self.options)
        self.vectors = np.zeros((len(self.bases), width, len(targets)), dtype=np.int64)
        self.allowed = np.zeros((len(self.bases), width), dtype=bool)
        for i, vecs in enumerate(vectors):
            self.vectors[i, : len(vecs)] = vecs
            self.allowed[i, : len(vecs)] = True

    def _canonical_cell(self, pts, cs):
        """Smallest translate of the cell that still contains point 0."""
        v = self.v
        best = None
        for x in pts:
            p = self.powers[(-x) % v]
            cand = (tuple(sorted((y - x) % v for y in pts)), tuple(sorted(p[c] for c in cs)))
            if best is None or cand < best:
                best = cand
        return best

    def expand(self, row: tuple[int, ...], length: int):
        """Ordered translates of ``row`` over its orbit, or None if the orbit does not close up."""
        v, k = self.v, self.k
        out = []
        for s in range(length + 1):
            shifted = [0] * k
            for c, x in enumerate(row):
                shifted[self.powers[s][c]] = (x + s) % v
            out.append(tuple(shifted))
        if out.pop() != tuple(row):
            return None
        return out

    def matrix(self, choice) -> EncodingMatrix:
        rows = []
        for base, opts, j in zip(self.bases, self.options, choice):
            rows.extend(self.expand(opts[j], len(orbit(base, self.v))))
        rows.sort(key=lambda r: tuple(sorted(r)))
        return EncodingMatrix(self.v, self.k, tuple(rows))


def _tabu_search(model: _TwistedCyclicModel, rng: np.random.Generator, steps: int, deadline: float):
    """Min-conflict tabu walk over one ordering per base block; returns the choice or None."""
    nb = len(model.bases)
    rows = np.arange(nb)
    choice = np.array([rng.integers(n) for n in model.allowed.sum(axis=1)])
    vectors = model.vectors.astype(float)
    targets = model.targets.astype(float)
    norms = (vectors**2).sum(axis=2)
    norms[~model.allowed] = np.inf
    dev = vectors[rows, choice].sum(axis=0) - targets
    tabu_until = np.zeros(nb, dtype=np.int64)
    best = np.inf
    for step in range(steps):
        if not dev.any():
            return choice
        if step % 256 == 0 and time.monotonic() > deadline:
            return None
        # energy after replacing block i's ordering by option j, for all (i, j) at once
        without = dev - vectors[rows, choice]
        trial = (without**2).sum(axis=1)[:, None] + 2 * np.einsum("ic,ijc->ij", without, vectors) + norms
        trial[rows, choice] = np.inf
        frozen = tabu_until > step
        # aspiration: a tabu block may still move if it beats the best energy seen
        trial[frozen] = np.where(trial[frozen] < best, trial[frozen], np.inf)
        low = trial.min()
        if not np.isfinite(low):
            tabu_until[:] = 0
            continue
        ties = np.argwhere(trial == low)
        i, j = ties[rng.integers(len(ties))]
        dev = without[i] + vectors[i, j]
        choice[i] = j
        tabu_until[i] = step + rng.integers(3, 8)
        best = min(best, low)
    return None if dev.any() else choice


def order_cyclic_twisted(design: Design, config: OrderingConfig, deadline: float | None = None) -> EncodingMatrix | None:
    """Search for a balanced ordering of a cyclic design that is equivariant up to a column twist.

    The twist is the pairing involution when both v and k are even, so that
    short block orbits can be ordered consistently, and the identity otherwise.
    Returns None when the seeded restarts all run out of steps.
    """
    if not is_cyclic(design):
        raise ParameterError("the twisted search needs a design closed under x -> x+1")
    level = config.secrecy_level
    if deadline is None:
        deadline = time.monotonic() + config.time_limit
    k = design.k
    sigma = pairing_involution(k) if design.v % 2 == 0 and k % 2 == 0 else tuple(range(k))
    model = _TwistedCyclicModel(design, level, sigma)
    for restart in range(config.max_restarts):
        rng = np.random.default_rng(derive_seed(config.seed, "ordering.cyclic", restart))
        choice = _tabu_search(model, rng, config.search_steps, deadline)
        if choice is not None:
            matrix = model.matrix(choice)
            if not verify_ordering(matrix, design, level):
                raise VerificationError("twisted search balanced the point-0 cells but not the matrix")
            return matrix
        if time.monotonic() > deadline:
            break
    return None


def order_design_multifold(design: Design, config: OrderingConfig = OrderingConfig()) -> EncodingMatrix:
    """Ordering balanced at every t* <= secrecy_level simultaneously.

    Level 1 is a direct edge-colouring construction.  For higher levels a
    cyclic design first gets the twisted-equivariant tabu search (strategy
    "auto" or "cyclic"); strategy "auto" then falls back to a seeded annealing
    search from the level-1 ordering.  Every result passes the exact verifier.
    """
    level = config.secrecy_level
    if level > design.t - 1:
        raise ParameterError(f"secrecy level {level} exceeds t-1 = {design.t - 1}")
    for ts, ok in divisibility(design.v, design.b, level).items():
        if not ok:
            raise AdmissibilityError(
                f"{comb(design.v, ts)} does not divide {design.b}: C({design.v},{ts}) must divide b (t* = {ts})"
            )
    start = order_design_onefold(design, config.seed)
    if level == 1:
        return start
    deadline = time.monotonic() + config.time_limit
    if config.strategy in ("auto", "cyclic") and is_cyclic(design):
        found = order_cyclic_twisted(design, config, deadline)
        if found is not None:
            return found
    if config.strategy in ("auto", "anneal"):
        for restart in range(config.max_restarts):
            if time.monotonic() > deadline:
                break
            rng = random.Random(derive_seed(config.seed, "ordering.anneal", restart))
            rows = _anneal(design, start.rows, level, rng, deadline, config.cooling, config.sweeps_per_temperature)
            if rows is not None:
                matrix = EncodingMatrix(design.v, design.k, tuple(tuple(r) for r in rows))
                if not verify_ordering(matrix, design, level):
                    raise VerificationError("annealing reached zero energy but verification failed")
                return matrix
    raise Undecided(
        f"no level-{level} ordering found ({config.max_restarts} restarts per method,"
        f" time limit {config.time_limit:.0f} s, strategy {config.strategy})"
    )


# --------------------------------------------------------------------------
# text format


def format_matrix(matrix: EncodingMatrix, comments: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    buf.write(f"{matrix.v} {matrix.k} {matrix.b}\n")
    for row in matrix.rows:
        buf.write(" ".join(map(str, row)) + "\n")
    return buf.getvalue()


def parse_matrix(text: str) -> EncodingMatrix:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise DesignError("empty matrix file")
    try:
        v, k, b = (int(x) for x in lines[0].split())
        rows = [tuple(int(x) for x in ln.split()) for ln in lines[1:]]
    except ValueError as exc:
        raise DesignError(f"malformed matrix file: {exc}") from exc
    if len(rows) != b:
        raise DesignError(f"header announces {b} rows, file has {len(rows)}")
    return EncodingMatrix(v, k, tuple(rows))


def write_matrix(matrix: EncodingMatrix, path: str | os.PathLike, comments: Sequence[str] = ()) -> None:
    atomic_write_text(path, format_matrix(matrix, comments))


def read_matrix(path: str | os.PathLike) -> EncodingMatrix:
    return parse_matrix(Path(path).read_text())
