"""Combinatorial t-designs: construction, verification and the design text format.

Points are the integers ``0..v-1`` and every block is a strictly increasing
tuple.  A design is *canonical* when its blocks are in lexicographic order.
"""

from __future__ import annotations

import io
import os
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from pathlib import Path
from typing import Iterable, Sequence

from .errors import AdmissibilityError, DesignError, ParameterError

Block = tuple[int, ...]


@dataclass(frozen=True)
class Design:
    """A t-(v, k, lambda) block design."""

    t: int
    v: int
    k: int
    lam: int
    blocks: tuple[Block, ...]

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(tuple(b) for b in self.blocks))
        check_structure(self)

    @property
    def b(self) -> int:
        return len(self.blocks)

    def canonical(self) -> Design:
        return Design(self.t, self.v, self.k, self.lam, tuple(sorted(self.blocks)))

    def block_set(self) -> frozenset[Block]:
        return frozenset(self.blocks)


@dataclass
class DesignReport:
    is_valid: bool
    violations: list[tuple[Block, int]] = field(default_factory=list)
    lambda_profile: list[int] = field(default_factory=list)
    identity_checks: dict[str, bool] = field(default_factory=dict)


def check_structure(design: Design) -> None:
    """Raise DesignError on the first malformed block."""
    t, v, k = design.t, design.v, design.k
    if not (1 <= t <= k <= v):
        raise DesignError(f"need 1 <= t <= k <= v, got t={t}, k={k}, v={v}")
    if design.lam < 1:
        raise DesignError(f"lambda must be positive, got {design.lam}")
    seen: dict[Block, int] = {}
    for idx, block in enumerate(design.blocks):
        if len(block) != k:
            raise DesignError(f"block {idx} has {len(block)} points, expected {k}")
        if any(not (0 <= p < v) for p in block):
            raise DesignError(f"block {idx} has a point outside [0, {v})")
        if any(block[j] >= block[j + 1] for j in range(k - 1)):
            raise DesignError(f"block {idx} is not strictly increasing: {block}")
        if block in seen:
            raise DesignError(f"block {idx} repeats block {seen[block]}: {block}")
        seen[block] = idx


def subset_counts(blocks: Iterable[Block], s: int) -> Counter:
    """Count blocks through each s-subset by one incremental pass over blocks."""
    counts: Counter = Counter()
    for block in blocks:
        counts.update(combinations(block, s))
    return counts


def lambda_s(design: Design, s: int) -> int:
    """Number of blocks through any s points, ``lam * C(v-s, t-s) / C(k-s, t-s)``."""
    if not (0 <= s <= design.t):
        raise ParameterError(f"s={s} outside 0..t={design.t}")
    num = design.lam * comb(design.v - s, design.t - s)
    den = comb(design.k - s, design.t - s)
    if num % den:
        raise ParameterError(f"lambda_{s} = {num}/{den} is not an integer")
    return num // den


def verify_design(candidate: Design) -> DesignReport:
    check_structure(candidate)
    t, v, k, lam = candidate.t, candidate.v, candidate.k, candidate.lam
    counts = subset_counts(candidate.blocks, t)
    violations = []
    # Subsets absent from counts have multiplicity 0; only enumerate them on failure.
    if len(counts) != comb(v, t) or any(c != lam for c in counts.values()):
        for subset in combinations(range(v), t):
            c = counts.get(subset, 0)
            if c != lam:
                violations.append((subset, c))
    report = DesignReport(is_valid=not violations, violations=violations)
    if report.is_valid:
        report.lambda_profile = [lambda_s(candidate, s) for s in range(t + 1)]
        b, r = candidate.b, report.lambda_profile[1]
        checks = {
            "bk=vr": b * k == v * r,
            "C(v,t)lam=bC(k,t)": comb(v, t) * lam == b * comb(k, t),
        }
        if t >= 2:
            checks["r(k-1)=lam2(v-1)"] = r * (k - 1) == report.lambda_profile[2] * (v - 1)
        report.identity_checks = checks
    return report


def _require_valid(design: Design) -> Design:
    report = verify_design(design)
    if not report.is_valid:
        raise DesignError(f"construction produced an invalid design: {report.violations[:3]}")
    return design


# --------------------------------------------------------------------------
# Steiner triple systems


def _bose_blocks(v: int) -> list[Block]:
    n = (v - 3) // 6
    q = 2 * n + 1
    half = n + 1  # inverse of 2 mod q

    def pt(x, i):
        return 3 * x + i

    blocks = [(pt(x, 0), pt(x, 1), pt(x, 2)) for x in range(q)]
    for x, y in combinations(range(q), 2):
        z = ((x + y) * half) % q
        for i in range(3):
            blocks.append((pt(x, i), pt(y, i), pt(z, (i + 1) % 3)))
    return blocks


def _skolem_blocks(v: int) -> list[Block]:
    n = (v - 1) // 6
    q = 2 * n
    inf = v - 1

    def op(x, y):
        s = (x + y) % q
        return s // 2 if s % 2 == 0 else (s + q - 1) // 2

    def pt(x, i):
        return 3 * x + i

    blocks = [(pt(x, 0), pt(x, 1), pt(x, 2)) for x in range(n)]
    for x in range(n):
        for i in range(3):
            blocks.append((inf, pt(x + n, i), pt(x, (i + 1) % 3)))
    for x, y in combinations(range(q), 2):
        z = op(x, y)
        for i in range(3):
            blocks.append((pt(x, i), pt(y, i), pt(z, (i + 1) % 3)))
    return blocks


def construct_sts(v: int) -> Design:
    """Steiner triple system of order v (Bose for v = 3 mod 6, Skolem for v = 1 mod 6)."""
    if v < 7 or v % 6 not in (1, 3):
        raise AdmissibilityError(
            f"STS({v}) needs v = 1 or 3 (mod 6) and v >= 7; {v} mod 6 = {v % 6}"
        )
    raw = _bose_blocks(v) if v % 6 == 3 else _skolem_blocks(v)
    blocks = sorted(tuple(sorted(b)) for b in raw)
    return _require_valid(Design(2, v, 3, 1, tuple(blocks)))


# --------------------------------------------------------------------------
# Steiner quadruple systems


def construct_boolean_sqs(d: int) -> Design:
    """SQS(2^d) of all zero-sum 4-subsets of the binary vector space of dimension d.

    Point ``p`` is the vector whose coordinates are the binary digits of ``p``,
    so vector addition is XOR.
    """
    if d < 3:
        raise ParameterError(f"boolean SQS needs d >= 3, got {d}")
    v = 1 << d
    blocks = []
    # a < b < c determine the fourth point a^b^c; keep it only if it is the largest.
    for a, b, c in combinations(range(v), 3):
        x = a ^ b ^ c
        if x > c:
            blocks.append((a, b, c, x))
    blocks.sort()
    return _require_valid(Design(3, v, 4, 1, tuple(blocks)))


def classify_cube_block(block: Block) -> str:
    """Type of a block of the boolean SQS(8): 'face', 'opposite-edges' or 'tetrahedron'."""
    if len(block) != 4 or any(not (0 <= p < 8) for p in block):
        raise ParameterError("cube classification applies to blocks of SQS(8) only")
    for bit in (1, 2, 4):
        if len({p & bit for p in block}) == 1:
            return "face"
    parities = {bin(p).count("1") % 2 for p in block}
    if len(parities) == 1:
        return "tetrahedron"
    return "opposite-edges"


def cube_census(design: Design) -> dict[str, int]:
    census = {"face": 0, "opposite-edges": 0, "tetrahedron": 0}
    for block in design.blocks:
        census[classify_cube_block(block)] += 1
    return census


def one_factorization(v: int) -> list[list[tuple[int, int]]]:
    """Round-robin 1-factorization of K_v: v-1 perfect matchings."""
    if v < 2 or v % 2:
        raise ParameterError(f"1-factorization needs an even v >= 2, got {v}")
    m = v - 1
    factors = []
    for i in range(m):
        edges = [tuple(sorted((i, v - 1)))]
        for j in range(1, v // 2):
            edges.append(tuple(sorted(((i + j) % m, (i - j) % m))))
        factors.append(sorted(edges))
    return factors


def double_sqs(base: Design) -> Design:
    """SQS(2v) from SQS(v): two copies plus crossing blocks along a 1-factorization."""
    if (base.t, base.k, base.lam) != (3, 4, 1):
        raise ParameterError(
            f"doubling needs a 3-(v,4,1) design, got {base.t}-({base.v},{base.k},{base.lam})"
        )
    if not verify_design(base).is_valid:
        raise ParameterError("doubling input is not a valid Steiner quadruple system")
    v = base.v
    blocks = list(base.blocks)
    blocks += [tuple(p + v for p in blk) for blk in base.blocks]
    for factor in one_factorization(v):
        for a, b in factor:
            for c, d in factor:
                blocks.append((a, b, c + v, d + v))
    blocks.sort()
    return _require_valid(Design(3, 2 * v, 4, 1, tuple(blocks)))


# --------------------------------------------------------------------------
# text format


def format_design(design: Design, comments: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    buf.write(f"{design.t} {design.v} {design.k} {design.lam} {design.b}\n")
    for block in sorted(design.blocks):
        buf.write(" ".join(map(str, block)) + "\n")
    return buf.getvalue()


def parse_design(text: str) -> Design:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise DesignError("empty design file")
    try:
        header = [int(x) for x in lines[0].split()]
    except ValueError as exc:
        raise DesignError(f"bad header line: {lines[0]!r}") from exc
    if len(header) != 5:
        raise DesignError("header must be 't v k lambda b'")
    t, v, k, lam, b = header
    body = lines[1:]
    if len(body) != b:
        raise DesignError(f"header announces {b} blocks, file has {len(body)}")
    blocks = []
    for idx, line in enumerate(body):
        try:
            blocks.append(tuple(int(x) for x in line.split()))
        except ValueError as exc:
            raise DesignError(f"block {idx}: non-integer entry") from exc
    return Design(t, v, k, lam, tuple(blocks))


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(f".{path.name}.tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def write_design(design: Design, path: str | os.PathLike, comments: Sequence[str] = ()) -> None:
    atomic_write_text(path, format_design(design, comments))


def read_design(path: str | os.PathLike) -> Design:
    return parse_design(Path(path).read_text())
