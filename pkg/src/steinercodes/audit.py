"""Exact security audit of authentication codes.

Every probability is a ``Fraction``; bound comparisons are equalities.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Callable

from .authcode import AuthenticationCode
from .designs import Design, atomic_write_text
from .errors import ParameterError, VerificationError
from .ordering import divisibility, equal_column_frequencies


def massey_bound(k: int, v: int, i: int) -> Fraction:
    """Lower bound (k-i)/(v-i) on the deception probability at order i."""
    if not (0 <= i < k <= v):
        raise ParameterError(f"need 0 <= i < k <= v, got i={i}, k={k}, v={v}")
    return Fraction(k - i, v - i)


@dataclass
class Observation:
    messages: tuple[int, ...]
    probability: Fraction
    best_insertion: int
    payoff: Fraction


@dataclass
class DeceptionAssessment:
    order: int
    p_deception: Fraction
    massey_bound: Fraction
    observation_count: int
    observation_total: Fraction
    details: list[Observation] = field(default_factory=list)

    @property
    def tight(self) -> bool:
        return self.p_deception == self.massey_bound


def deception_probability(code: AuthenticationCode, i: int, detail: bool = False) -> DeceptionAssessment:
    """Success probability of the best spoofing attack after observing i messages.

    Brute force over every observable message set; the opponent inserts the
    message most likely to be valid given what it saw.
    """
    k, v = code.k, code.v
    bound = massey_bound(k, v, i)
    weights = code.strategy.weights

    if i == 0:
        mass = [Fraction(0)] * v
        for w, row in zip(weights, code.matrix.rows):
            for m in row:
                mass[m] += w
        best = max(range(v), key=lambda m: (mass[m], -m))
        result = DeceptionAssessment(0, mass[best], bound, 1, Fraction(1))
        if detail:
            result.details.append(Observation((), Fraction(1), best, mass[best]))
    else:
        if not code.sources.defines(i):
            raise ParameterError(f"source distribution does not cover {i}-subsets")
        observed: dict[tuple[int, ...], Fraction] = defaultdict(Fraction)
        joint: dict[tuple[int, ...], dict[int, Fraction]] = defaultdict(lambda: defaultdict(Fraction))
        columns = list(combinations(range(k), i))
        for w, row in zip(weights, code.matrix.rows):
            if not w:
                continue
            for cs in columns:
                p = w * code.sources.prob(cs)
                if not p:
                    continue
                seen = tuple(sorted(row[c] for c in cs))
                observed[seen] += p
                slot = joint[seen]
                for c in range(k):
                    if c not in cs:
                        slot[row[c]] += p
        total = Fraction(0)
        p_dec = Fraction(0)
        details = []
        for seen in sorted(observed):
            p_seen = observed[seen]
            total += p_seen
            slot = joint[seen]
            # messages never valid alongside `seen` have payoff 0 and never win
            best = max(slot, key=lambda m: (slot[m], -m))
            p_dec += slot[best]
            if detail:
                details.append(Observation(seen, p_seen, best, slot[best] / p_seen))
        result = DeceptionAssessment(i, p_dec, bound, len(observed), total, details)

    if result.p_deception < bound:
        raise VerificationError(f"P_d{i} = {result.p_deception} is below the bound {bound}")
    return result


def spoofing_security_level(code: AuthenticationCode, t_design: int) -> int:
    """Largest t_A <= t_design - 1 with P_di tight for every i <= t_A; -1 if P_d0 is not tight."""
    level = -1
    for i in range(min(t_design, code.k)):
        if not deception_probability(code, i).tight:
            break
        level = i
    return level


@dataclass
class SecrecyAssessment:
    level: int
    perfect: bool
    method: str
    first_violation: dict | None = None


def _bayes_violation(code: AuthenticationCode, t_star: int):
    """First (M*, S*) whose posterior differs from the prior, or None."""
    k = code.k
    columns = list(combinations(range(k), t_star))
    sent_as: dict[tuple, dict[tuple, Fraction]] = defaultdict(lambda: defaultdict(Fraction))
    observed: dict[tuple, Fraction] = defaultdict(Fraction)
    for w, row in zip(code.strategy.weights, code.matrix.rows):
        if not w:
            continue
        for cs in columns:
            ms = tuple(sorted(row[c] for c in cs))
            # f_e(M*) is the column set cs itself, since rule e puts M* exactly there
            sent_as[ms][cs] += w
            observed[ms] += w * code.sources.prob(cs)
    for ms in sorted(observed):
        p_obs = observed[ms]
        if not p_obs:
            continue  # conditioning on an impossible observation is undefined
        for cs in columns:
            prior = code.sources.prob(cs)
            posterior = sent_as[ms].get(cs, Fraction(0)) * prior / p_obs
            if posterior != prior:
                return {
                    "t_star": t_star,
                    "messages": list(ms),
                    "sources": list(cs),
                    "posterior": posterior,
                    "prior": prior,
                }
    return None


def _frequency_violation(code: AuthenticationCode, t_star: int):
    found = equal_column_frequencies(code.matrix, t_star)
    if found is None:
        return None
    ms, cs, count, expected = found
    return {
        "t_star": t_star,
        "messages": list(ms),
        "sources": list(cs),
        "count": count,
        "expected": expected,
    }


def perfect_secrecy_check(code: AuthenticationCode, level: int, method: str = "bayes") -> SecrecyAssessment:
    """Perfect t*-fold secrecy for every t* <= level.

    ``bayes`` compares posterior and prior source probabilities exactly for
    every observable message set; with nonzero source probabilities this is
    the weighted frequency identity
    ``sum_{e: f_e(M*)=S*} p_E(e) = sum_{e: M* in M(e)} p_E(e) p_S(f_e(M*))``.
    ``frequency`` needs a uniform strategy and equiprobable sources and
    checks that each message set sits equally often in every column set.
    """
    if not (0 <= level <= code.k):
        raise ParameterError(f"level {level} outside 0..k={code.k}")
    checker: Callable
    if method == "bayes":
        for ts in range(1, level + 1):
            if not code.sources.defines(ts):
                raise ParameterError(f"source distribution does not cover {ts}-subsets")
        checker, name = _bayes_violation, "bayes-exact"
    elif method == "frequency":
        if not code.strategy.is_uniform or not code.sources.equiprobable:
            raise ParameterError("frequency shortcut applies only to uniform rules and equiprobable sources")
        checker, name = _frequency_violation, "frequency-shortcut"
    else:
        raise ParameterError(f"unknown secrecy method {method!r}")
    for ts in range(1, level + 1):
        witness = checker(code, ts)
        if witness is not None:
            return SecrecyAssessment(level, False, name, witness)
    return SecrecyAssessment(level, True, name)


def massey_schobi_bound(k: int, v: int, t: int) -> Fraction:
    return Fraction(comb(v, t), comb(k, t))


def optimality_check(code: AuthenticationCode, t_design: int) -> tuple[bool, Fraction]:
    bound = massey_schobi_bound(code.k, code.v, t_design)
    return code.b == bound, bound


def divisibility_check(design: Design, level: int) -> dict[int, bool]:
    """Whether C(v, t*) divides b, for each 1 <= t* <= level."""
    return divisibility(design.v, design.b, level)


# --------------------------------------------------------------------------
# published parameter tables


def _is_prime_power(q: int) -> bool:
    if q < 2:
        return False
    p = next(d for d in range(2, q + 1) if q % d == 0)
    while q % p == 0:
        q //= p
    return q == 1


def _even_exponent(v: int, series: Callable[[int], int]) -> bool:
    d = 2
    while series(d) < v:
        d += 2
    return series(d) == v


@dataclass(frozen=True)
class TableRow:
    name: str
    t_a: int
    t_s: int
    k: int | None  # None: the row is a family in k = q + 1, q a prime power
    admissible: Callable[[int, int], bool]
    rules: Callable[[int, int], Fraction]


def _pairs(k, v):
    return Fraction(v * (v - 1), k * (k - 1))


def _triples(k, v):
    return Fraction(v * (v - 1) * (v - 2), k * (k - 1) * (k - 2))


FAMILY_ROWS: dict[str, TableRow] = {
    row.name: row
    for row in [
        TableRow(
            "projective", 1, 1, None,
            lambda k, v: _is_prime_power(k - 1)
            and _even_exponent(v, lambda d: ((k - 1) ** (d + 1) - 1) // (k - 2)),
            _pairs,
        ),
        TableRow("k3", 1, 1, 3, lambda k, v: v % 6 == 1, lambda k, v: Fraction(v * (v - 1), 6)),
        TableRow("k4", 1, 1, 4, lambda k, v: v % 12 == 1, lambda k, v: Fraction(v * (v - 1), 12)),
        TableRow("k5", 1, 1, 5, lambda k, v: v % 20 == 1, lambda k, v: Fraction(v * (v - 1), 20)),
        TableRow(
            "inversive", 2, 1, None,
            lambda k, v: _is_prime_power(k - 1) and _even_exponent(v, lambda d: (k - 1) ** d + 1),
            _triples,
        ),
        TableRow(
            "k4-twofold", 2, 1, 4,
            lambda k, v: v % 24 in (2, 10),
            lambda k, v: Fraction(v * (v - 1) * (v - 2), 24),
        ),
    ]
}

# (t_A, t_S, k, v, b) of individually listed optimal codes
LISTED_CODES: list[tuple[int, int, int, int, int]] = [
    (2, 1, 5, 26, 260),
    (3, 1, 5, 11, 66),
    (3, 1, 7, 23, 253),
    (3, 1, 5, 23, 1771),
    (3, 1, 5, 47, 35673),
    (3, 1, 5, 83, 367524),
    (3, 1, 5, 71, 194327),
    (3, 1, 5, 107, 1032122),
    (3, 1, 5, 131, 2343328),
    (3, 1, 5, 167, 6251311),
    (3, 1, 5, 243, 28344492),
    (4, 1, 6, 12, 132),
    (4, 1, 6, 84, 5145336),
    (4, 1, 6, 244, 1152676008),
]


@dataclass
class TableCheck:
    row: str
    k: int
    v: int
    b: int
    expected_b: Fraction
    admissible: bool
    meets_bound: bool

    @property
    def ok(self) -> bool:
        return self.admissible and self.meets_bound and self.b == self.expected_b


def table_regression(row: str, k: int, v: int, b: int) -> TableCheck:
    """Check a (k, v, b) triple against a known family of optimal codes.

    ``row`` is a key of ``FAMILY_ROWS`` (the prime-power rows take
    ``k = q + 1``) or ``"listed"`` for one of the ``LISTED_CODES``.  Every row
    must also meet the Massey-Schobi bound for ``t = t_A + 1`` with equality.
    """
    if row == "listed":
        match = [r for r in LISTED_CODES if (r[2], r[3]) == (k, v)]
        if not match:
            raise ParameterError(f"no listed code with k={k}, v={v}")
        t_a, _, _, _, listed = match[0]
        expected = Fraction(listed)
        admissible = True
    elif row in FAMILY_ROWS:
        entry = FAMILY_ROWS[row]
        if entry.k is not None and k != entry.k:
            raise ParameterError(f"row {row} has k={entry.k}, got {k}")
        t_a = entry.t_a
        admissible = entry.admissible(k, v)
        expected = entry.rules(k, v)
    else:
        raise ParameterError(f"unknown table row {row!r}")
    meets = expected == massey_schobi_bound(k, v, t_a + 1)
    return TableCheck(row, k, v, b, expected, admissible, meets)


# --------------------------------------------------------------------------
# full report


@dataclass
class AuditReport:
    params: dict[str, int]
    spoofing: list[DeceptionAssessment]
    spoofing_security_level: int
    secrecy: SecrecyAssessment
    optimal: bool
    massey_schobi_bound: Fraction
    divisibility: dict[int, bool]

    def to_json(self) -> dict:
        secrecy = {
            "level": self.secrecy.level,
            "perfect": self.secrecy.perfect,
            "method": self.secrecy.method,
        }
        if self.secrecy.first_violation is not None:
            secrecy["witness"] = {
                key: frac_str(val) if isinstance(val, Fraction) else val
                for key, val in self.secrecy.first_violation.items()
            }
        return {
            "params": dict(self.params),
            "spoofing": [
                {
                    "order": a.order,
                    "p_deception": frac_str(a.p_deception),
                    "massey_bound": frac_str(a.massey_bound),
                    "tight": a.tight,
                }
                for a in self.spoofing
            ],
            "spoofing_security_level": self.spoofing_security_level,
            "secrecy": secrecy,
            "optimal": self.optimal,
            "massey_schobi_bound": frac_str(self.massey_schobi_bound),
            "divisibility": {str(ts): ok for ts, ok in self.divisibility.items()},
        }


def frac_str(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_frac(text: str) -> Fraction:
    return Fraction(text)


def audit_code(
    design: Design,
    code: AuthenticationCode,
    max_spoofing_order: int,
    secrecy_level: int,
    method: str = "bayes",
) -> AuditReport:
    if code.matrix.row_sets() != {blk: 1 for blk in design.blocks}:
        raise VerificationError("code rules are not an ordering of the design's blocks")
    top = min(max_spoofing_order, code.k - 1)
    spoofing = [deception_probability(code, i) for i in range(top + 1)]
    level = -1
    for a in spoofing[: design.t]:
        if not a.tight:
            break
        level = a.order
    for a in spoofing:
        if a.order > 0 and a.observation_total != 1:
            raise VerificationError(f"observation probabilities at order {a.order} sum to {a.observation_total}")
    secrecy = perfect_secrecy_check(code, secrecy_level, method)
    optimal, bound = optimality_check(code, design.t)
    return AuditReport(
        params={"t": design.t, "v": design.v, "k": design.k, "lambda": design.lam, "b": design.b},
        spoofing=spoofing,
        spoofing_security_level=level,
        secrecy=secrecy,
        optimal=optimal,
        massey_schobi_bound=bound,
        divisibility=divisibility_check(design, min(secrecy_level, design.t - 1)),
    )


def report_json_text(report: AuditReport) -> str:
    return json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n"


def write_report(report: AuditReport, path) -> None:
    atomic_write_text(path, report_json_text(report))
