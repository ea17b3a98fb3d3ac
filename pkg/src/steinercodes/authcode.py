"""Authentication codes: encoding rules, messages, source states and their distributions.

Rule ``e`` is row ``e`` of an encoding matrix; it sends source state ``s`` to
the message in column ``s``.  All probabilities are exact ``Fraction`` values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Iterable, Mapping

from .errors import NotAuthentic, ParameterError
from .ordering import EncodingMatrix


@dataclass(frozen=True)
class SourceDistribution:
    """Probabilities of unordered sets of distinct source states.

    With ``explicit=None`` every i-subset has probability ``1/C(k, i)``.
    Otherwise ``explicit[i]`` maps each i-subset (sorted tuple) to its
    probability; unlisted subsets have probability zero.
    """

    k: int
    explicit: Mapping[int, Mapping[tuple[int, ...], Fraction]] | None = None

    def __post_init__(self):
        if self.explicit is None:
            return
        for size, table in self.explicit.items():
            total = sum(table.values(), Fraction(0))
            if total != 1:
                raise ParameterError(f"{size}-subset probabilities sum to {total}, not 1")
            for subset, p in table.items():
                if len(subset) != size or p < 0 or any(not (0 <= s < self.k) for s in subset):
                    raise ParameterError(f"bad entry {subset}: {p}")

    @property
    def equiprobable(self) -> bool:
        return self.explicit is None

    def prob(self, sources: Iterable[int]) -> Fraction:
        key = tuple(sorted(sources))
        if self.explicit is None:
            return Fraction(1, comb(self.k, len(key)))
        if len(key) not in self.explicit:
            raise ParameterError(f"no distribution given for {len(key)}-subsets")
        return Fraction(self.explicit[len(key)].get(key, 0))

    def defines(self, size: int) -> bool:
        return self.explicit is None or size in self.explicit


@dataclass(frozen=True)
class EncodingStrategy:
    weights: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(Fraction(w) for w in self.weights))
        if any(w < 0 for w in self.weights):
            raise ParameterError("negative rule weight")
        if sum(self.weights, Fraction(0)) != 1:
            raise ParameterError("rule weights must sum to exactly 1")

    @property
    def b(self) -> int:
        return len(self.weights)

    @classmethod
    def uniform(cls, b: int) -> EncodingStrategy:
        return cls((Fraction(1, b),) * b)

    @property
    def is_uniform(self) -> bool:
        return len(set(self.weights)) <= 1


@dataclass(frozen=True)
class AuthenticationCode:
    matrix: EncodingMatrix
    strategy: EncodingStrategy
    sources: SourceDistribution
    _decode: tuple[dict[int, int], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.matrix.b != self.strategy.b:
            raise ParameterError(f"{self.matrix.b} rules but {self.strategy.b} weights")
        if self.matrix.k != self.sources.k:
            raise ParameterError(f"{self.matrix.k} columns but {self.sources.k} source states")
        object.__setattr__(
            self, "_decode", tuple({m: s for s, m in enumerate(row)} for row in self.matrix.rows)
        )

    @property
    def k(self) -> int:
        return self.matrix.k

    @property
    def v(self) -> int:
        return self.matrix.v

    @property
    def b(self) -> int:
        return self.matrix.b

    def _rule(self, rule: int) -> tuple[int, ...]:
        if not (0 <= rule < self.b):
            raise ParameterError(f"rule {rule} outside 0..{self.b - 1}")
        return self.matrix.rows[rule]

    def encode(self, rule: int, source: int) -> int:
        row = self._rule(rule)
        if not (0 <= source < self.k):
            raise ParameterError(f"source {source} outside 0..{self.k - 1}")
        return row[source]

    def decode(self, rule: int, message: int) -> int:
        self._rule(rule)
        try:
            return self._decode[rule][message]
        except KeyError:
            raise NotAuthentic(f"message {message} is not valid under rule {rule}") from None

    def valid_messages(self, rule: int) -> frozenset[int]:
        return frozenset(self._rule(rule))

    def source_preimage(self, rule: int, messages: Iterable[int]) -> frozenset[int]:
        self._rule(rule)
        table = self._decode[rule]
        return frozenset(table[m] for m in messages if m in table)


def from_matrix_equiprobable(matrix: EncodingMatrix) -> AuthenticationCode:
    return AuthenticationCode(matrix, EncodingStrategy.uniform(matrix.b), SourceDistribution(matrix.k))


def explicit_uniform_sources(k: int, sizes: Iterable[int]) -> SourceDistribution:
    """The equiprobable model written out subset by subset."""
    return SourceDistribution(
        k,
        {
            i: {s: Fraction(1, comb(k, i)) for s in combinations(range(k), i)}
            for i in sizes
        },
    )
