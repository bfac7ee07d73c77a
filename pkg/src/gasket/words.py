"""Multi-indices over the alphabet ``1..m``.

A word is a tuple of symbols; the empty tuple is the root.  Words name
matrix products left to right: ``(i1, ..., ik)`` stands for
``A_i1 @ ... @ A_ik``.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

Word = tuple[int, ...]


class Kind(enum.Enum):
    DIAGONAL = "diagonal"
    NEXT_TO_DIAGONAL = "next-to-diagonal"
    OTHER = "other"


@dataclass(frozen=True)
class JBlock:
    """The word ``head, tail, tail, ...`` of total ``length``."""

    head: int
    tail: int
    length: int

    def __post_init__(self):
        if self.head == self.tail:
            raise ValueError("head and tail must differ")
        if self.length < 2:
            raise ValueError("a block has length >= 2")

    def word(self) -> Word:
        return (self.head,) + (self.tail,) * (self.length - 1)


@dataclass(frozen=True)
class Factorization:
    prefix_symbol: int | None
    prefix_length: int
    blocks: tuple[JBlock, ...]

    def word(self) -> Word:
        out: list[int] = []
        if self.prefix_length:
            out.extend([self.prefix_symbol] * self.prefix_length)
        for b in self.blocks:
            out.extend(b.word())
        return tuple(out)


def as_word(w: Sequence[int] | str) -> Word:
    """Accept ``"32221"`` or any integer sequence."""
    if isinstance(w, str):
        return tuple(int(c) for c in w if not c.isspace())
    return tuple(int(c) for c in w)


def classify(w: Sequence[int]) -> Kind:
    w = as_word(w)
    if len(set(w)) <= 1:
        return Kind.DIAGONAL
    if len(w) >= 2 and w[0] != w[1] and len(set(w[1:])) == 1:
        return Kind.NEXT_TO_DIAGONAL
    return Kind.OTHER


def j_factorize(w: Sequence[int]) -> Factorization:
    """Peel constant runs from the right, each closed by the symbol before it."""
    w = list(as_word(w))
    blocks: list[JBlock] = []
    end = len(w)
    while end > 0:
        start = end - 1
        while start > 0 and w[start - 1] == w[end - 1]:
            start -= 1
        if start == 0:
            break
        blocks.append(JBlock(w[start - 1], w[end - 1], end - start + 1))
        end = start - 1
    blocks.reverse()
    if end == 0:
        return Factorization(None, 0, tuple(blocks))
    return Factorization(w[0], end, tuple(blocks))


def level(m: int, k: int) -> Iterator[Word]:
    """All ``m**k`` words of length ``k`` in lexicographic order."""
    if m < 1 or k < 0:
        raise ValueError("need m >= 1 and k >= 0")
    return itertools.product(range(1, m + 1), repeat=k)


def words_upto(m: int, k: int) -> Iterator[Word]:
    for j in range(k + 1):
        yield from level(m, j)


def next_to_diagonal(m: int, max_len: int) -> Iterator[Word]:
    """Words ``h t^(l-1)`` with ``h != t`` and ``2 <= l <= max_len``."""
    for length in range(2, max_len + 1):
        for h in range(1, m + 1):
            for t in range(1, m + 1):
                if h != t:
                    yield (h,) + (t,) * (length - 1)


def with_block_prefix(m: int, max_len: int) -> Iterator[Word]:
    """Words of length ``<= max_len`` that start with a next-to-diagonal block.

    These are exactly the words whose first two symbols differ.
    """
    for length in range(2, max_len + 1):
        for w in level(m, length):
            if w[0] != w[1]:
                yield w


def to_str(w: Sequence[int]) -> str:
    return "".join(str(c) for c in w) if len(w) else "0"
