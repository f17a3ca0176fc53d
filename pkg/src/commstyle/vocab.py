"""Style vocabularies and the mapping of tokens into their event spaces.

Three kinds of vocabulary:

* ``word_only`` — a closed word list plus ``<unk>``;
* ``hyb``       — a word list plus the full tag inventory; out-of-list
  words are replaced by their POS tag;
* ``tag_only``  — the tag inventory alone.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .text import TagSet, Token, UNTAGGED

WORD_ONLY = "word_only"
HYB = "hyb"
TAG_ONLY = "tag_only"
UNK = "<unk>"

WORD_ONLY_CAP = 156_000


@dataclass
class FrequencyTable:
    """Exact surface-form counts for one community (or ALL)."""

    community: str = "ALL"
    counts: Counter = field(default_factory=Counter)
    total_tokens: int = 0

    def add(self, tokens: Iterable[str]) -> None:
        for tok in tokens:
            self.counts[tok] += 1
            self.total_tokens += 1

    def merge(self, other: "FrequencyTable") -> "FrequencyTable":
        merged = FrequencyTable(community=self.community)
        merged.counts = self.counts + other.counts
        merged.total_tokens = self.total_tokens + other.total_tokens
        return merged

    def top(self, k: int) -> list[str]:
        """The k most frequent surfaces; ties broken lexicographically."""
        ranked = sorted(self.counts.items(), key=lambda kv: (-kv[1], kv[0]))
        return [w for w, _ in ranked[:k]]


def count_frequencies(
    sequences: Iterable[Sequence[str]], community: str = "ALL"
) -> FrequencyTable:
    table = FrequencyTable(community=community)
    for seq in sequences:
        table.add(seq)
    return table


class Vocabulary:
    """An ordered word set, optional tag inventory, and optional unk symbol."""

    def __init__(self, kind: str, words: Sequence[str], tags: TagSet | None = None,
                 unk_symbol: str | None = None):
        if kind == WORD_ONLY:
            if tags is not None or unk_symbol is None:
                raise ValueError("word_only vocabularies carry <unk> and no tags")
        elif kind == HYB:
            if tags is None or unk_symbol is not None or not words:
                raise ValueError("hyb vocabularies carry words plus tags, no unk")
        elif kind == TAG_ONLY:
            if tags is None or unk_symbol is not None or words:
                raise ValueError("tag_only vocabularies carry tags alone")
        else:
            raise ValueError(f"unknown vocabulary kind: {kind!r}")
        self.kind = kind
        self.words = tuple(dict.fromkeys(words))
        self.word_set = frozenset(self.words)
        self.tags = tags
        self.unk_symbol = unk_symbol

    def symbols(self) -> tuple[str, ...]:
        """The full event space (words, tags, unk as applicable)."""
        parts: list[str] = list(self.words)
        if self.tags is not None:
            parts.extend(t for t in self.tags if t not in self.word_set)
        if self.unk_symbol is not None:
            parts.append(self.unk_symbol)
        return tuple(parts)

    def __len__(self) -> int:
        return len(self.symbols())


def default_word_only_topk(table: FrequencyTable) -> int:
    """All words seen at least twice, capped at the word_only scale limit."""
    n = sum(1 for c in table.counts.values() if c >= 2)
    return max(1, min(n, WORD_ONLY_CAP))


def build_word_only_vocab(table: FrequencyTable, top_k: int) -> Vocabulary:
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    return Vocabulary(WORD_ONLY, table.top(top_k), unk_symbol=UNK)


def balanced_subset(per_community: Mapping[str, Sequence[Sequence[str]]]) -> list[str]:
    """Equal-size token stream: the first N tokens of each community.

    N is the smallest community's total token count; communities are
    consumed in sorted name order, threads in their given (deterministic)
    order.
    """
    if len(per_community) < 2:
        raise ValueError("balanced subset needs at least two communities")
    totals = {
        name: sum(len(seq) for seq in seqs) for name, seqs in per_community.items()
    }
    for name, total in totals.items():
        if total == 0:
            raise ValueError(f"community {name!r} has no tokens")
    n = min(totals.values())
    stream: list[str] = []
    for name in sorted(per_community):
        taken = 0
        for seq in per_community[name]:
            if taken >= n:
                break
            piece = list(seq[: n - taken])
            stream.extend(piece)
            taken += len(piece)
    return stream


def build_hybrid_vocab(
    balanced_table: FrequencyTable,
    per_community_tables: Mapping[str, FrequencyTable],
    n_general: int,
    n_per_community: int,
    tags: TagSet,
) -> Vocabulary:
    """General top words plus the next most common words of each community.

    The per-community lists are taken after excluding the general set, so
    the result has at most n_general + n_per_community * C words.
    """
    if n_general < 0 or n_per_community < 0:
        raise ValueError("word counts must be nonnegative")
    general = balanced_table.top(n_general)
    general_set = set(general)
    words = list(general)
    seen = set(general_set)
    for name in sorted(per_community_tables):
        table = per_community_tables[name]
        ranked = sorted(table.counts.items(), key=lambda kv: (-kv[1], kv[0]))
        picked = 0
        for word, _ in ranked:
            if picked >= n_per_community:
                break
            if word in general_set:
                continue
            picked += 1
            if word not in seen:
                seen.add(word)
                words.append(word)
    return Vocabulary(HYB, words, tags=tags)


def build_hyb15k_vocab(
    table: FrequencyTable, tags: TagSet, top_k: int = 15_000
) -> Vocabulary:
    return Vocabulary(HYB, table.top(top_k), tags=tags)


def build_tag_only_vocab(tags: TagSet) -> Vocabulary:
    return Vocabulary(TAG_ONLY, (), tags=tags)


def apply_vocab(vocab: Vocabulary, tokens: Sequence[Token]) -> list[str]:
    """Map tagged tokens into the vocabulary's symbol space, length-preserving."""
    out: list[str] = []
    if vocab.kind == WORD_ONLY:
        for tok in tokens:
            out.append(tok.surface if tok.surface in vocab.word_set else vocab.unk_symbol)
        return out
    for tok in tokens:
        if vocab.kind == HYB and tok.surface in vocab.word_set:
            out.append(tok.surface)
            continue
        if tok.tag == UNTAGGED:
            raise ValueError(
                f"{vocab.kind} vocabulary needs tagged input; {tok.surface!r} is untagged"
            )
        if tok.tag not in vocab.tags:
            raise ValueError(f"tag {tok.tag!r} outside the vocabulary's tag inventory")
        out.append(tok.tag)
    return out


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def write_vocab(path: str | Path, vocab: Vocabulary, config_hash: str = "") -> None:
    lines = [
        f"#commstyle-vocab kind={vocab.kind} words={len(vocab.words)} "
        f"tags={len(vocab.tags) if vocab.tags else 0} "
        f"unk={vocab.unk_symbol or ''} "
        f"tagset_sha1={vocab.tags.sha1() if vocab.tags else ''} "
        f"config={config_hash}"
    ]
    lines.append("#words")
    lines.extend(vocab.words)
    lines.append("#tags")
    if vocab.tags:
        lines.extend(vocab.tags.tags)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_vocab(path: str | Path) -> Vocabulary:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    header = lines[0]
    if not header.startswith("#commstyle-vocab "):
        raise ValueError(f"{path} is not a vocabulary file")
    fields = dict(part.split("=", 1) for part in header.split()[1:])
    kind = fields["kind"]
    words: list[str] = []
    tags: list[str] = []
    target = None
    for line in lines[1:]:
        if line == "#words":
            target = words
        elif line == "#tags":
            target = tags
        elif line:
            target.append(line)
    tagset = TagSet(tags) if tags else None
    unk = fields.get("unk") or None
    return Vocabulary(kind, words, tags=tagset, unk_symbol=unk)
