"""Trigram language models with modified Kneser-Ney or Witten-Bell smoothing.

Every sequence is padded with two ``<s>`` and one ``</s>``. The event
space of a model is the vocabulary's symbol set plus ``</s>``; ``<s>``
only ever appears as context. Both smoothers are fully interpolated, so
for every context the probabilities over the event space sum to one and
every symbol in the space has positive probability.

Scores are natural-log probabilities. Classification compares total
log-probability across communities for the same document; correlation
uses the per-token value to remove the length confound.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .text import Token
from .vocab import Vocabulary, apply_vocab

BOS = "<s>"
EOS = "</s>"

MODIFIED_KN = "modified_kn"
WITTEN_BELL = "witten_bell"

# log-probability written for context-only ARPA entries (never queried)
_DUMMY_LOGPROB = -99.0


@dataclass
class NgramCountTable:
    """Raw 1/2/3-gram counts over padded sequences."""

    unigrams: Counter
    bigrams: Counter
    trigrams: Counter
    sequences: int = 0

    @classmethod
    def empty(cls) -> "NgramCountTable":
        return cls(Counter(), Counter(), Counter(), 0)

    def merge(self, other: "NgramCountTable") -> "NgramCountTable":
        return NgramCountTable(
            self.unigrams + other.unigrams,
            self.bigrams + other.bigrams,
            self.trigrams + other.trigrams,
            self.sequences + other.sequences,
        )


def count_ngrams(sequences: Iterable[Sequence[str]]) -> NgramCountTable:
    """Count all 1/2/3-grams of each sequence padded with <s> <s> ... </s>."""
    table = NgramCountTable.empty()
    uni, bi, tri = table.unigrams, table.bigrams, table.trigrams
    for seq in sequences:
        table.sequences += 1
        padded = [BOS, BOS, *seq, EOS]
        n = len(padded)
        for i in range(n):
            uni[padded[i]] += 1
            if i + 1 < n:
                bi[(padded[i], padded[i + 1])] += 1
            if i + 2 < n:
                tri[(padded[i], padded[i + 1], padded[i + 2])] += 1
    return table


@dataclass
class StyleScore:
    total_logprob: float
    token_count: int

    @property
    def per_token(self) -> float:
        return self.total_logprob / self.token_count

    def __add__(self, other: "StyleScore") -> "StyleScore":
        return StyleScore(
            self.total_logprob + other.total_logprob,
            self.token_count + other.token_count,
        )


class TrigramModel:
    """Interpolated trigram model stored as probabilities plus backoff weights.

    ``logp3`` holds the full interpolated probability of every seen
    trigram; an unseen trigram in a seen context gets backoff(context)
    times the lower-order probability, which equals the interpolated
    value exactly because its discounted count is zero. ``logp1`` covers
    the whole event space, so any query over the space succeeds.
    """

    def __init__(
        self,
        smoothing: str,
        symbols: Sequence[str],
        logp1: dict[str, float],
        logp2: dict[tuple[str, str], float],
        logp3: dict[tuple[str, str, str], float],
        bo2: dict[str, float],
        bo3: dict[tuple[str, str], float],
        discounts: dict[int, tuple[float, float, float]] | None = None,
    ):
        self.smoothing = smoothing
        self.symbols = tuple(symbols)
        self.symbol_set = frozenset(self.symbols)
        self.logp1 = logp1
        self.logp2 = logp2
        self.logp3 = logp3
        self.bo2 = bo2
        self.bo3 = bo3
        self.discounts = discounts or {}

    def logprob(self, u: str, v: str, w: str) -> float:
        """Natural log of p(w | u, v)."""
        p = self.logp3.get((u, v, w))
        if p is not None:
            return p
        backoff = self.bo3.get((u, v), 0.0)
        p = self.logp2.get((v, w))
        if p is not None:
            return backoff + p
        return backoff + self.bo2.get(v, 0.0) + self.logp1[w]

    def prob(self, u: str, v: str, w: str) -> float:
        return math.exp(self.logprob(u, v, w))

    def score(self, sequence: Sequence[str]) -> StyleScore:
        """Log-probability of one padded sequence, </s> included."""
        total = 0.0
        u, v = BOS, BOS
        for w in sequence:
            if w not in self.symbol_set:
                raise ValueError(f"symbol {w!r} outside the model's event space")
            total += self.logprob(u, v, w)
            u, v = v, w
        total += self.logprob(u, v, EOS)
        return StyleScore(total, len(sequence) + 1)


def score_document(
    model: TrigramModel, vocab: Vocabulary, document: Sequence[Sequence[Token]]
) -> StyleScore:
    """Score a document (list of tagged comment sequences), one padding per comment."""
    if not document:
        raise ValueError("cannot score an empty document")
    total = StyleScore(0.0, 0)
    for tokens in document:
        total = total + model.score(apply_vocab(vocab, tokens))
    return total


# ---------------------------------------------------------------------------
# Modified Kneser-Ney estimation
# ---------------------------------------------------------------------------


def _mkn_discounts(values: Iterable[int]) -> tuple[float, float, float]:
    """Chen-Goodman discounts D1, D2, D3+ from a count histogram.

    Any discount whose count-of-counts input is degenerate (zero) falls
    back to 0.5, as does a formula result outside (0, k].
    """
    hist = Counter()
    for v in values:
        if v <= 4:
            hist[v] += 1
    n1, n2, n3, n4 = hist[1], hist[2], hist[3], hist[4]
    y = n1 / (n1 + 2.0 * n2) if n1 > 0 and n2 > 0 else None

    def d(k: int, nk: int, nk1: int) -> float:
        if y is None or nk == 0:
            return 0.5
        value = k - (k + 1) * y * nk1 / nk
        return value if 0.0 < value <= k else 0.5

    return d(1, n1, n2), d(2, n2, n3), d(3, n3, n4)


def _pick(discounts: tuple[float, float, float], count: int) -> float:
    if count >= 3:
        return discounts[2]
    return discounts[count - 1]


def estimate_kn(counts: NgramCountTable, symbols: Sequence[str]) -> TrigramModel:
    """Interpolated modified Kneser-Ney over the given emission symbols.

    Trigram level uses raw counts; bigram and unigram levels use
    continuation counts (number of distinct left neighbours). The unigram
    level interpolates with the uniform distribution over the event space.
    """
    if not counts.trigrams:
        raise ValueError("cannot estimate a model from empty counts")
    event_space = _event_space(symbols)
    vsize = len(event_space)

    # adjusted counts: continuation types at the lower orders
    a2: Counter = Counter()
    for (u, v, w) in counts.trigrams:
        a2[(v, w)] += 1
    a1: Counter = Counter()
    for (v, w) in counts.bigrams:
        if w != BOS:
            a1[w] += 1

    d3 = _mkn_discounts(counts.trigrams.values())
    d2 = _mkn_discounts(a2.values())
    d1 = _mkn_discounts(a1.values())

    # unigram level
    total1 = sum(a1.values())
    discount_mass = sum(_pick(d1, c) for c in a1.values())
    gamma1 = discount_mass / total1
    p1 = {}
    for w in event_space:
        c = a1.get(w, 0)
        seen = max(c - _pick(d1, c), 0.0) / total1 if c else 0.0
        p1[w] = seen + gamma1 / vsize

    # bigram level
    ctx2_total: Counter = Counter()
    ctx2_discount: dict[str, float] = {}
    for (v, w), c in a2.items():
        ctx2_total[v] += c
        ctx2_discount[v] = ctx2_discount.get(v, 0.0) + _pick(d2, c)
    bo2 = {v: ctx2_discount[v] / ctx2_total[v] for v in ctx2_total}
    p2 = {}
    for (v, w), c in a2.items():
        p2[(v, w)] = max(c - _pick(d2, c), 0.0) / ctx2_total[v] + bo2[v] * p1[w]

    # trigram level
    ctx3_total: Counter = Counter()
    ctx3_discount: dict[tuple[str, str], float] = {}
    for (u, v, w), c in counts.trigrams.items():
        ctx3_total[(u, v)] += c
        ctx3_discount[(u, v)] = ctx3_discount.get((u, v), 0.0) + _pick(d3, c)
    bo3 = {h: ctx3_discount[h] / ctx3_total[h] for h in ctx3_total}
    p3 = {}
    for (u, v, w), c in counts.trigrams.items():
        p3[(u, v, w)] = (
            max(c - _pick(d3, c), 0.0) / ctx3_total[(u, v)] + bo3[(u, v)] * p2[(v, w)]
        )

    return TrigramModel(
        MODIFIED_KN,
        event_space,
        _logs(p1),
        _logs(p2),
        _logs(p3),
        _logs(bo2),
        _logs(bo3),
        discounts={1: d1, 2: d2, 3: d3},
    )


# ---------------------------------------------------------------------------
# Witten-Bell estimation
# ---------------------------------------------------------------------------


def estimate_wb(counts: NgramCountTable, symbols: Sequence[str]) -> TrigramModel:
    """Recursive Witten-Bell interpolation down to uniform over the event space."""
    if not counts.trigrams:
        raise ValueError("cannot estimate a model from empty counts")
    event_space = _event_space(symbols)
    vsize = len(event_space)

    c1 = {w: c for w, c in counts.unigrams.items() if w != BOS}
    c2 = {(v, w): c for (v, w), c in counts.bigrams.items() if w != BOS}
    c3 = dict(counts.trigrams)

    total1 = sum(c1.values())
    types1 = len(c1)
    p1 = {
        w: (c1.get(w, 0) + types1 / vsize) / (total1 + types1) for w in event_space
    }

    ctx2_total: Counter = Counter()
    ctx2_types: Counter = Counter()
    for (v, w), c in c2.items():
        ctx2_total[v] += c
        ctx2_types[v] += 1
    bo2 = {v: ctx2_types[v] / (ctx2_total[v] + ctx2_types[v]) for v in ctx2_total}
    p2 = {}
    for (v, w), c in c2.items():
        denom = ctx2_total[v] + ctx2_types[v]
        p2[(v, w)] = (c + ctx2_types[v] * p1[w]) / denom

    ctx3_total: Counter = Counter()
    ctx3_types: Counter = Counter()
    for (u, v, w), c in c3.items():
        ctx3_total[(u, v)] += c
        ctx3_types[(u, v)] += 1
    bo3 = {h: ctx3_types[h] / (ctx3_total[h] + ctx3_types[h]) for h in ctx3_total}
    p3 = {}
    for (u, v, w), c in c3.items():
        denom = ctx3_total[(u, v)] + ctx3_types[(u, v)]
        p3[(u, v, w)] = (c + ctx3_types[(u, v)] * p2[(v, w)]) / denom

    return TrigramModel(
        WITTEN_BELL, event_space, _logs(p1), _logs(p2), _logs(p3), _logs(bo2), _logs(bo3)
    )


def _event_space(symbols: Sequence[str]) -> tuple[str, ...]:
    out = [s for s in symbols if s not in (BOS, EOS)]
    out.append(EOS)
    return tuple(out)


def _logs(table: dict) -> dict:
    return {k: math.log(v) for k, v in table.items()}


def train_style_model(
    vocab: Vocabulary,
    documents: Iterable[Sequence[Token]],
    smoothing: str,
) -> TrigramModel:
    """Apply the vocabulary to tagged sequences, count, and estimate."""
    counts = count_ngrams(apply_vocab(vocab, seq) for seq in documents)
    estimator = estimate_kn if smoothing == MODIFIED_KN else estimate_wb
    return estimator(counts, vocab.symbols())


# ---------------------------------------------------------------------------
# ARPA-style backoff text format
# ---------------------------------------------------------------------------


def write_arpa(path: str | Path, model: TrigramModel, config_hash: str = "") -> None:
    """Standard backoff text format; log base e, full float precision."""
    lines = [
        f"# commstyle trigram model smoothing={model.smoothing} "
        f"log_base=e config={config_hash}",
        "",
        "\\data\\",
    ]
    # context-only entries (needed for their backoff weight) get a dummy logprob
    uni_entries: list[tuple[str, float, float]] = []
    for w in sorted(model.logp1):
        uni_entries.append((w, model.logp1[w], model.bo2.get(w, 0.0)))
    uni_entries.append((BOS, _DUMMY_LOGPROB, model.bo2.get(BOS, 0.0)))

    bi_keys = sorted(set(model.logp2) | set(model.bo3))
    bi_entries = [
        (k, model.logp2.get(k, _DUMMY_LOGPROB), model.bo3.get(k, 0.0)) for k in bi_keys
    ]
    tri_entries = [(k, model.logp3[k]) for k in sorted(model.logp3)]

    lines.append(f"ngram 1={len(uni_entries)}")
    lines.append(f"ngram 2={len(bi_entries)}")
    lines.append(f"ngram 3={len(tri_entries)}")
    lines.append("")
    lines.append("\\1-grams:")
    for w, lp, bo in uni_entries:
        lines.append(f"{lp!r}\t{w}\t{bo!r}")
    lines.append("")
    lines.append("\\2-grams:")
    for (v, w), lp, bo in bi_entries:
        lines.append(f"{lp!r}\t{v} {w}\t{bo!r}")
    lines.append("")
    lines.append("\\3-grams:")
    for (u, v, w), lp in tri_entries:
        lines.append(f"{lp!r}\t{u} {v} {w}")
    lines.append("")
    lines.append("\\end\\")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_arpa(path: str | Path) -> TrigramModel:
    smoothing = ""
    logp1: dict[str, float] = {}
    logp2: dict[tuple[str, str], float] = {}
    logp3: dict[tuple[str, str, str], float] = {}
    bo2: dict[str, float] = {}
    bo3: dict[tuple[str, str], float] = {}
    section = 0
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            for part in line[1:].split():
                if part.startswith("smoothing="):
                    smoothing = part.split("=", 1)[1]
            continue
        if line.startswith("\\"):
            if line == "\\1-grams:":
                section = 1
            elif line == "\\2-grams:":
                section = 2
            elif line == "\\3-grams:":
                section = 3
            else:
                section = 0
            continue
        if section == 0 or line.startswith("ngram "):
            continue
        parts = line.split("\t")
        lp = float(parts[0])
        toks = parts[1].split(" ")
        bo = float(parts[2]) if len(parts) > 2 else 0.0
        if section == 1:
            if lp != _DUMMY_LOGPROB:
                logp1[toks[0]] = lp
            if bo != 0.0:
                bo2[toks[0]] = bo
        elif section == 2:
            key = (toks[0], toks[1])
            if lp != _DUMMY_LOGPROB:
                logp2[key] = lp
            if bo != 0.0:
                bo3[key] = bo
        elif section == 3:
            logp3[(toks[0], toks[1], toks[2])] = lp
    if not smoothing:
        raise ValueError(f"{path} has no smoothing header")
    return TrigramModel(smoothing, list(logp1), logp1, logp2, logp3, bo2, bo3)
