"""Tokenization and part-of-speech tagging over a fixed 38-tag inventory.

The tokenizer is deliberately simple and deterministic: lowercase,
whitespace split, leading/trailing punctuation split off as separate
tokens, English contraction suffixes split, URLs collapsed to ``<url>``.
Re-tokenizing its own joined output is a fixed point.

Tagging uses a greedy averaged-perceptron sequence model, except that
punctuation tokens are tagged by rule (never by the model).
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

URL_TOKEN = "<url>"
UNTAGGED = "UNTAGGED"
SENT_FINAL_TAG = "."
OTHER_PUNCT_TAG = "PUNCT"

_URL_RE = re.compile(r"^(https?://|www\.)", re.IGNORECASE)
_CONTRACTION_SUFFIXES = ("n't", "'s", "'re", "'ve", "'ll", "'d", "'m")
_SENT_FINAL_CHARS = set(".!?")


@dataclass(frozen=True)
class Token:
    surface: str
    tag: str = UNTAGGED


class TagSet:
    """Ordered inventory of exactly 38 POS tags (36 PTB word tags + 2 punctuation tags)."""

    SIZE = 38

    def __init__(self, tags: Sequence[str]):
        tags = tuple(tags)
        if len(tags) != len(set(tags)):
            raise ValueError("tag symbols must be unique")
        if len(tags) != self.SIZE:
            raise ValueError(f"expected {self.SIZE} tags, got {len(tags)}")
        for required in (SENT_FINAL_TAG, OTHER_PUNCT_TAG):
            if required not in tags:
                raise ValueError(f"tag inventory must include {required!r}")
        self.tags = tags
        self._index = {t: i for i, t in enumerate(tags)}

    def __contains__(self, tag: str) -> bool:
        return tag in self._index

    def __iter__(self):
        return iter(self.tags)

    def __len__(self) -> int:
        return len(self.tags)

    def __eq__(self, other) -> bool:
        return isinstance(other, TagSet) and self.tags == other.tags

    def sha1(self) -> str:
        import hashlib

        return hashlib.sha1("\n".join(self.tags).encode("utf-8")).hexdigest()


def load_default_tagset() -> TagSet:
    text = resources.files("commstyle.data").joinpath("tagset.txt").read_text("utf-8")
    tags = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    return TagSet(tags)


def is_punctuation_token(token: str) -> bool:
    return token != URL_TOKEN and not any(ch.isalnum() for ch in token)


def punctuation_tag(token: str) -> str:
    if all(ch in _SENT_FINAL_CHARS for ch in token):
        return SENT_FINAL_TAG
    return OTHER_PUNCT_TAG


def _split_chunk(chunk: str) -> list[str]:
    # Recursive so that every emitted token is itself a fixed point of the
    # splitter (stems may end in punctuation or a further contraction).
    if not chunk:
        return []
    if chunk == URL_TOKEN or chunk in _CONTRACTION_SUFFIXES:
        return [chunk]
    if _URL_RE.match(chunk):
        return [URL_TOKEN]
    if all(not ch.isalnum() for ch in chunk):
        return list(chunk)
    if not chunk[0].isalnum():
        return [chunk[0]] + _split_chunk(chunk[1:])
    if not chunk[-1].isalnum():
        return _split_chunk(chunk[:-1]) + [chunk[-1]]
    if chunk.endswith("n't") and len(chunk) > 3:
        return _split_chunk(chunk[:-3]) + ["n't"]
    for suffix in _CONTRACTION_SUFFIXES[1:]:
        if chunk.endswith(suffix) and len(chunk) > len(suffix):
            return _split_chunk(chunk[: -len(suffix)]) + [suffix]
    return [chunk]


def tokenize(raw: str) -> list[str]:
    """Lowercased surface tokens with punctuation split off and URLs collapsed."""
    tokens: list[str] = []
    for chunk in raw.lower().split():
        tokens.extend(_split_chunk(chunk))
    return tokens


# ---------------------------------------------------------------------------
# Averaged-perceptron tagger
# ---------------------------------------------------------------------------

_BOUND = "-START-"


def _features(word: str, prev: str, prev2: str, prev_word: str, next_word: str) -> list[str]:
    feats = [
        "b",
        "w=" + word,
        "s3=" + word[-3:],
        "s2=" + word[-2:],
        "p1=" + word[:1],
        "t1=" + prev,
        "t2=" + prev2,
        "t12=" + prev + "|" + prev2,
        "w-1=" + prev_word,
        "w+1=" + next_word,
    ]
    if any(ch.isdigit() for ch in word):
        feats.append("dig")
    if "-" in word:
        feats.append("hyp")
    return feats


class TaggerModel:
    """Averaged-perceptron POS tagger with rule-tagged punctuation."""

    FORMAT_VERSION = 1

    def __init__(self, tagset: TagSet, weights: dict[str, dict[str, float]],
                 iterations: int = 0, seed: int = 0):
        self.tagset = tagset
        self.weights = weights
        self.iterations = iterations
        self.seed = seed

    def _predict(self, feats: list[str]) -> str:
        scores: dict[str, float] = {}
        for feat in feats:
            table = self.weights.get(feat)
            if not table:
                continue
            for tag, weight in table.items():
                scores[tag] = scores.get(tag, 0.0) + weight
        best_tag = self.tagset.tags[0]
        best_score = float("-inf")
        for tag in sorted(scores):
            if scores[tag] > best_score:
                best_score = scores[tag]
                best_tag = tag
        return best_tag

    def tag(self, tokens: Sequence[str]) -> list[Token]:
        """One tag per token, greedy left to right."""
        out: list[Token] = []
        prev, prev2 = _BOUND, _BOUND
        padded = [_BOUND] + list(tokens) + [_BOUND]
        for i, word in enumerate(tokens):
            if is_punctuation_token(word):
                tag = punctuation_tag(word)
            else:
                tag = self._predict(_features(word, prev, prev2, padded[i], padded[i + 2]))
            out.append(Token(word, tag))
            prev2, prev = prev, tag
        return out

    def save(self, path: str | Path) -> None:
        payload = {
            "format_version": self.FORMAT_VERSION,
            "tagset": list(self.tagset.tags),
            "iterations": self.iterations,
            "seed": self.seed,
            "weights": self.weights,
        }
        Path(path).write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "TaggerModel":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        if payload.get("format_version") != cls.FORMAT_VERSION:
            raise ValueError(f"unsupported tagger model version in {path}")
        return cls(
            tagset=TagSet(payload["tagset"]),
            weights=payload["weights"],
            iterations=payload["iterations"],
            seed=payload["seed"],
        )


def train_tagger(
    sequences: Sequence[Sequence[tuple[str, str]]],
    tagset: TagSet | None = None,
    iterations: int = 5,
    seed: int = 0,
    dev: Sequence[Sequence[tuple[str, str]]] | None = None,
) -> tuple[TaggerModel, float | None]:
    """Train an averaged perceptron on (surface, gold tag) sequences.

    Deterministic given the seed. Returns the model and, when a dev set is
    supplied, its token accuracy there. Unknown gold tags are fatal.
    """
    if tagset is None:
        tagset = load_default_tagset()
    sequences = list(sequences)
    if not sequences:
        raise ValueError("cannot train a tagger on zero sequences")
    for seq in sequences:
        for surface, gold in seq:
            if gold not in tagset:
                raise ValueError(f"gold tag {gold!r} not in tag inventory")

    weights: dict[str, dict[str, float]] = {}
    totals: dict[tuple[str, str], float] = {}
    tstamps: dict[tuple[str, str], int] = {}
    n_updates = 0

    def upd(tag: str, feat: str, delta: float) -> None:
        key = (feat, tag)
        table = weights.setdefault(feat, {})
        current = table.get(tag, 0.0)
        totals[key] = totals.get(key, 0.0) + (n_updates - tstamps.get(key, 0)) * current
        tstamps[key] = n_updates
        table[tag] = current + delta

    model = TaggerModel(tagset, weights, iterations=iterations, seed=seed)
    rng = random.Random(seed)
    order = list(range(len(sequences)))
    for _ in range(iterations):
        rng.shuffle(order)
        for idx in order:
            seq = sequences[idx]
            words = [w for w, _ in seq]
            padded = [_BOUND] + words + [_BOUND]
            prev, prev2 = _BOUND, _BOUND
            for i, (word, gold) in enumerate(seq):
                if is_punctuation_token(word):
                    prev2, prev = prev, punctuation_tag(word)
                    continue
                feats = _features(word, prev, prev2, padded[i], padded[i + 2])
                guess = model._predict(feats)
                n_updates += 1
                if guess != gold:
                    for feat in feats:
                        upd(gold, feat, 1.0)
                        upd(guess, feat, -1.0)
                prev2, prev = prev, guess

    # replace running weights with their averages
    for feat, table in weights.items():
        for tag, weight in list(table.items()):
            key = (feat, tag)
            total = totals.get(key, 0.0) + (n_updates - tstamps.get(key, 0)) * weight
            averaged = total / max(n_updates, 1)
            if averaged:
                table[tag] = averaged
            else:
                del table[tag]

    dev_accuracy = tag_accuracy(model, dev) if dev is not None else None
    return model, dev_accuracy


def tag_accuracy(model: TaggerModel, sequences: Iterable[Sequence[tuple[str, str]]]) -> float:
    correct = total = 0
    for seq in sequences:
        predicted = model.tag([w for w, _ in seq])
        for token, (_, gold) in zip(predicted, seq):
            total += 1
            correct += token.tag == gold
    return correct / total if total else 0.0


# ---------------------------------------------------------------------------
# Pre-tagged input
# ---------------------------------------------------------------------------


def ingest_pretagged(lines: Iterable[str], tagset: TagSet | None = None) -> list[list[Token]]:
    """Parse ``surface_TAG`` lines into Token sequences.

    Blank lines are sequence boundaries; a sequence may span several
    non-blank lines. Tags outside the inventory are fatal, with the
    offending line number in the message.
    """
    if tagset is None:
        tagset = load_default_tagset()
    sequences: list[list[Token]] = []
    current: list[Token] = []
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            if current:
                sequences.append(current)
                current = []
            continue
        for item in line.split():
            surface, sep, tag = item.rpartition("_")
            if not sep or not surface:
                raise ValueError(f"line {lineno}: malformed token {item!r}")
            if tag not in tagset:
                raise ValueError(f"line {lineno}: unknown tag {tag!r}")
            current.append(Token(surface, tag))
    if current:
        sequences.append(current)
    return sequences


def load_bundled_tagged_corpus() -> list[list[tuple[str, str]]]:
    """The small bundled corpus used to train the default tagger."""
    text = resources.files("commstyle.data").joinpath("tagger_train.txt").read_text("utf-8")
    sequences = ingest_pretagged(text.splitlines())
    return [[(t.surface, t.tag) for t in seq] for seq in sequences]
