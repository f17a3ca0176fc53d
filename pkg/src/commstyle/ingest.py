"""Parse forum dump files, rebuild discussion threads, filter, and split.

Dumps are newline-delimited JSON in the public Reddit archive layout:
comments carry ``id, parent_id, link_id, subreddit, author, body, score,
created_utc`` and posts carry ``id, subreddit, author, title, selftext,
score, created_utc``. Thread membership is flat (a comment belongs to the
post named by its ``link_id``); reply structure is ignored.
"""

from __future__ import annotations

import bz2
import gzip
import json
import lzma
import math
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, TextIO

DELETED_BODIES = ("[deleted]", "[removed]")
DISTRACTOR_NAME = "merged_others"

# Reddit "fullname" prefixes (t1_ comment, t3_ post) are stripped so ids
# match across record kinds.
_ID_PREFIXES = ("t1_", "t2_", "t3_", "t4_", "t5_")


class DumpFormatError(ValueError):
    """Raised when an input stream does not look like the expected dump kind."""


class ConsistencyError(ValueError):
    """Raised when corpus-level invariants are violated (e.g. duplicate ids)."""


@dataclass(frozen=True)
class CommentRecord:
    id: str
    parent_id: str
    link_id: str
    community: str
    author: str
    body: str
    karma: int
    created_utc: int

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "parent_id": self.parent_id,
            "link_id": self.link_id,
            "subreddit": self.community,
            "author": self.author,
            "body": self.body,
            "score": self.karma,
            "created_utc": self.created_utc,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CommentRecord":
        return cls(
            id=str(obj["id"]),
            parent_id=_strip_id(str(obj.get("parent_id", ""))),
            link_id=_strip_id(str(obj["link_id"])),
            community=str(obj["subreddit"]),
            author=str(obj["author"]),
            body=str(obj["body"]),
            karma=int(obj["score"]),
            created_utc=int(obj["created_utc"]),
        )


@dataclass(frozen=True)
class PostRecord:
    id: str
    community: str
    author: str
    title: str
    body: str
    karma: int
    created_utc: int

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "subreddit": self.community,
            "author": self.author,
            "title": self.title,
            "selftext": self.body,
            "score": self.karma,
            "created_utc": self.created_utc,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PostRecord":
        return cls(
            id=str(obj["id"]),
            community=str(obj["subreddit"]),
            author=str(obj["author"]),
            title=str(obj["title"]),
            body=str(obj.get("selftext", "")),
            karma=int(obj["score"]),
            created_utc=int(obj["created_utc"]),
        )


@dataclass(frozen=True)
class ThreadRecord:
    """A post plus its comments, sorted by (created_utc, id)."""

    post: PostRecord
    comments: tuple[CommentRecord, ...]

    @property
    def id(self) -> str:
        return self.post.id

    def to_json(self) -> dict:
        return {
            "post": self.post.to_json(),
            "comments": [c.to_json() for c in self.comments],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ThreadRecord":
        return cls(
            post=PostRecord.from_json(obj["post"]),
            comments=tuple(CommentRecord.from_json(c) for c in obj["comments"]),
        )


@dataclass
class CommunityCorpus:
    community: str
    train_threads: list[ThreadRecord]
    test_threads: list[ThreadRecord]
    # thread id -> original community, used by the merged distractor
    source_by_thread: dict[str, str] = field(default_factory=dict)


@dataclass
class ParseStats:
    lines: int = 0
    malformed: int = 0
    dropped_deleted: int = 0

    @property
    def well_formed(self) -> int:
        return self.lines - self.malformed


def _strip_id(s: str) -> str:
    for prefix in _ID_PREFIXES:
        if s.startswith(prefix):
            return s[len(prefix):]
    return s


def open_dump(path: str | Path) -> TextIO:
    """Open a dump file, transparently decompressing .gz/.bz2/.xz."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".gz":
        return gzip.open(path, "rt", encoding="utf-8")
    if suffix == ".bz2":
        return bz2.open(path, "rt", encoding="utf-8")
    if suffix == ".xz":
        return lzma.open(path, "rt", encoding="utf-8")
    return open(path, "rt", encoding="utf-8")


def _parse_comment(obj: dict) -> CommentRecord:
    return CommentRecord(
        id=_strip_id(str(obj["id"])),
        parent_id=_strip_id(str(obj["parent_id"])),
        link_id=_strip_id(str(obj["link_id"])),
        community=str(obj["subreddit"]),
        author=str(obj["author"]),
        body=str(obj["body"]),
        karma=int(obj["score"]),
        created_utc=int(obj["created_utc"]),
    )


def _parse_post(obj: dict) -> PostRecord:
    return PostRecord(
        id=_strip_id(str(obj["id"])),
        community=str(obj["subreddit"]),
        author=str(obj["author"]),
        title=str(obj["title"]),
        body=str(obj.get("selftext", "") or ""),
        karma=int(obj["score"]),
        created_utc=int(obj["created_utc"]),
    )


def parse_dump(
    lines: Iterable[str], kind: str
) -> tuple[list[CommentRecord] | list[PostRecord], ParseStats]:
    """Parse newline-delimited JSON records of the given kind.

    Malformed lines are skipped and counted; records whose body is exactly
    "[deleted]" or "[removed]" are dropped (counted separately). Raises
    DumpFormatError when more than half the non-empty lines are malformed,
    which usually means the wrong file kind was supplied.
    """
    if kind not in ("comment", "post"):
        raise ValueError(f"unknown dump kind: {kind!r}")
    parse = _parse_comment if kind == "comment" else _parse_post
    records = []
    stats = ParseStats()
    for line in lines:
        line = line.strip()
        if not line:
            continue
        stats.lines += 1
        try:
            obj = json.loads(line)
            record = parse(obj)
        except (ValueError, KeyError, TypeError):
            stats.malformed += 1
            continue
        if kind == "post" and not record.title:
            stats.malformed += 1
            continue
        if record.body in DELETED_BODIES or (
            kind == "post" and record.title in DELETED_BODIES
        ):
            stats.dropped_deleted += 1
            continue
        records.append(record)
    if stats.lines and stats.malformed * 2 > stats.lines:
        raise DumpFormatError(
            f"{stats.malformed}/{stats.lines} malformed lines; "
            f"is this really a {kind} dump?"
        )
    return records, stats


def parse_dump_file(path: str | Path, kind: str):
    with open_dump(path) as fh:
        return parse_dump(fh, kind)


def assemble_threads(
    posts: Iterable[PostRecord], comments: Iterable[CommentRecord]
) -> tuple[list[ThreadRecord], int]:
    """Group comments under their posts by link_id.

    Comments whose link_id matches no post are dropped and counted as
    orphans. Threads come back sorted by post id; comments within a thread
    are chronological with ties broken by comment id.
    """
    by_post: dict[str, list[CommentRecord]] = {}
    post_list = sorted(posts, key=lambda p: p.id)
    for post in post_list:
        by_post[post.id] = []
    orphans = 0
    for comment in comments:
        bucket = by_post.get(comment.link_id)
        if bucket is None:
            orphans += 1
            continue
        bucket.append(comment)
    threads = []
    for post in post_list:
        ordered = sorted(by_post[post.id], key=lambda c: (c.created_utc, c.id))
        threads.append(ThreadRecord(post=post, comments=tuple(ordered)))
    return threads, orphans


def filter_corpus(
    threads: Iterable[ThreadRecord],
    min_thread_comments: int = 100,
    drop_nonpositive_karma: bool = False,
) -> list[ThreadRecord]:
    """Keep threads with enough comments; optionally drop karma<=0 comments.

    The size threshold is applied first: a thread that passes it is kept
    even if the karma filter then leaves it with fewer comments.
    """
    kept = []
    for thread in threads:
        if len(thread.comments) < min_thread_comments:
            continue
        if drop_nonpositive_karma:
            comments = tuple(c for c in thread.comments if c.karma > 0)
            thread = ThreadRecord(post=thread.post, comments=comments)
        kept.append(thread)
    return kept


def split_train_test(
    threads: list[ThreadRecord], test_fraction: float = 0.2, seed: int = 0
) -> tuple[list[ThreadRecord], list[ThreadRecord]]:
    """Seeded-permutation split; the last ceil(n*fraction) threads form the test set."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    if not threads:
        return [], []
    shuffled = list(threads)
    random.Random(seed).shuffle(shuffled)
    n_test = math.ceil(len(shuffled) * test_fraction)
    return shuffled[:-n_test], shuffled[-n_test:]


def build_merged_distractor(
    corpora: Iterable[CommunityCorpus], name: str = DISTRACTOR_NAME
) -> CommunityCorpus:
    """Pool several corpora into one open-class distractor community."""
    corpora = list(corpora)
    if not corpora:
        raise ValueError("need at least one corpus to build the distractor")
    merged = CommunityCorpus(community=name, train_threads=[], test_threads=[])
    seen: set[str] = set()
    for corpus in corpora:
        for split_name, threads in (
            ("train", corpus.train_threads),
            ("test", corpus.test_threads),
        ):
            for thread in threads:
                if thread.id in seen:
                    raise ConsistencyError(
                        f"duplicate thread id {thread.id!r} while merging "
                        f"{corpus.community!r} into {name!r}"
                    )
                seen.add(thread.id)
                merged.source_by_thread[thread.id] = corpus.community
                if split_name == "train":
                    merged.train_threads.append(thread)
                else:
                    merged.test_threads.append(thread)
    return merged


def write_threads(path: str | Path, threads: Iterable[ThreadRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for thread in threads:
            fh.write(json.dumps(thread.to_json(), sort_keys=True))
            fh.write("\n")


def read_threads(path: str | Path) -> Iterator[ThreadRecord]:
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield ThreadRecord.from_json(json.loads(line))
