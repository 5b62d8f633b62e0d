"""Contingency tables from screenplay text or attribute rules.

Scripts are split into scenes at heading lines, tokenized, and crossed
with their vocabulary (scenes x words) or with declarative per-scene
attributes (scenes x attributes).  Tables can be aggregated along either
axis by element-wise summation of grouped rows or columns.
"""

from __future__ import annotations

import csv
import io
import json
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    EmptyVocabulary,
    InputError,
    InvalidTable,
    NoScenesFound,
    SpecMismatch,
    UnknownLabel,
)

__all__ = [
    "tokenize",
    "Scene",
    "ScriptCorpus",
    "MarkerConfig",
    "parse_script",
    "VocabPolicy",
    "ContingencyTable",
    "AttributeSpec",
    "build_term_table",
    "build_attribute_table",
    "aggregate",
    "load_attribute_specs",
    "load_grouping",
]

_APOSTROPHES = re.compile("['’ʼ]")


def tokenize(raw_text: str) -> list[str]:
    """Split text into lowercase words of at least two letters.

    Apostrophes are deleted (``"Rick's"`` becomes ``"ricks"``); every other
    non-letter character separates words, so hyphenated words split.
    Accented letters are kept.

    >>> tokenize("Rick's Café -- NIGHT")
    ['ricks', 'café', 'night']
    """
    text = unicodedata.normalize("NFC", raw_text).lower()
    text = _APOSTROPHES.sub("", text)
    spaced = "".join(c if c.isalpha() else " " for c in text)
    return [w for w in spaced.split() if len(w) >= 2]


@dataclass(frozen=True)
class Scene:
    index: int
    heading: str
    body: str
    word_counts: Mapping[str, int] = field(repr=False)

    @property
    def n_words(self) -> int:
        return sum(self.word_counts.values())


@dataclass(frozen=True)
class ScriptCorpus:
    scenes: tuple[Scene, ...]

    def __post_init__(self):
        for pos, scene in enumerate(self.scenes, start=1):
            if scene.index != pos:
                raise InputError(f"scene indices must run 1..n in order, got {scene.index} at {pos}")

    def __len__(self):
        return len(self.scenes)

    def __iter__(self):
        return iter(self.scenes)

    @property
    def headings(self) -> list[str]:
        return [s.heading for s in self.scenes]

    @property
    def total_words(self) -> int:
        return sum(s.n_words for s in self.scenes)

    @classmethod
    def from_texts(cls, bodies: Sequence[str], headings: Sequence[str] | None = None) -> "ScriptCorpus":
        """Build a corpus from pre-delimited scene (or beat) texts."""
        if headings is None:
            headings = [f"scene {i}" for i in range(1, len(bodies) + 1)]
        if len(headings) != len(bodies):
            raise SpecMismatch("headings and bodies differ in length")
        return cls(tuple(_make_scene(i, h, b) for i, (h, b) in enumerate(zip(headings, bodies), start=1)))


def _make_scene(index: int, heading: str, body: str) -> Scene:
    counts = Counter(tokenize(body))
    return Scene(index, heading, body, MappingProxyType(dict(counts)))


DEFAULT_HEADING_PATTERNS = (
    r"^\s*(?:INT\.?\s*/\s*EXT|EXT\.?\s*/\s*INT|I/E|INT|EXT)\.",
)


@dataclass(frozen=True)
class MarkerConfig:
    """Scene heading recognition.

    ``patterns`` are regular expressions tried against each line.  With
    ``caps_headings`` an all-capitals line followed by a blank line is
    also a heading.  ``strict`` makes a script without headings an error
    instead of a single scene.
    """

    patterns: tuple[str, ...] = DEFAULT_HEADING_PATTERNS
    caps_headings: bool = True
    strict: bool = False

    def __post_init__(self):
        if not self.patterns and not self.caps_headings:
            raise InputError("marker config needs at least one heading pattern")

    @classmethod
    def from_dict(cls, doc: Mapping) -> "MarkerConfig":
        patterns = doc.get("patterns", DEFAULT_HEADING_PATTERNS)
        if isinstance(patterns, str):
            patterns = [patterns]
        return cls(tuple(patterns), bool(doc.get("caps_headings", True)), bool(doc.get("strict", False)))


def _is_caps_heading(line: str, next_line: str | None) -> bool:
    s = line.strip()
    if not s or next_line is None or next_line.strip():
        return False
    return any(c.isalpha() for c in s) and s == s.upper()


def parse_script(text: str, markers: MarkerConfig | None = None) -> ScriptCorpus:
    """Segment a screenplay into scenes at heading lines.

    Text before the first heading (title page, credits) is discarded.
    """
    markers = markers or MarkerConfig()
    compiled = [re.compile(p) for p in markers.patterns]
    lines = text.splitlines()

    starts = []
    for i, line in enumerate(lines):
        nxt = lines[i + 1] if i + 1 < len(lines) else None
        if any(p.search(line) for p in compiled) or (
            markers.caps_headings and _is_caps_heading(line, nxt)
        ):
            starts.append(i)

    if not starts:
        if markers.strict:
            raise NoScenesFound("no scene heading matched")
        return ScriptCorpus((_make_scene(1, "", text),))

    scenes = []
    for n, start in enumerate(starts, start=1):
        stop = starts[n] if n < len(starts) else len(lines)
        body = "\n".join(lines[start + 1 : stop])
        scenes.append(_make_scene(n, lines[start].strip(), body))
    return ScriptCorpus(tuple(scenes))


def _format_number(v: float) -> str:
    if float(v).is_integer() and abs(v) < 2**53:
        return str(int(v))
    return repr(float(v))


@dataclass(frozen=True, eq=False)
class ContingencyTable:
    """Labelled non-negative count matrix, observations x attributes.

    Counts are stored as float64 so aggregated or weighted tables are
    allowed.  Rows or columns with zero total are rejected.
    """

    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]
    counts: np.ndarray

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.float64)
        object.__setattr__(self, "row_labels", tuple(str(r) for r in self.row_labels))
        object.__setattr__(self, "col_labels", tuple(str(c) for c in self.col_labels))
        if counts.ndim != 2 or counts.shape != (len(self.row_labels), len(self.col_labels)):
            raise InvalidTable(
                f"counts shape {counts.shape} does not match "
                f"{len(self.row_labels)} row and {len(self.col_labels)} column labels"
            )
        if counts.size == 0:
            raise InvalidTable("table is empty")
        if not np.all(np.isfinite(counts)):
            raise InvalidTable("counts must be finite")
        if np.any(counts < 0):
            raise InvalidTable("counts must be non-negative")
        for name, labels in (("row", self.row_labels), ("column", self.col_labels)):
            dup = [lab for lab, c in Counter(labels).items() if c > 1]
            if dup:
                raise InvalidTable(f"duplicate {name} labels: {dup}")
        zero_rows = [self.row_labels[i] for i in np.flatnonzero(counts.sum(axis=1) == 0)]
        if zero_rows:
            raise InvalidTable(f"all-zero rows: {zero_rows}")
        zero_cols = [self.col_labels[j] for j in np.flatnonzero(counts.sum(axis=0) == 0)]
        if zero_cols:
            raise InvalidTable(f"all-zero columns: {zero_cols}")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def shape(self) -> tuple[int, int]:
        return self.counts.shape

    @property
    def grand_total(self) -> float:
        return float(self.counts.sum())

    def __eq__(self, other):
        if not isinstance(other, ContingencyTable):
            return NotImplemented
        return (
            self.row_labels == other.row_labels
            and self.col_labels == other.col_labels
            and np.array_equal(self.counts, other.counts)
        )

    __hash__ = None

    def transpose(self) -> "ContingencyTable":
        return ContingencyTable(self.col_labels, self.row_labels, self.counts.T)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([""] + list(self.col_labels))
        for label, row in zip(self.row_labels, self.counts):
            writer.writerow([label] + [_format_number(v) for v in row])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text

    @classmethod
    def from_csv(cls, source) -> "ContingencyTable":
        """Read a table from a CSV path or a file-like object."""
        if hasattr(source, "read"):
            text = source.read()
        else:
            text = Path(source).read_text(encoding="utf-8")
        rows = [r for r in csv.reader(io.StringIO(text)) if r]
        if len(rows) < 2:
            raise InvalidTable("CSV table needs a header row and at least one data row")
        cols = rows[0][1:]
        labels, data = [], []
        for r in rows[1:]:
            if len(r) != len(cols) + 1:
                raise InvalidTable(f"row {r[0]!r} has {len(r) - 1} cells, expected {len(cols)}")
            labels.append(r[0])
            try:
                data.append([float(x) for x in r[1:]])
            except ValueError as exc:
                raise InvalidTable(f"row {r[0]!r}: {exc}") from None
        return cls(tuple(labels), tuple(cols), np.array(data))


def _read_doc(source) -> Mapping:
    if isinstance(source, Mapping):
        return source
    return json.loads(Path(source).read_text(encoding="utf-8"))


@dataclass(frozen=True)
class VocabPolicy:
    min_total_count: int = 1
    stoplist: frozenset = frozenset()

    @classmethod
    def from_dict(cls, doc: Mapping) -> "VocabPolicy":
        return cls(int(doc.get("min_total_count", 1)), frozenset(doc.get("stoplist", ())))


def build_term_table(corpus: ScriptCorpus, policy: VocabPolicy | None = None) -> ContingencyTable:
    """Cross scenes with words.

    Columns are ordered by first occurrence in the script.  Words occurring
    fewer than ``policy.min_total_count`` times, or listed in the stoplist,
    are dropped.
    """
    policy = policy or VocabPolicy()
    if len(corpus) == 0:
        raise InputError("corpus has no scenes")
    totals: Counter = Counter()
    for scene in corpus:
        totals.update(scene.word_counts)
    vocab = [
        w for w, c in totals.items() if c >= policy.min_total_count and w not in policy.stoplist
    ]
    if not vocab:
        raise EmptyVocabulary("vocabulary policy removed every word")
    index = {w: j for j, w in enumerate(vocab)}
    counts = np.zeros((len(corpus), len(vocab)))
    for i, scene in enumerate(corpus):
        for w, c in scene.word_counts.items():
            j = index.get(w)
            if j is not None:
                counts[i, j] = c
    rows = tuple(str(s.index) for s in corpus)
    return ContingencyTable(rows, tuple(vocab), counts)


@dataclass(frozen=True)
class AttributeSpec:
    """One attribute column.

    ``kind`` is ``"heading_regex"`` (1 where the scene heading matches),
    ``"values"`` (explicit per-scene booleans) or ``"numeric"`` (explicit
    per-scene non-negative numbers).
    """

    name: str
    kind: str
    rule: object

    KINDS = ("heading_regex", "values", "numeric")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise InputError(f"unknown attribute rule {self.kind!r} for {self.name!r}")

    def evaluate(self, corpus: ScriptCorpus) -> np.ndarray:
        n = len(corpus)
        if self.kind == "heading_regex":
            pat = re.compile(self.rule)
            return np.array([1.0 if pat.search(s.heading) else 0.0 for s in corpus])
        values = list(self.rule)
        if len(values) != n:
            raise SpecMismatch(f"attribute {self.name!r} has {len(values)} values for {n} scenes")
        if self.kind == "values":
            return np.array([1.0 if v else 0.0 for v in values])
        return np.array([float(v) for v in values])


def load_attribute_specs(source) -> list[AttributeSpec]:
    """Read ``{name: {kind: rule}}`` from a JSON path or a mapping."""
    doc = _read_doc(source)
    specs = []
    for name, rule in doc.items():
        if not isinstance(rule, Mapping) or len(rule) != 1:
            raise InputError(f"attribute {name!r} must map to a single {{kind: rule}} entry")
        (kind, value), = rule.items()
        specs.append(AttributeSpec(name, kind, value))
    return specs


def build_attribute_table(corpus: ScriptCorpus, specs: Iterable[AttributeSpec]) -> ContingencyTable:
    specs = list(specs)
    if not specs:
        raise InputError("no attribute specs given")
    columns = [spec.evaluate(corpus) for spec in specs]
    rows = tuple(str(s.index) for s in corpus)
    return ContingencyTable(rows, tuple(s.name for s in specs), np.column_stack(columns))


def load_grouping(source) -> tuple[dict[str, str], str]:
    """Read a grouping document; returns ``(mapping, axis)``.

    Accepts either a bare ``{label: group}`` mapping (column axis) or
    ``{"axis": ..., "map": {...}}``.
    """
    doc = _read_doc(source)
    if "map" in doc and isinstance(doc["map"], Mapping):
        return dict(doc["map"]), doc.get("axis", "columns")
    return dict(doc), "columns"


def aggregate(table: ContingencyTable, grouping: Mapping[str, str], axis: str = "columns") -> ContingencyTable:
    """Sum rows or columns that share a group label.

    Aggregate labels are ordered by first appearance along the axis.
    """
    if axis not in ("rows", "columns"):
        raise InputError(f"axis must be 'rows' or 'columns', not {axis!r}")
    t = table if axis == "columns" else table.transpose()
    labels = t.col_labels
    unknown = sorted(set(grouping) - set(labels))
    if unknown:
        raise UnknownLabel(f"grouping references unknown labels: {unknown}")
    unmapped = [lab for lab in labels if lab not in grouping]
    if unmapped:
        raise UnknownLabel(f"grouping does not cover labels: {unmapped}")
    order: dict[str, list[int]] = {}
    for j, lab in enumerate(labels):
        order.setdefault(str(grouping[lab]), []).append(j)
    counts = np.column_stack([t.counts[:, idx].sum(axis=1) for idx in order.values()])
    out = ContingencyTable(t.row_labels, tuple(order), counts)
    return out if axis == "columns" else out.transpose()
