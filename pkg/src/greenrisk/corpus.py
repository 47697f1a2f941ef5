"""Report ingestion, paragraph-aligned chunking, dataset splits and JSONL storage."""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from greenrisk._validation import check_binary, check_fraction
from greenrisk.exceptions import GreenRiskError
from greenrisk.lexicon import AttributeVector, Lexicon

SECTORS = ("oil-gas", "tech", "other")
SPLITS = ("train", "validation", "test")
DEFAULT_MAX_CHARS = 2000
MIN_MAX_CHARS = 200
PARAGRAPH_JOIN = "\n\n"

_BLANK_LINE_RE = re.compile(r"\n[ \t\f\v]*\n")
_WS_RE = re.compile(r"\s+")
# sentence end: . ! or ? then whitespace then an uppercase letter
_SENTENCE_RE = re.compile(r"(?<=[.!?])\s+(?=[A-Z])")


@dataclass(frozen=True)
class Document:
    id: str
    company: str
    sector: str
    year: int
    paragraphs: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "paragraphs", tuple(self.paragraphs))
        if self.sector not in SECTORS:
            raise GreenRiskError(f"unknown sector {self.sector!r}; expected one of {SECTORS}")
        if int(self.year) < 2000:
            raise GreenRiskError(f"year must be >= 2000, got {self.year}")
        if any(not p for p in self.paragraphs):
            raise GreenRiskError(f"document {self.id} has an empty paragraph")


@dataclass(frozen=True)
class Chunk:
    id: str
    document_id: str
    index: int
    text: str
    climate_related: int = 1
    oversize: bool = False
    # (source paragraph index, text) for each paragraph or paragraph piece
    pieces: tuple[tuple[int, str], ...] = field(default=(), compare=False)

    def __post_init__(self):
        if not self.text:
            raise GreenRiskError(f"chunk {self.id} has empty text")
        if self.index < 0:
            raise GreenRiskError(f"chunk {self.id} has negative index")


def normalize_whitespace(text: str) -> str:
    return _WS_RE.sub(" ", text).strip()


def parse_paragraphs(raw: str) -> list[str]:
    raw = raw.replace("\r\n", "\n").replace("\r", "\n")
    paragraphs = (normalize_whitespace(p) for p in _BLANK_LINE_RE.split(raw))
    return [p for p in paragraphs if p]


def ingest_report(path, company: str, sector: str, year: int, doc_id: str | None = None) -> Document:
    path = Path(path)
    if not path.is_file():
        raise GreenRiskError(f"report not found: {path}")
    try:
        raw = path.read_bytes().decode("utf-8")
    except UnicodeDecodeError as exc:
        raise GreenRiskError(f"{path}: not valid UTF-8 (byte offset {exc.start})") from exc
    paragraphs = parse_paragraphs(raw)
    if not paragraphs:
        raise GreenRiskError(f"{path}: empty report")
    return Document(doc_id or path.stem, company, sector, int(year), tuple(paragraphs))


def load_metadata(path) -> dict:
    path = Path(path)
    try:
        meta = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise GreenRiskError(f"metadata sidecar not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise GreenRiskError(f"{path}: malformed JSON ({exc.msg})") from exc
    missing = {"company", "sector", "year"} - set(meta)
    if missing:
        raise GreenRiskError(f"{path}: metadata missing {sorted(missing)}")
    return meta


def load_reports(directory) -> list[Document]:
    """Ingest every ``*.txt`` report in ``directory`` with its ``.json`` sidecar."""
    directory = Path(directory)
    if not directory.is_dir():
        raise GreenRiskError(f"report directory not found: {directory}")
    docs = []
    for txt in sorted(directory.glob("*.txt")):
        meta = load_metadata(txt.with_suffix(".json"))
        docs.append(ingest_report(txt, meta["company"], meta["sector"], meta["year"]))
    if not docs:
        raise GreenRiskError(f"no .txt reports in {directory}")
    return docs


def split_sentences(paragraph: str) -> list[str]:
    return _SENTENCE_RE.split(paragraph)


def _pack_sentences(sentences: Sequence[str], max_chars: int) -> Iterator[tuple[str, bool]]:
    """Greedily join sentences with single spaces; yields ``(piece, oversize)``."""
    current = ""
    for sentence in sentences:
        if len(sentence) > max_chars:
            if current:
                yield current, False
                current = ""
            yield sentence, True
        elif not current:
            current = sentence
        elif len(current) + 1 + len(sentence) <= max_chars:
            current = f"{current} {sentence}"
        else:
            yield current, False
            current = sentence
    if current:
        yield current, False


def chunk_document(
    doc: Document, max_chars: int = DEFAULT_MAX_CHARS, climate_lexicon: Lexicon | None = None
) -> list[Chunk]:
    """Split ``doc`` into paragraph-aligned chunks of at most ``max_chars`` characters.

    Whole paragraphs are packed greedily, joined by a blank line. A paragraph
    longer than the limit is cut at sentence boundaries and its pieces are not
    packed with neighbouring paragraphs. A single sentence over the limit
    becomes its own chunk with ``oversize=True``.

    With ``climate_lexicon`` set, ``climate_related`` is 1 only for chunks
    containing one of its phrases; otherwise every chunk is climate-related.
    """
    if max_chars < MIN_MAX_CHARS:
        raise GreenRiskError(f"max_chars must be >= {MIN_MAX_CHARS}, got {max_chars}")

    groups: list[tuple[list[tuple[int, str]], bool]] = []
    current: list[tuple[int, str]] = []
    length = 0

    def flush():
        nonlocal current, length
        if current:
            groups.append((current, False))
        current, length = [], 0

    for i, para in enumerate(doc.paragraphs):
        if len(para) > max_chars:
            flush()
            for piece, oversize in _pack_sentences(split_sentences(para), max_chars):
                groups.append(([(i, piece)], oversize))
            continue
        needed = len(para) if not current else length + len(PARAGRAPH_JOIN) + len(para)
        if current and needed > max_chars:
            flush()
            needed = len(para)
        current.append((i, para))
        length = needed
    flush()

    chunks = []
    for index, (pieces, oversize) in enumerate(groups):
        text = PARAGRAPH_JOIN.join(t for _, t in pieces)
        related = 1 if climate_lexicon is None else int(bool(climate_lexicon.find(text)))
        chunks.append(
            Chunk(
                id=f"{doc.id}:{index}",
                document_id=doc.id,
                index=index,
                text=text,
                climate_related=related,
                oversize=oversize,
                pieces=tuple(pieces),
            )
        )
    return chunks


def reconstruct_paragraphs(chunks: Iterable[Chunk]) -> list[str]:
    """Invert chunking: rejoin sentence pieces of split paragraphs."""
    paragraphs: list[str] = []
    last = None
    for chunk in chunks:
        for para_index, text in chunk.pieces:
            if para_index == last:
                paragraphs[-1] = f"{paragraphs[-1]} {text}"
            else:
                paragraphs.append(text)
            last = para_index
    return paragraphs


@dataclass(frozen=True)
class Record:
    id: str
    text: str
    attributes: AttributeVector
    label: int
    probability: float | None = None
    document_id: str = ""
    index: int = 0
    climate_related: int = 1

    def __post_init__(self):
        object.__setattr__(self, "label", check_binary(self.label, "label"))
        object.__setattr__(self, "climate_related", check_binary(self.climate_related, "climate_related"))
        if self.probability is not None and not 0.0 <= self.probability <= 1.0:
            raise GreenRiskError(f"record {self.id}: probability outside [0, 1]")

    def to_json(self) -> dict:
        out = {
            "id": self.id,
            "document_id": self.document_id,
            "index": self.index,
            "text": self.text,
            "attributes": self.attributes.as_dict(),
            "label": self.label,
        }
        if self.probability is not None:
            out["probability"] = self.probability
        out["climate_related"] = self.climate_related
        return out

    @classmethod
    def from_json(cls, data: dict) -> "Record":
        return cls(
            id=data["id"],
            text=data["text"],
            attributes=AttributeVector.from_mapping(data["attributes"]),
            label=data["label"],
            probability=data.get("probability"),
            document_id=data.get("document_id", ""),
            index=data.get("index", 0),
            climate_related=data.get("climate_related", 1),
        )


@dataclass
class LabeledDataset:
    records: list[Record]
    split: str | None = None

    def __post_init__(self):
        self.records = list(self.records)
        if self.split is not None and self.split not in SPLITS:
            raise GreenRiskError(f"unknown split {self.split!r}; expected one of {SPLITS}")
        ids = [r.id for r in self.records]
        if len(set(ids)) != len(ids):
            dup = next(i for i in ids if ids.count(i) > 1)
            raise GreenRiskError(f"duplicate record id {dup}")

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[Record]:
        return iter(self.records)

    @property
    def texts(self) -> list[str]:
        return [r.text for r in self.records]

    @property
    def labels(self) -> np.ndarray:
        return np.array([r.label for r in self.records], dtype=np.int64)

    def label_counts(self) -> dict[int, int]:
        labels = self.labels
        return {0: int((labels == 0).sum()), 1: int((labels == 1).sum())}


def records_from_labeled(labeled) -> LabeledDataset:
    """Build a dataset from ``generate_labels`` output over :class:`Chunk` objects."""
    return LabeledDataset(
        [
            Record(
                id=item.chunk.id,
                text=item.chunk.text,
                attributes=item.attributes,
                label=item.label,
                probability=item.probability,
                document_id=getattr(item.chunk, "document_id", ""),
                index=getattr(item.chunk, "index", 0),
                climate_related=getattr(item.chunk, "climate_related", 1),
            )
            for item in labeled
        ]
    )


def split_dataset(
    dataset: LabeledDataset, train_fraction: float = 0.8, seed: int = 0
) -> tuple[LabeledDataset, LabeledDataset]:
    """Seeded shuffle, then the first ``floor(train_fraction * n)`` records train."""
    check_fraction(train_fraction, "train_fraction")
    n = len(dataset)
    if n < 2:
        raise GreenRiskError(f"need at least 2 records to split, got {n}")
    # guard against 0.8 * 1320 landing a hair under an integer
    n_train = math.floor(train_fraction * n + 1e-9)
    order = np.random.default_rng(seed).permutation(n)
    records = dataset.records
    train = LabeledDataset([records[i] for i in order[:n_train]], split="train")
    validation = LabeledDataset([records[i] for i in order[n_train:]], split="validation")
    return train, validation


def persist_dataset(dataset: LabeledDataset, path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for record in dataset.records:
            row = record.to_json()
            if dataset.split is not None:
                row["split"] = dataset.split
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")


def load_dataset(path) -> LabeledDataset:
    path = Path(path)
    if not path.is_file():
        raise GreenRiskError(f"dataset file not found: {path}")
    records = []
    splits = set()
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                if "split" in row:
                    splits.add(row["split"])
                records.append(Record.from_json(row))
            except (json.JSONDecodeError, KeyError, TypeError, AttributeError, GreenRiskError) as exc:
                raise GreenRiskError(f"{path}:{lineno}: bad record ({exc})") from exc
    if len(splits) > 1:
        raise GreenRiskError(f"{path}: mixed split tags {sorted(splits)}")
    return LabeledDataset(records, split=splits.pop() if splits else None)


def load_chunk_file(path) -> list[Chunk]:
    """JSONL of pre-split paragraphs (``id``, ``text``, optional ``document_id``)."""
    path = Path(path)
    if not path.is_file():
        raise GreenRiskError(f"chunk file not found: {path}")
    chunks = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                chunks.append(
                    Chunk(
                        id=row["id"],
                        document_id=row.get("document_id", ""),
                        index=row.get("index", 0),
                        text=normalize_whitespace(row["text"]),
                        climate_related=row.get("climate_related", 1),
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError, GreenRiskError) as exc:
                raise GreenRiskError(f"{path}:{lineno}: bad chunk ({exc})") from exc
    return chunks
