"""Hedging-phrase detection and assembly of the four binary risk attributes.

Phrases are matched as contiguous, case-folded token sequences. Tokens are runs
of word characters or single punctuation marks, so ``"so-called"`` is the three
tokens ``so - called`` and ``"30%"`` is ``30 %``. There is no stemming.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from greenrisk._validation import check_binary
from greenrisk.exceptions import GreenRiskError

ATTRIBUTES = ("sentiment", "commitment", "specificity", "hedging")
MODEL_ATTRIBUTES = ATTRIBUTES[:3]

MAX_PHRASE_WORDS = 6

_TOKEN_RE = re.compile(r"\w+|[^\w\s]")

EXTERNAL = "external-file"
FALLBACK = "fallback-lexicon"
HEDGING_LEXICON = "hedging-lexicon"


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.casefold())


@dataclass(frozen=True)
class Lexicon:
    phrases: tuple[str, ...]
    name: str = "lexicon"
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        phrases = tuple(self.phrases)
        object.__setattr__(self, "phrases", phrases)
        if not phrases:
            raise GreenRiskError(f"empty lexicon: {self.name}")
        seen = set()
        index: dict[str, list[tuple[str, tuple[str, ...]]]] = {}
        for phrase in phrases:
            if phrase != phrase.strip():
                raise GreenRiskError(f"phrase has surrounding whitespace: {phrase!r}")
            if phrase != phrase.casefold():
                raise GreenRiskError(f"phrase is not case-folded: {phrase!r}")
            if phrase in seen:
                raise GreenRiskError(f"duplicate phrase in {self.name}: {phrase!r}")
            if not 1 <= len(phrase.split()) <= MAX_PHRASE_WORDS:
                raise GreenRiskError(f"phrase must have 1..{MAX_PHRASE_WORDS} words: {phrase!r}")
            tokens = tuple(tokenize(phrase))
            if not tokens:
                raise GreenRiskError(f"phrase has no tokens: {phrase!r}")
            seen.add(phrase)
            index.setdefault(tokens[0], []).append((phrase, tokens))
        object.__setattr__(self, "_index", index)

    @classmethod
    def from_phrases(cls, phrases: Iterable[str], name: str = "lexicon") -> "Lexicon":
        """Case-fold, strip and deduplicate ``phrases``, keeping first-seen order."""
        cleaned = dict.fromkeys(p.strip().casefold() for p in phrases if p.strip())
        return cls(tuple(cleaned), name=name)

    def __len__(self) -> int:
        return len(self.phrases)

    def __contains__(self, phrase: str) -> bool:
        return phrase.strip().casefold() in self.phrases

    def find(self, text: str) -> list[str]:
        """Distinct phrases present in ``text``, in order of first occurrence."""
        tokens = tokenize(text)
        found: dict[str, None] = {}
        for start, tok in enumerate(tokens):
            for phrase, ptoks in self._index.get(tok, ()):
                if tuple(tokens[start : start + len(ptoks)]) == ptoks:
                    found.setdefault(phrase)
        return list(found)


def load_lexicon(path, name: str | None = None) -> Lexicon:
    """Read a one-phrase-per-line UTF-8 file; ``#`` lines and blank lines are skipped."""
    path = Path(path)
    if not path.is_file():
        raise GreenRiskError(f"lexicon file not found: {path}")
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except UnicodeDecodeError as exc:
        raise GreenRiskError(f"lexicon file is not valid UTF-8: {path}") from exc
    phrases = [ln for ln in lines if ln.strip() and not ln.lstrip().startswith("#")]
    if not phrases:
        raise GreenRiskError(f"empty lexicon: {path}")
    return Lexicon.from_phrases(phrases, name=name or path.stem)


def save_lexicon(lexicon: Lexicon, path) -> None:
    Path(path).write_text("".join(p + "\n" for p in lexicon.phrases), encoding="utf-8")


def _data_path(filename: str) -> Path:
    return Path(str(resources.files("greenrisk").joinpath("data", filename)))


def default_lexicon() -> Lexicon:
    """The shipped legal-deflection list plus the seed examples "not aware" and "unsure"."""
    return load_lexicon(_data_path("deflection_phrases.txt"), name="deflection")


def default_fallbacks() -> dict[str, Lexicon]:
    """Keyword stand-ins for the sentiment/commitment/specificity models.

    These exist so the pipeline runs end to end without model outputs; treat
    them as scaffolding.
    """
    return {
        attr: load_lexicon(_data_path(f"fallback_{attr}.txt"), name=f"fallback-{attr}")
        for attr in MODEL_ATTRIBUTES
    }


def detect_hedging(text: str, lex: Lexicon) -> tuple[int, list[str]]:
    matches = lex.find(text)
    return int(bool(matches)), matches


@dataclass(frozen=True)
class AttributeVector:
    sentiment: int
    commitment: int
    specificity: int
    hedging: int

    def __post_init__(self):
        for attr in ATTRIBUTES:
            object.__setattr__(self, attr, check_binary(getattr(self, attr), attr))

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.sentiment, self.commitment, self.specificity, self.hedging)

    def as_dict(self) -> dict[str, int]:
        return dict(zip(ATTRIBUTES, self.as_tuple()))

    @classmethod
    def from_mapping(cls, data: Mapping) -> "AttributeVector":
        missing = [a for a in ATTRIBUTES if a not in data]
        if missing:
            raise GreenRiskError(f"attribute record missing {', '.join(missing)}")
        return cls(*(data[a] for a in ATTRIBUTES))


@dataclass(frozen=True)
class AttributeSource:
    """Which provider supplied each of the four attributes of one chunk."""

    provenance: Mapping[str, str]

    def __post_init__(self):
        if set(self.provenance) != set(ATTRIBUTES):
            raise GreenRiskError("provenance must cover exactly the four attributes")

    @property
    def kind(self) -> str:
        kinds = {self.provenance[a] for a in MODEL_ATTRIBUTES}
        return kinds.pop() if len(kinds) == 1 else "mixed"


def load_external_scores(path) -> dict[str, dict[str, int]]:
    """Parse a JSONL file of model-produced attribute scores keyed by chunk id.

    Each line needs ``"id"`` and may carry any of sentiment, commitment and
    specificity. Other keys are ignored; hedging always comes from the lexicon.
    """
    path = Path(path)
    if not path.is_file():
        raise GreenRiskError(f"score file not found: {path}")
    scores: dict[str, dict[str, int]] = {}
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise GreenRiskError(f"{path}:{lineno}: malformed JSON ({exc.msg})") from exc
            if not isinstance(record, dict) or not isinstance(record.get("id"), str):
                raise GreenRiskError(f"{path}:{lineno}: expected an object with a string 'id'")
            cid = record["id"]
            if cid in scores:
                raise GreenRiskError(f"duplicate chunk id {cid}")
            partial = {}
            for attr in MODEL_ATTRIBUTES:
                if attr in record:
                    try:
                        partial[attr] = check_binary(record[attr], attr)
                    except GreenRiskError as exc:
                        raise GreenRiskError(f"{path}:{lineno}: {exc}") from exc
            scores[cid] = partial
    return scores


def score_attributes(
    chunk,
    external: Mapping[str, Mapping[str, int]] | None,
    lex: Lexicon,
    fallbacks: Mapping[str, Lexicon] | None = None,
) -> tuple[AttributeVector, AttributeSource]:
    """Assemble the attribute vector of ``chunk`` (anything with ``id`` and ``text``).

    External scores win over fallback lexicons; hedging always comes from ``lex``.
    """
    record = (external or {}).get(chunk.id, {})
    fallbacks = fallbacks or {}
    values: dict[str, int] = {}
    provenance: dict[str, str] = {}
    for attr in MODEL_ATTRIBUTES:
        if attr in record:
            values[attr] = check_binary(record[attr], attr)
            provenance[attr] = EXTERNAL
        elif attr in fallbacks:
            values[attr] = int(bool(fallbacks[attr].find(chunk.text)))
            provenance[attr] = FALLBACK
        else:
            raise GreenRiskError(f"unresolvable attribute {attr} for chunk {chunk.id}")
    values["hedging"], _ = detect_hedging(chunk.text, lex)
    provenance["hedging"] = HEDGING_LEXICON
    return AttributeVector(**values), AttributeSource(provenance)


class AttributeScorer:
    """Bundles the attribute providers so chunks can be scored in bulk."""

    def __init__(self, lexicon: Lexicon | None = None, external=None, fallbacks=None):
        self.lexicon = lexicon if lexicon is not None else default_lexicon()
        self.external = external or {}
        self.fallbacks = fallbacks if fallbacks is not None else {}

    def score(self, chunk) -> tuple[AttributeVector, AttributeSource]:
        return score_attributes(chunk, self.external, self.lexicon, self.fallbacks)

    def transform(self, chunks: Sequence) -> np.ndarray:
        rows = [self.score(c)[0].as_tuple() for c in chunks]
        return np.asarray(rows, dtype=np.int64).reshape(len(rows), 4)


class HedgingDetector(TransformerMixin, BaseEstimator):
    """Stateless transformer mapping texts to a single hedging-flag column.

    Parameters
    ----------
    lexicon : Lexicon, optional
        Phrases to look for. Defaults to the shipped deflection list.
    """

    def __init__(self, lexicon: Lexicon | None = None):
        self.lexicon = lexicon

    def fit(self, X, y=None):
        self.lexicon_ = self.lexicon if self.lexicon is not None else default_lexicon()
        return self

    def transform(self, X) -> np.ndarray:
        lex = getattr(self, "lexicon_", None) or self.lexicon or default_lexicon()
        if isinstance(X, str):
            raise GreenRiskError("expected an iterable of texts, got a single string")
        return np.array([[detect_hedging(t, lex)[0]] for t in X], dtype=np.int64).reshape(-1, 1)

    def matches(self, X) -> list[list[str]]:
        lex = getattr(self, "lexicon_", None) or self.lexicon or default_lexicon()
        return [lex.find(t) for t in X]
