"""Entity mention extraction and the document-frequency pyramid.

Two sources of mentions are supported: a lightweight rule-based
extractor (capitalized name runs, years, quantities with units) and
caller-provided annotations.  Mentions sharing a normalized surface form
are grouped into pyramid entries ranked by how many distinct documents
contain them; entities seen in a single document are discarded because
they carry no cross-document signal.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .segment import Sentence

log = logging.getLogger(__name__)


class EntitySource(Enum):
    RULES = "rules"
    PROVIDED = "provided"


@dataclass(frozen=True)
class EntityMention:
    surface: str
    normalized: str
    doc_index: int
    sent_index: int


@dataclass(frozen=True)
class PyramidEntry:
    """One entity of the pyramid: its normalized form, how many distinct
    documents mention it, and every (doc_index, sent_index) location."""

    entity: str
    doc_frequency: int
    locations: tuple[tuple[int, int], ...]


def normalize_surface(surface: str) -> str:
    return " ".join(surface.split()).casefold()


def _mention(surface: str, doc_index: int, sent_index: int) -> EntityMention:
    return EntityMention(
        surface=surface,
        normalized=normalize_surface(surface),
        doc_index=doc_index,
        sent_index=sent_index,
    )


# Words that are capitalized for grammatical reasons, not because they
# name anything.  A lone capitalized word matching this set is never a
# mention; a name run that starts a sentence sheds a leading match
# ("The United States" -> "United States").
_FUNCTION_WORDS = frozenset(
    """
    a an the this that these those some any each every no
    i you he she it we they me him her us them my your his its our their
    who whom whose what which when where why how
    and but or nor so yet for if as at by in of on to up with
    from into onto over under after before during about against between
    through within without along across behind beyond near
    is are was were be been being am do does did has have had will would
    can could may might must shall should
    not only just even also still yet too very
    however meanwhile moreover nevertheless nonetheless furthermore
    finally then now here there yesterday today tomorrow
    """.split()
)

_TRAILING_PUNCT = ".,;:!?\"'’”)]}»›"
_LEADING_PUNCT = "\"'‘“«‹([{"

_YEAR_RE = re.compile(r"(?<!\d)[12]\d{3}(?!\d)")
_NUMBER = r"\d{1,3}(?:,\d{3})+|\d+(?:\.\d+)?"
_UNITS = (
    "acres?|hectares?|miles?|kilometers?|km|meters?|feet|ft|"
    "percent|kg|tons?|tonnes?|pounds?|lbs|"
    "people|residents|homes?|houses?|buildings?|structures?|firefighters?|"
    "dollars?|euros?|billion|million|thousand"
)
_QUANTITY_RE = re.compile(rf"(?:{_NUMBER})\s*(?:{_UNITS})\b", re.IGNORECASE)


def _word_runs(text: str) -> Iterable[tuple[int, list[str]]]:
    """Yield (token_position, words) for each maximal capitalized run."""
    stripped: list[tuple[int, str]] = []
    for pos, raw in enumerate(text.split()):
        word = raw.strip(_TRAILING_PUNCT).lstrip(_LEADING_PUNCT)
        stripped.append((pos, word))
    run: list[str] = []
    run_start = 0
    for pos, word in stripped:
        if word and word[0].isupper() and word[0].isalpha():
            if not run:
                run_start = pos
            run.append(word)
        else:
            if run:
                yield run_start, run
            run = []
    if run:
        yield run_start, run


def _runs_to_mentions(sentence: Sentence) -> Iterable[EntityMention]:
    for start_pos, words in _word_runs(sentence.text):
        if start_pos == 0:
            while words and words[0].casefold() in _FUNCTION_WORDS:
                words = words[1:]
        if not words:
            continue
        if len(words) == 1 and words[0].casefold() in _FUNCTION_WORDS:
            continue
        yield _mention(" ".join(words), sentence.doc_index, sentence.sent_index)


def extract_entities_rules(sentences: Sequence[Sentence]) -> list[EntityMention]:
    """Extract mentions from segmented sentences with surface rules only.

    Covers three shapes: maximal runs of capitalized words (sentence-
    initial function words are not treated as names), four-digit years,
    and number-plus-unit quantities such as "1,600 acres".
    """
    mentions: list[EntityMention] = []
    for sentence in sentences:
        mentions.extend(_runs_to_mentions(sentence))
        for match in _YEAR_RE.finditer(sentence.text):
            mentions.append(_mention(match.group(), sentence.doc_index, sentence.sent_index))
        for match in _QUANTITY_RE.finditer(sentence.text):
            mentions.append(_mention(match.group(), sentence.doc_index, sentence.sent_index))
    return mentions


def extract_entities_provided(
    sentences: Sequence[Sentence],
    annotations: Sequence,
) -> list[EntityMention]:
    """Locate caller-provided (surface, doc) annotations in the cluster.

    Each annotation is pinned to the first sentence of its document that
    contains the surface form (case-insensitive).  Annotations that
    cannot be located are dropped with a warning so one bad record does
    not sink the cluster.
    """
    by_doc: dict[int, list[Sentence]] = {}
    for sentence in sentences:
        by_doc.setdefault(sentence.doc_index, []).append(sentence)
    mentions: list[EntityMention] = []
    for ann in annotations:
        needle = normalize_surface(ann.surface)
        hit = None
        for sentence in by_doc.get(ann.doc_index, ()):
            if needle in " ".join(sentence.text.split()).casefold():
                hit = sentence
                break
        if hit is None:
            log.warning(
                "entity %r not found in document %d; dropping annotation",
                ann.surface,
                ann.doc_index,
            )
            continue
        mentions.append(_mention(ann.surface, hit.doc_index, hit.sent_index))
    return mentions


def extract_entities(
    sentences: Sequence[Sentence],
    source: EntitySource = EntitySource.RULES,
    annotations: Sequence | None = None,
) -> list[EntityMention]:
    """Dispatch on the configured mention source.

    PROVIDED falls back to the rule extractor when a cluster carries no
    annotations at all, so mixed corpora still mask every cluster.
    """
    if source is EntitySource.PROVIDED and annotations:
        return extract_entities_provided(sentences, annotations)
    return extract_entities_rules(sentences)


def build_pyramid(mentions: Iterable[EntityMention], num_docs: int) -> list[PyramidEntry]:
    """Group mentions into pyramid entries ordered by document frequency.

    Frequency counts distinct documents, not raw mentions.  Entities
    confined to one document are removed.  Ties break deterministically:
    earliest first location, then normalized form.
    """
    grouped: dict[str, list[EntityMention]] = {}
    for mention in mentions:
        if not 0 <= mention.doc_index < num_docs:
            raise ValueError(
                f"mention {mention.surface!r} references document "
                f"{mention.doc_index} of {num_docs}"
            )
        grouped.setdefault(mention.normalized, []).append(mention)

    entries: list[PyramidEntry] = []
    for normalized, group in grouped.items():
        doc_frequency = len({m.doc_index for m in group})
        if doc_frequency < 2:
            continue
        locations = tuple(sorted({(m.doc_index, m.sent_index) for m in group}))
        entries.append(
            PyramidEntry(entity=normalized, doc_frequency=doc_frequency, locations=locations)
        )
    entries.sort(key=lambda e: (-e.doc_frequency, e.locations[0], e.entity))
    return entries
