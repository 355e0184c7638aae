"""Assembling the final pretraining example.

Documents are truncated to an equal share of the input budget, joined
with separator tokens, and each selected sentence is replaced by a
single mask token.  The target is the concatenation of the masked
sentences' original words (then the copied sentences'), in document
order, so a decoder can be trained to regenerate them in order.

All token counts here are plain whitespace tokens of the surface text.
A downstream trainer measuring in subwords must re-truncate to its own
budget; these limits exist to bound example size, not to match any
particular vocabulary.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

from .segment import Sentence
from .selection import SelectionResult


class MaskingError(ValueError):
    """A cluster that cannot be assembled into a valid example."""


@dataclass(frozen=True)
class MaskConfig:
    input_token_limit: int = 4096
    output_token_limit: int = 1024
    doc_sep_token: str = "<doc-sep>"
    sent_mask_token: str = "[sent-mask]"
    # Window size a downstream sparse-attention model is expected to use;
    # carried through as metadata, never used in assembly.
    attention_window: int = 512
    lead_separator: bool = True

    def __post_init__(self) -> None:
        if self.input_token_limit <= 0 or self.output_token_limit <= 0:
            raise ValueError("token limits must be positive")
        if not self.doc_sep_token or not self.sent_mask_token:
            raise ValueError("special tokens must be non-empty")
        if self.doc_sep_token == self.sent_mask_token:
            raise ValueError("separator and mask tokens must differ")


@dataclass(frozen=True)
class MaskedExample:
    cluster_id: str
    input_tokens: tuple[str, ...]
    global_attention_indices: tuple[int, ...]
    target_tokens: tuple[str, ...]
    provenance: SelectionResult
    dropped_masked: int = 0


def surface_tokens(sentence: Sentence) -> list[str]:
    return sentence.text.split()


def truncate_per_document(
    sentences: Sequence[Sentence],
    input_token_limit: int,
    num_docs: int,
) -> list[Sentence]:
    """Cut each document's sentence stream to its share of the budget.

    One separator slot is reserved per document, and the remainder is
    split evenly.  Cuts happen at sentence boundaries: the first
    sentence that would cross the per-document budget is dropped along
    with everything after it.  A document whose first sentence is
    already too long contributes nothing; if that leaves the whole
    cluster empty, the cluster is unusable.
    """
    if num_docs < 1:
        raise ValueError("num_docs must be at least 1")
    budget = (input_token_limit - num_docs) // num_docs
    surviving: list[Sentence] = []
    used: dict[int, int] = {}
    cut: set[int] = set()
    for sentence in sorted(sentences, key=lambda s: s.key):
        doc = sentence.doc_index
        if doc in cut:
            continue
        cost = len(surface_tokens(sentence))
        if used.get(doc, 0) + cost > budget:
            cut.add(doc)
            continue
        used[doc] = used.get(doc, 0) + cost
        surviving.append(sentence)
    if not surviving:
        raise MaskingError("cluster untruncatable: no sentence fits the per-document budget")
    return surviving


def build_masked_example(
    cluster_id: str,
    surviving: Sequence[Sentence],
    selection: SelectionResult,
    config: MaskConfig,
    num_docs: int,
) -> MaskedExample:
    """Assemble input/target token streams from truncated sentences.

    ``selection`` refers to the pre-truncation sentences; picks that did
    not survive truncation are dropped from the provenance here (masked
    ones are counted, copied ones simply disappear).  Losing every
    masked sentence is an error because the example would have an empty
    target.
    """
    surviving = sorted(surviving, key=lambda s: s.key)
    surviving_keys = {s.key for s in surviving}
    masked = tuple(k for k in selection.masked if k in surviving_keys)
    copied = tuple(k for k in selection.copied if k in surviving_keys)
    dropped_masked = len(selection.masked) - len(masked)
    if not masked:
        raise MaskingError("empty target: every masked sentence was truncated away")
    kept = set(masked) | set(copied)
    provenance = replace(
        selection,
        masked=masked,
        copied=copied,
        scores={k: v for k, v in selection.scores.items() if k in kept},
    )

    by_doc: dict[int, list[Sentence]] = {}
    for sentence in surviving:
        by_doc.setdefault(sentence.doc_index, []).append(sentence)

    masked_set = set(masked)
    input_tokens: list[str] = []
    attention: list[int] = []
    for doc in range(num_docs):
        if config.lead_separator or doc > 0:
            attention.append(len(input_tokens))
            input_tokens.append(config.doc_sep_token)
        for sentence in by_doc.get(doc, ()):
            if sentence.key in masked_set:
                input_tokens.append(config.sent_mask_token)
            else:
                input_tokens.extend(surface_tokens(sentence))

    by_key = {s.key: s for s in surviving}
    target_tokens: list[str] = []
    for key in masked + copied:
        target_tokens.extend(surface_tokens(by_key[key]))
    target_tokens = target_tokens[: config.output_token_limit]

    return MaskedExample(
        cluster_id=cluster_id,
        input_tokens=tuple(input_tokens),
        global_attention_indices=tuple(attention),
        target_tokens=tuple(target_tokens),
        provenance=provenance,
        dropped_masked=dropped_masked,
    )


@dataclass(frozen=True)
class RoundtripResult:
    """Truthy when the example reconstructs its cluster exactly;
    otherwise carries a first-divergence diagnostic."""

    ok: bool
    diagnostic: str = ""

    def __bool__(self) -> bool:
        return self.ok


def _first_divergence(actual: Sequence[str], expected: Sequence[str], label: str) -> str:
    for i, (a, e) in enumerate(zip(actual, expected)):
        if a != e:
            return f"{label}: first divergence at {i}: {a!r} != {e!r}"
    return f"{label}: length {len(actual)} != {len(expected)}"


def roundtrip_check(
    example: MaskedExample,
    original_sentences: Sequence[Sentence],
    config: MaskConfig,
    num_docs: int | None = None,
) -> RoundtripResult:
    """Verify an example against the sentences it was built from.

    Re-runs truncation, rebuilds the expected target (masked then copied,
    document order, cut at the output limit), substitutes the masked
    originals back into the input, and compares against the truncated
    cluster text.  Also checks that the attention indices are exactly
    the separator positions.
    """
    if num_docs is None:
        num_docs = max(s.doc_index for s in original_sentences) + 1
    try:
        surviving = truncate_per_document(
            original_sentences, config.input_token_limit, num_docs
        )
    except MaskingError as exc:
        return RoundtripResult(False, str(exc))
    by_key = {s.key: s for s in surviving}

    missing = [k for k in (*example.provenance.masked, *example.provenance.copied) if k not in by_key]
    if missing:
        return RoundtripResult(False, f"provenance references non-surviving sentences: {missing}")

    expected_target: list[str] = []
    for key in example.provenance.masked + example.provenance.copied:
        expected_target.extend(surface_tokens(by_key[key]))
    expected_target = expected_target[: config.output_token_limit]
    if list(example.target_tokens) != expected_target:
        return RoundtripResult(
            False, _first_divergence(example.target_tokens, expected_target, "target")
        )

    sep_positions = [
        i for i, tok in enumerate(example.input_tokens) if tok == config.doc_sep_token
    ]
    if list(example.global_attention_indices) != sep_positions:
        return RoundtripResult(
            False,
            f"attention indices {list(example.global_attention_indices)} != "
            f"separator positions {sep_positions}",
        )

    substituted: list[str] = []
    masked_iter = iter(example.provenance.masked)
    for token in example.input_tokens:
        if token == config.sent_mask_token:
            try:
                key = next(masked_iter)
            except StopIteration:
                return RoundtripResult(False, "more mask tokens than masked sentences")
            substituted.extend(surface_tokens(by_key[key]))
        else:
            substituted.append(token)
    leftover = list(masked_iter)
    if leftover:
        return RoundtripResult(False, f"masked sentences never substituted: {leftover}")

    reference: list[str] = []
    ordered = sorted(surviving, key=lambda s: s.key)
    by_doc: dict[int, list[Sentence]] = {}
    for sentence in ordered:
        by_doc.setdefault(sentence.doc_index, []).append(sentence)
    for doc in range(num_docs):
        if config.lead_separator or doc > 0:
            reference.append(config.doc_sep_token)
        for sentence in by_doc.get(doc, ()):
            reference.extend(surface_tokens(sentence))
    if substituted != reference:
        return RoundtripResult(
            False, _first_divergence(substituted, reference, "reconstructed input")
        )
    return RoundtripResult(True)
