"""Stylometric and consistency metrics over notebooks.

Covers four report families:

* word-choice style: word-length composition curves and the chi-squared
  distance over the most frequent words of two corpora combined (lower
  distance = closer style),
* embedding consistency: cosine similarity between micronotes, their
  expansions, and the transcript windows they came from,
* temporal-proximity redundancy: similarity of consecutive expansions
  bucketed by capture-time gap,
* session efficiency: note length/time and playback-disruption counts.

Everything here is pure and deterministic. The embedding provider is
pluggable; a term-frequency provider ships as the offline default, and any
sentence-embedding model can be slotted in through the same interface.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from .model import Notebook
from .transcript import (
    DEFAULT_WINDOW_AFTER,
    DEFAULT_WINDOW_BEFORE,
    window_around,
)

MAX_WORD_LENGTH_BUCKET = 15
DEFAULT_N_TOP_WORDS = 500

# tokens are runs of alphanumerics, allowing internal apostrophes ("don't");
# underscore is excluded from the alphanumeric class on purpose
_TOKEN_RE = re.compile(r"[^\W_]+(?:'[^\W_]+)*", re.UNICODE)


class EmptyCorpus(ValueError):
    pass


class EmptyProfile(ValueError):
    pass


class ZeroVector(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


class NoNotes(ValueError):
    pass


@dataclass(frozen=True)
class StyleProfile:
    """Token count, word-length histogram, and word frequencies of one text."""

    token_count: int
    word_length_hist: dict[int, int]
    word_freq: dict[str, int]


@dataclass(frozen=True)
class ChiSquaredReport:
    n_top_words: int
    distance: float
    per_word_terms: list[tuple[str, float]]


@dataclass(frozen=True)
class SimilarityReport:
    pair_scores: list[tuple[str, str, float]]
    mean: float
    provider_id: str = ""


@dataclass(frozen=True)
class SessionStats:
    note_count: int
    avg_note_chars: float
    avg_note_seconds: float
    pause_count: int
    seek_count: int


class EmbeddingProvider(Protocol):
    """Deterministic text-to-vector encoder: equal text, equal vector."""

    provider_id: str
    dimension: int

    def embed(self, text: str) -> np.ndarray: ...


class ExternalJudge(Protocol):
    """Slot for external quality scorers (no implementation ships here;
    linguistic-quality and hallucination judges need their own models)."""

    judge_id: str

    def score(self, text: str, reference: str) -> float: ...


def tokenize(text: str) -> list[str]:
    """Lowercase tokens: split on anything that is neither alphanumeric nor
    an internal apostrophe; empties dropped."""
    return _TOKEN_RE.findall(text.lower())


def word_length(token: str) -> int:
    """Alphanumeric character count of a token (apostrophes excluded)."""
    return sum(1 for ch in token if ch != "'")


def style_profile(text: str) -> StyleProfile:
    """Tokenize and accumulate the word-length histogram and word frequencies.

    Lengths of 15 and above share the top bucket. Empty text yields a zero
    profile rather than an error.
    """
    hist: dict[int, int] = {}
    freq: dict[str, int] = {}
    count = 0
    for token in tokenize(text):
        count += 1
        bucket = min(word_length(token), MAX_WORD_LENGTH_BUCKET)
        hist[bucket] = hist.get(bucket, 0) + 1
        freq[token] = freq.get(token, 0) + 1
    return StyleProfile(token_count=count, word_length_hist=hist, word_freq=freq)


def mendenhall_curve(profile: StyleProfile) -> np.ndarray:
    """Relative frequency of word lengths 1..15 (a composition characteristic
    curve); entries sum to 1 for any non-empty profile."""
    if profile.token_count == 0:
        raise EmptyProfile("cannot compute a curve for an empty profile")
    curve = np.zeros(MAX_WORD_LENGTH_BUCKET, dtype=float)
    for length, count in profile.word_length_hist.items():
        curve[length - 1] = count / profile.token_count
    return curve


def chi_squared_distance(
    corpus_a: str, corpus_b: str, n_top: int = DEFAULT_N_TOP_WORDS
) -> ChiSquaredReport:
    """Chi-squared style distance over the n_top most frequent words of the
    joined corpora (ties broken lexicographically).

    For each selected word, the expected count in each corpus is the joint
    count split proportionally to corpus size; the distance sums
    (observed - expected)^2 / expected over both corpora.
    """
    prof_a = style_profile(corpus_a)
    prof_b = style_profile(corpus_b)
    if prof_a.token_count == 0 or prof_b.token_count == 0:
        raise EmptyCorpus("both corpora must contain at least one token")

    joint: dict[str, int] = dict(prof_a.word_freq)
    for word, count in prof_b.word_freq.items():
        joint[word] = joint.get(word, 0) + count

    top = sorted(joint.items(), key=lambda kv: (-kv[1], kv[0]))[:n_top]

    total_a = prof_a.token_count
    total_b = prof_b.token_count
    share_a = total_a / (total_a + total_b)
    share_b = total_b / (total_a + total_b)

    terms: list[tuple[str, float]] = []
    distance = 0.0
    for word, joint_count in top:
        observed_a = prof_a.word_freq.get(word, 0)
        observed_b = prof_b.word_freq.get(word, 0)
        expected_a = joint_count * share_a
        expected_b = joint_count * share_b
        term = (observed_a - expected_a) ** 2 / expected_a
        term += (observed_b - expected_b) ** 2 / expected_b
        terms.append((word, term))
        distance += term

    return ChiSquaredReport(n_top_words=len(top), distance=distance, per_word_terms=terms)


def style_match_report(
    handwritten: str,
    generated_with: str,
    generated_without: str,
    n_top: int = DEFAULT_N_TOP_WORDS,
) -> float:
    """Relative style improvement (%) from personalization.

    Compares chi-squared distances of the two generated corpora against the
    user's handwritten notes: positive means the personalized arm sits closer.
    """
    d_with = chi_squared_distance(handwritten, generated_with, n_top).distance
    d_without = chi_squared_distance(handwritten, generated_without, n_top).distance
    return relative_improvement(d_with, d_without)


def relative_improvement(d_with: float, d_without: float) -> float:
    """(d_without - d_with) / d_without * 100; positive = personalization helped."""
    return (d_without - d_with) / d_without * 100.0


def mean_improvement(pairs: list[tuple[float, float]]) -> float:
    """Improvement computed from column means of (d_with, d_without) rows.

    This is the aggregate convention for multi-user tables: average each
    distance column first, then apply the relative-improvement formula.
    """
    if not pairs:
        raise EmptyCorpus("no distance pairs")
    avg_with = sum(p[0] for p in pairs) / len(pairs)
    avg_without = sum(p[1] for p in pairs) / len(pairs)
    return relative_improvement(avg_with, avg_without)


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Standard cosine similarity, clamped to [-1, 1] against rounding."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatch(f"dimensions {a.shape} vs {b.shape}")
    norm_a = float(np.linalg.norm(a))
    norm_b = float(np.linalg.norm(b))
    if norm_a == 0.0 or norm_b == 0.0:
        raise ZeroVector("cosine undefined for all-zero vectors")
    value = float(np.dot(a, b) / (norm_a * norm_b))
    return max(-1.0, min(1.0, value))


class TfEmbeddingProvider:
    """Term-frequency vectors over a fixed vocabulary (offline, deterministic
    stand-in for a neural sentence encoder)."""

    provider_id = "tf-v1"

    def __init__(self, corpus: str) -> None:
        vocabulary = sorted(set(tokenize(corpus)))
        if not vocabulary:
            raise EmptyCorpus("vocabulary corpus has no tokens")
        self._index = {word: i for i, word in enumerate(vocabulary)}
        self.dimension = len(vocabulary)

    def embed(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dimension, dtype=float)
        for token in tokenize(text):
            i = self._index.get(token)
            if i is not None:
                vec[i] += 1.0
        return vec


def tf_embedding_provider(corpus: str) -> TfEmbeddingProvider:
    return TfEmbeddingProvider(corpus)


def _notebook_corpus(nb: Notebook) -> str:
    parts = [m.text for m in nb.micronotes]
    parts.extend(e.text for e in nb.ok_expansions())
    parts.extend(seg.text for seg in nb.transcript.segments)
    return " ".join(parts)


def notebook_tf_provider(nb: Notebook) -> TfEmbeddingProvider:
    """TF provider whose vocabulary covers every text in the notebook."""
    return TfEmbeddingProvider(_notebook_corpus(nb))


def consistency_report(
    nb: Notebook,
    provider: EmbeddingProvider,
    window_before: float = DEFAULT_WINDOW_BEFORE,
    window_after: float = DEFAULT_WINDOW_AFTER,
) -> dict[str, SimilarityReport]:
    """Similarity of each expansion to its micronote and to its transcript
    window; a higher micronote score than window score indicates expansions
    follow the note rather than replicate the transcript."""
    expansions = nb.ok_expansions()
    if not expansions:
        raise NoNotes("no ok expansions to score")

    note_pairs: list[tuple[str, str, float]] = []
    window_pairs: list[tuple[str, str, float]] = []
    for exp in expansions:
        note = nb.get_micronote(exp.micronote_id)
        assert note is not None  # guaranteed by notebook validation
        exp_vec = provider.embed(exp.text)
        note_pairs.append(
            (
                f"micronote:{note.id}",
                f"expansion:{note.id}",
                cosine_similarity(provider.embed(note.text), exp_vec),
            )
        )
        window = window_around(nb.transcript, note.video_time, window_before, window_after)
        window_pairs.append(
            (
                f"window:{note.id}",
                f"expansion:{note.id}",
                cosine_similarity(provider.embed(window.text), exp_vec),
            )
        )

    def report(pairs: list[tuple[str, str, float]]) -> SimilarityReport:
        mean = sum(p[2] for p in pairs) / len(pairs)
        return SimilarityReport(pair_scores=pairs, mean=mean, provider_id=provider.provider_id)

    return {
        "micronote_vs_expansion": report(note_pairs),
        "transcript_vs_expansion": report(window_pairs),
    }


PROXIMITY_BUCKETS = ("<10s", "10-40s", ">40s")


def temporal_proximity_report(
    nb: Notebook, provider: EmbeddingProvider
) -> dict[str, float]:
    """Mean expansion similarity of consecutive note pairs, bucketed by the
    capture-time gap (<10s, 10-40s, >40s). Empty buckets are absent."""
    expansions = {e.micronote_id: e for e in nb.ok_expansions()}
    notes = [m for m in nb.micronotes if m.id in expansions]
    if len(notes) < 2:
        raise NoNotes("need at least two ok expansions")

    sums: dict[str, float] = {}
    counts: dict[str, int] = {}
    for left, right in zip(notes, notes[1:]):
        gap = abs(right.video_time - left.video_time)
        if gap < 10.0:
            bucket = "<10s"
        elif gap <= 40.0:
            bucket = "10-40s"
        else:
            bucket = ">40s"
        score = cosine_similarity(
            provider.embed(expansions[left.id].text),
            provider.embed(expansions[right.id].text),
        )
        sums[bucket] = sums.get(bucket, 0.0) + score
        counts[bucket] = counts.get(bucket, 0) + 1

    return {bucket: sums[bucket] / counts[bucket] for bucket in PROXIMITY_BUCKETS if bucket in counts}


def session_stats(nb: Notebook) -> SessionStats:
    """Efficiency counters: note count/length/time plus pause and seek counts.

    A pure fold over the notebook; event order does not matter. Averages are
    0.0 when there are no notes.
    """
    count = len(nb.micronotes)
    if count:
        avg_chars = sum(len(m.text) for m in nb.micronotes) / count
        avg_seconds = sum(
            (m.finished_wall - m.created_wall).total_seconds() for m in nb.micronotes
        ) / count
    else:
        avg_chars = 0.0
        avg_seconds = 0.0
    return SessionStats(
        note_count=count,
        avg_note_chars=avg_chars,
        avg_note_seconds=avg_seconds,
        pause_count=sum(1 for e in nb.events if e.kind == "pause"),
        seek_count=sum(1 for e in nb.events if e.kind == "seek"),
    )
