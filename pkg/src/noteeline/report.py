"""Evaluation report assembly: one JSON document per notebook plus a
plain-text table renderer for the CLI.

Report shape: {"chi_squared": {...}|null, "consistency": {...},
"proximity": {...}, "session": {...}, "external_judge": {...}|null}.
The chi_squared section needs a handwritten reference corpus and is null
without one; the external_judge slot is filled only when a judge
implementation is plugged in.
"""

from __future__ import annotations

from typing import Any, Optional

from .model import Notebook
from .stylometry import (
    ChiSquaredReport,
    EmbeddingProvider,
    ExternalJudge,
    NoNotes,
    SimilarityReport,
    chi_squared_distance,
    consistency_report,
    notebook_tf_provider,
    relative_improvement,
    session_stats,
    temporal_proximity_report,
)


def expansion_corpus(nb: Notebook) -> str:
    return " ".join(e.text for e in nb.ok_expansions())


def chi_squared_section(
    handwritten: str,
    generated_with: str,
    generated_without: Optional[str],
    n_top: int,
) -> dict[str, Any]:
    with_report: ChiSquaredReport = chi_squared_distance(handwritten, generated_with, n_top)
    section: dict[str, Any] = {
        "n_top_words": with_report.n_top_words,
        "distance_with_onboarding": with_report.distance,
        "distance_without_onboarding": None,
        "relative_improvement_pct": None,
    }
    if generated_without is not None:
        without_report = chi_squared_distance(handwritten, generated_without, n_top)
        section["distance_without_onboarding"] = without_report.distance
        section["relative_improvement_pct"] = relative_improvement(
            with_report.distance, without_report.distance
        )
    return section


def _similarity_section(report: SimilarityReport) -> dict[str, Any]:
    return {
        "mean": report.mean,
        "provider_id": report.provider_id,
        "pairs": [
            {"id_a": a, "id_b": b, "score": score} for a, b, score in report.pair_scores
        ],
    }


def build_report(
    nb: Notebook,
    provider: Optional[EmbeddingProvider] = None,
    handwritten: Optional[str] = None,
    generated_without: Optional[str] = None,
    n_top: int = 500,
    judge: Optional[ExternalJudge] = None,
) -> dict[str, Any]:
    """Assemble the evaluation document. Sections that lack their inputs
    (no expansions yet, no handwritten corpus) are null rather than errors."""
    if provider is None and nb.ok_expansions():
        provider = notebook_tf_provider(nb)

    consistency: Optional[dict[str, Any]] = None
    proximity: Optional[dict[str, float]] = None
    if provider is not None:
        try:
            reports = consistency_report(nb, provider)
            consistency = {
                "micronote_vs_expansion": _similarity_section(reports["micronote_vs_expansion"]),
                "transcript_vs_expansion": _similarity_section(reports["transcript_vs_expansion"]),
            }
        except NoNotes:
            consistency = None
        try:
            proximity = temporal_proximity_report(nb, provider)
        except NoNotes:
            proximity = None

    chi: Optional[dict[str, Any]] = None
    if handwritten is not None:
        chi = chi_squared_section(handwritten, expansion_corpus(nb), generated_without, n_top)

    stats = session_stats(nb)
    external: Optional[dict[str, Any]] = None
    ok = nb.ok_expansions()
    if judge is not None and ok:
        scores = []
        for exp in ok:
            note = nb.get_micronote(exp.micronote_id)
            assert note is not None
            scores.append(judge.score(exp.text, note.text))
        external = {"judge_id": judge.judge_id, "mean_score": sum(scores) / len(scores)}

    return {
        "notebook_id": nb.id,
        "chi_squared": chi,
        "consistency": consistency,
        "proximity": proximity,
        "session": {
            "note_count": stats.note_count,
            "avg_note_chars": stats.avg_note_chars,
            "avg_note_seconds": stats.avg_note_seconds,
            "pause_count": stats.pause_count,
            "seek_count": stats.seek_count,
        },
        "external_judge": external,
    }


# ---------------------------------------------------------------------------
# Plain-text rendering
# ---------------------------------------------------------------------------


def _fmt(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.4f}"
    return str(value)


def _table(rows: list[tuple[str, Any]], title: str) -> list[str]:
    width = max(len(label) for label, _ in rows)
    lines = [title, "-" * len(title)]
    for label, value in rows:
        lines.append(f"{label.ljust(width)}  {_fmt(value)}")
    return lines


def render_text_report(report: dict[str, Any]) -> str:
    """Fixed-format table rendering; identical reports render byte-identically."""
    blocks: list[list[str]] = []

    chi = report.get("chi_squared")
    if chi is not None:
        blocks.append(
            _table(
                [
                    ("n_top_words", chi["n_top_words"]),
                    ("distance (with onboarding)", chi["distance_with_onboarding"]),
                    ("distance (w/o onboarding)", chi["distance_without_onboarding"]),
                    ("relative improvement %", chi["relative_improvement_pct"]),
                ],
                "Chi-squared style distance",
            )
        )

    consistency = report.get("consistency")
    if consistency is not None:
        blocks.append(
            _table(
                [
                    (
                        "micronote vs expansion (mean)",
                        consistency["micronote_vs_expansion"]["mean"],
                    ),
                    (
                        "transcript vs expansion (mean)",
                        consistency["transcript_vs_expansion"]["mean"],
                    ),
                    ("provider", consistency["micronote_vs_expansion"]["provider_id"]),
                ],
                "Consistency (cosine similarity)",
            )
        )

    proximity = report.get("proximity")
    if proximity is not None:
        rows = [(bucket, proximity.get(bucket)) for bucket in ("<10s", "10-40s", ">40s")]
        blocks.append(_table(rows, "Temporal proximity (mean similarity)"))

    session = report["session"]
    blocks.append(
        _table(
            [
                ("note count", session["note_count"]),
                ("avg note chars", session["avg_note_chars"]),
                ("avg note seconds", session["avg_note_seconds"]),
                ("pause count", session["pause_count"]),
                ("seek count", session["seek_count"]),
            ],
            "Session stats",
        )
    )

    return "\n\n".join("\n".join(block) for block in blocks) + "\n"
