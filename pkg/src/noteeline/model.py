"""Shared domain types, validation, and JSON (de)serialization.

Every type here is treated as an immutable value: operations elsewhere build
new instances instead of mutating, so values are safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Any, Optional

ORDERING_MODES = ("by_time", "by_theme")
EVENT_KINDS = ("play", "pause", "seek", "rate_change")
EXPANSION_STATUSES = ("ok", "refused", "failed")

MICRONOTE_MAX_CHARS = 500
CUE_QUESTION_COUNT = 5
CUE_OPTION_COUNT = 4
ONBOARDING_EXAMPLE_COUNT = 3


@dataclass(frozen=True)
class TranscriptSegment:
    """One timed caption cue: text spoken during [start, start + duration)."""

    text: str
    start: float
    duration: float

    @property
    def end(self) -> float:
        return self.start + self.duration


@dataclass(frozen=True)
class Transcript:
    video_ref: str
    language: str
    segments: tuple[TranscriptSegment, ...]

    def __init__(self, video_ref: str, language: str, segments) -> None:
        object.__setattr__(self, "video_ref", video_ref)
        object.__setattr__(self, "language", language)
        object.__setattr__(self, "segments", tuple(segments))


@dataclass(frozen=True)
class Micronote:
    """The user's shorthand jotting, stamped against video playback.

    video_time is the playback position when capture began (first keystroke);
    finished_wall - created_wall is the per-note writing time.
    """

    id: str
    text: str
    video_time: float
    created_wall: datetime
    finished_wall: datetime


@dataclass(frozen=True)
class ExpandedNote:
    """LLM-generated full-sentence form of one micronote."""

    micronote_id: str
    text: str
    model_id: str
    prompt_fingerprint: str
    created_wall: datetime
    status: str  # ok | refused | failed
    failure_reason: Optional[str] = None


@dataclass(frozen=True)
class OnboardingExample:
    """(transcript excerpt, keypoint, full note) triple encoding user style."""

    clip_ref: str
    transcript_excerpt: str
    keypoint: str
    full_note: str


@dataclass(frozen=True)
class UserProfile:
    user_id: str
    examples: tuple[OnboardingExample, ...] = ()

    def __init__(self, user_id: str, examples=()) -> None:
        object.__setattr__(self, "user_id", user_id)
        object.__setattr__(self, "examples", tuple(examples))

    @property
    def onboarded(self) -> bool:
        return len(self.examples) == ONBOARDING_EXAMPLE_COUNT


@dataclass(frozen=True)
class ThemeAssignment:
    theme_name: str
    note_ids: tuple[str, ...]

    def __init__(self, theme_name: str, note_ids) -> None:
        object.__setattr__(self, "theme_name", theme_name)
        object.__setattr__(self, "note_ids", tuple(note_ids))


@dataclass(frozen=True)
class CueQuestion:
    question: str
    options: tuple[str, str, str, str]
    answer_index: int

    def __init__(self, question: str, options, answer_index: int) -> None:
        object.__setattr__(self, "question", question)
        object.__setattr__(self, "options", tuple(options))
        object.__setattr__(self, "answer_index", answer_index)


@dataclass(frozen=True)
class PlaybackEvent:
    kind: str  # play | pause | seek | rate_change
    video_time: float
    wall: datetime
    target_time: Optional[float] = None  # seek only


@dataclass(frozen=True)
class Notebook:
    """One notetaking session: notes, synthesis outputs, and playback log."""

    id: str
    title: str
    user_id: str
    transcript: Transcript
    micronotes: tuple[Micronote, ...] = ()
    expansions: dict[str, ExpandedNote] = field(default_factory=dict)
    themes: Optional[tuple[ThemeAssignment, ...]] = None
    cue_questions: Optional[tuple[CueQuestion, ...]] = None
    summary: Optional[str] = None
    events: tuple[PlaybackEvent, ...] = ()
    ordering_mode: str = "by_time"
    cue_nonce: int = 0

    def __init__(
        self,
        id: str,
        title: str,
        user_id: str,
        transcript: Transcript,
        micronotes=(),
        expansions: Optional[dict[str, ExpandedNote]] = None,
        themes=None,
        cue_questions=None,
        summary: Optional[str] = None,
        events=(),
        ordering_mode: str = "by_time",
        cue_nonce: int = 0,
    ) -> None:
        object.__setattr__(self, "id", id)
        object.__setattr__(self, "title", title)
        object.__setattr__(self, "user_id", user_id)
        object.__setattr__(self, "transcript", transcript)
        object.__setattr__(self, "micronotes", tuple(micronotes))
        object.__setattr__(self, "expansions", dict(expansions or {}))
        object.__setattr__(self, "themes", None if themes is None else tuple(themes))
        object.__setattr__(
            self, "cue_questions", None if cue_questions is None else tuple(cue_questions)
        )
        object.__setattr__(self, "summary", summary)
        object.__setattr__(self, "events", tuple(events))
        object.__setattr__(self, "ordering_mode", ordering_mode)
        object.__setattr__(self, "cue_nonce", cue_nonce)

    def micronote_ids(self) -> list[str]:
        return [m.id for m in self.micronotes]

    def get_micronote(self, note_id: str) -> Optional[Micronote]:
        for m in self.micronotes:
            if m.id == note_id:
                return m
        return None

    def ok_expansions(self) -> list[ExpandedNote]:
        """Expansions with status ok, in micronote capture order."""
        out = []
        for m in self.micronotes:
            exp = self.expansions.get(m.id)
            if exp is not None and exp.status == "ok":
                out.append(exp)
        return out

    def with_changes(self, **kwargs) -> "Notebook":
        return replace(self, **kwargs)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def _is_blank(text: str) -> bool:
    return not text.strip()


def validate_notebook(nb: Notebook) -> list[str]:
    """Check every type invariant; return one "field: rule" string per violation.

    Pure and total: never raises, [] iff the notebook is well formed.
    """
    violations: list[str] = []

    prev_start = None
    for i, seg in enumerate(nb.transcript.segments):
        if seg.start < 0:
            violations.append(f"transcript.segments[{i}].start: must be >= 0")
        if seg.duration <= 0:
            violations.append(f"transcript.segments[{i}].duration: must be > 0")
        if _is_blank(seg.text):
            violations.append(f"transcript.segments[{i}].text: must be non-empty")
        if prev_start is not None and seg.start < prev_start:
            violations.append(
                f"transcript.segments[{i}]: starts must be non-decreasing"
            )
        prev_start = seg.start

    seen_ids: set[str] = set()
    for i, note in enumerate(nb.micronotes):
        if note.id in seen_ids:
            violations.append(f"micronotes[{i}].id: duplicate id {note.id!r}")
        seen_ids.add(note.id)
        if _is_blank(note.text):
            violations.append(f"micronotes[{i}].text: must be non-empty")
        if len(note.text) > MICRONOTE_MAX_CHARS:
            violations.append(
                f"micronotes[{i}].text: length {len(note.text)} exceeds {MICRONOTE_MAX_CHARS}"
            )
        if note.video_time < 0:
            violations.append(f"micronotes[{i}].video_time: must be >= 0")
        if note.finished_wall < note.created_wall:
            violations.append(
                f"micronotes[{i}]: finished_wall must be >= created_wall"
            )

    known = {m.id for m in nb.micronotes}
    for key, exp in nb.expansions.items():
        if key not in known:
            violations.append(f"expansions: unknown micronote_id {key!r}")
        if exp.micronote_id != key:
            violations.append(
                f"expansions[{key!r}]: micronote_id {exp.micronote_id!r} does not match key"
            )
        if exp.status not in EXPANSION_STATUSES:
            violations.append(f"expansions[{key!r}].status: unknown status {exp.status!r}")
        if exp.status == "ok" and _is_blank(exp.text):
            violations.append(f"expansions[{key!r}].text: must be non-empty when status ok")

    if nb.themes is not None:
        themed: set[str] = set()
        for i, theme in enumerate(nb.themes):
            if _is_blank(theme.theme_name):
                violations.append(f"themes[{i}].theme_name: must be non-empty")
            if not theme.note_ids:
                violations.append(f"themes[{i}].note_ids: must be non-empty")
            for note_id in theme.note_ids:
                if note_id in themed:
                    violations.append(
                        f"themes[{i}]: note id {note_id!r} appears in two themes"
                    )
                themed.add(note_id)
                if note_id not in known:
                    violations.append(f"themes[{i}]: unknown note id {note_id!r}")

    if nb.cue_questions is not None:
        if len(nb.cue_questions) != CUE_QUESTION_COUNT:
            violations.append(
                f"cue_questions: length {CUE_QUESTION_COUNT} required, got {len(nb.cue_questions)}"
            )
        for i, q in enumerate(nb.cue_questions):
            if _is_blank(q.question):
                violations.append(f"cue_questions[{i}].question: must be non-empty")
            if len(q.options) != CUE_OPTION_COUNT:
                violations.append(
                    f"cue_questions[{i}].options: exactly {CUE_OPTION_COUNT} options required"
                )
            trimmed = [o.strip() for o in q.options]
            if len(set(trimmed)) != len(trimmed):
                violations.append(
                    f"cue_questions[{i}].options: options must be pairwise distinct"
                )
            if not (0 <= q.answer_index < CUE_OPTION_COUNT):
                violations.append(
                    f"cue_questions[{i}].answer_index: must be in [0,{CUE_OPTION_COUNT - 1}]"
                )

    for i, event in enumerate(nb.events):
        if event.kind not in EVENT_KINDS:
            violations.append(f"events[{i}].kind: unknown kind {event.kind!r}")
        if event.kind == "seek" and event.target_time is None:
            violations.append(f"events[{i}].target_time: required for seek")
        if event.kind != "seek" and event.target_time is not None:
            violations.append(f"events[{i}].target_time: only allowed for seek")

    if nb.ordering_mode not in ORDERING_MODES:
        violations.append(f"ordering_mode: unknown mode {nb.ordering_mode!r}")
    if nb.ordering_mode == "by_theme" and nb.themes is None:
        violations.append("ordering_mode: by_theme requires themes")

    return violations


def validate_profile(profile: UserProfile) -> list[str]:
    """Profile invariants: 0 examples (not onboarded) or exactly 3."""
    violations: list[str] = []
    n = len(profile.examples)
    if n not in (0, ONBOARDING_EXAMPLE_COUNT):
        violations.append(
            f"examples: length must be 0 or {ONBOARDING_EXAMPLE_COUNT}, got {n}"
        )
    for i, ex in enumerate(profile.examples):
        for fname in ("transcript_excerpt", "keypoint", "full_note"):
            if _is_blank(getattr(ex, fname)):
                violations.append(f"examples[{i}].{fname}: must be non-empty")
    return violations


# ---------------------------------------------------------------------------
# JSON-ready dict (de)serialization
# ---------------------------------------------------------------------------


def _dt_to_str(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).isoformat()


def _dt_from_str(raw: str) -> datetime:
    # accept RFC-3339 "Z" suffixes (fromisoformat only learned them in 3.11)
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    dt = datetime.fromisoformat(raw)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt


def parse_timestamp(raw: str) -> datetime:
    """Parse an ISO-8601/RFC-3339 timestamp into an aware UTC datetime."""
    return _dt_from_str(raw)


def segment_to_dict(seg: TranscriptSegment) -> dict[str, Any]:
    return {"text": seg.text, "start": seg.start, "duration": seg.duration}


def transcript_to_dict(t: Transcript) -> dict[str, Any]:
    return {
        "video_ref": t.video_ref,
        "language": t.language,
        "segments": [segment_to_dict(s) for s in t.segments],
    }


def transcript_from_dict(d: dict[str, Any]) -> Transcript:
    return Transcript(
        video_ref=d["video_ref"],
        language=d["language"],
        segments=[
            TranscriptSegment(text=s["text"], start=float(s["start"]), duration=float(s["duration"]))
            for s in d["segments"]
        ],
    )


def micronote_to_dict(m: Micronote) -> dict[str, Any]:
    return {
        "id": m.id,
        "text": m.text,
        "video_time": m.video_time,
        "created_wall": _dt_to_str(m.created_wall),
        "finished_wall": _dt_to_str(m.finished_wall),
    }


def micronote_from_dict(d: dict[str, Any]) -> Micronote:
    return Micronote(
        id=d["id"],
        text=d["text"],
        video_time=float(d["video_time"]),
        created_wall=_dt_from_str(d["created_wall"]),
        finished_wall=_dt_from_str(d["finished_wall"]),
    )


def expansion_to_dict(e: ExpandedNote) -> dict[str, Any]:
    return {
        "micronote_id": e.micronote_id,
        "text": e.text,
        "model_id": e.model_id,
        "prompt_fingerprint": e.prompt_fingerprint,
        "created_wall": _dt_to_str(e.created_wall),
        "status": e.status,
        "failure_reason": e.failure_reason,
    }


def expansion_from_dict(d: dict[str, Any]) -> ExpandedNote:
    return ExpandedNote(
        micronote_id=d["micronote_id"],
        text=d["text"],
        model_id=d["model_id"],
        prompt_fingerprint=d["prompt_fingerprint"],
        created_wall=_dt_from_str(d["created_wall"]),
        status=d["status"],
        failure_reason=d.get("failure_reason"),
    )


def example_to_dict(ex: OnboardingExample) -> dict[str, Any]:
    return {
        "clip_ref": ex.clip_ref,
        "transcript_excerpt": ex.transcript_excerpt,
        "keypoint": ex.keypoint,
        "full_note": ex.full_note,
    }


def example_from_dict(d: dict[str, Any]) -> OnboardingExample:
    return OnboardingExample(
        clip_ref=d["clip_ref"],
        transcript_excerpt=d["transcript_excerpt"],
        keypoint=d["keypoint"],
        full_note=d["full_note"],
    )


def profile_to_dict(p: UserProfile) -> dict[str, Any]:
    return {
        "user_id": p.user_id,
        "examples": [example_to_dict(ex) for ex in p.examples],
    }


def profile_from_dict(d: dict[str, Any]) -> UserProfile:
    return UserProfile(
        user_id=d["user_id"],
        examples=[example_from_dict(ex) for ex in d["examples"]],
    )


def theme_to_dict(t: ThemeAssignment) -> dict[str, Any]:
    return {"theme_name": t.theme_name, "note_ids": list(t.note_ids)}


def theme_from_dict(d: dict[str, Any]) -> ThemeAssignment:
    return ThemeAssignment(theme_name=d["theme_name"], note_ids=d["note_ids"])


def cue_to_dict(q: CueQuestion) -> dict[str, Any]:
    return {
        "question": q.question,
        "options": list(q.options),
        "answer_index": q.answer_index,
    }


def cue_from_dict(d: dict[str, Any]) -> CueQuestion:
    return CueQuestion(
        question=d["question"], options=d["options"], answer_index=int(d["answer_index"])
    )


def event_to_dict(e: PlaybackEvent) -> dict[str, Any]:
    d: dict[str, Any] = {
        "kind": e.kind,
        "video_time": e.video_time,
        "wall": _dt_to_str(e.wall),
    }
    if e.target_time is not None:
        d["target_time"] = e.target_time
    return d


def event_from_dict(d: dict[str, Any]) -> PlaybackEvent:
    return PlaybackEvent(
        kind=d["kind"],
        video_time=float(d["video_time"]),
        wall=_dt_from_str(d["wall"]),
        target_time=(None if d.get("target_time") is None else float(d["target_time"])),
    )


def notebook_to_dict(nb: Notebook) -> dict[str, Any]:
    return {
        "id": nb.id,
        "title": nb.title,
        "user_id": nb.user_id,
        "transcript": transcript_to_dict(nb.transcript),
        "micronotes": [micronote_to_dict(m) for m in nb.micronotes],
        "expansions": {k: expansion_to_dict(v) for k, v in nb.expansions.items()},
        "themes": None if nb.themes is None else [theme_to_dict(t) for t in nb.themes],
        "cue_questions": (
            None if nb.cue_questions is None else [cue_to_dict(q) for q in nb.cue_questions]
        ),
        "summary": nb.summary,
        "events": [event_to_dict(e) for e in nb.events],
        "ordering_mode": nb.ordering_mode,
        "cue_nonce": nb.cue_nonce,
    }


def notebook_from_dict(d: dict[str, Any]) -> Notebook:
    return Notebook(
        id=d["id"],
        title=d["title"],
        user_id=d["user_id"],
        transcript=transcript_from_dict(d["transcript"]),
        micronotes=[micronote_from_dict(m) for m in d["micronotes"]],
        expansions={k: expansion_from_dict(v) for k, v in d["expansions"].items()},
        themes=(
            None if d.get("themes") is None else [theme_from_dict(t) for t in d["themes"]]
        ),
        cue_questions=(
            None
            if d.get("cue_questions") is None
            else [cue_from_dict(q) for q in d["cue_questions"]]
        ),
        summary=d.get("summary"),
        events=[event_from_dict(e) for e in d.get("events", [])],
        ordering_mode=d.get("ordering_mode", "by_time"),
        cue_nonce=int(d.get("cue_nonce", 0)),
    )
