"""Prompt rendering, gateway invocation, and structured-response parsing.

Four prompt families: expansion (micronote -> full sentence), theme grouping,
cue questions, and summary. Theme and cue responses must be fenced JSON; a
single repair retry (re-prompting with the malformed output and the schema)
is issued before giving up with ParseError.

Templates live in ``prompts/`` as plain text files with ``{{name}}``
placeholders and may be overridden per deployment via ``prompt_dir``.
"""

from __future__ import annotations

import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Optional

from .gateway import (
    CompletionResult,
    Gateway,
    GatewayError,
    GenerationConfig,
    PromptBundle,
)
from .model import (
    CueQuestion,
    ExpandedNote,
    Micronote,
    Notebook,
    OnboardingExample,
    ThemeAssignment,
    UserProfile,
)
from .transcript import (
    DEFAULT_WINDOW_AFTER,
    DEFAULT_WINDOW_BEFORE,
    TranscriptWindow,
    full_text,
    window_around,
)

PROMPT_DIR = Path(__file__).parent / "prompts"

DEFAULT_BANNED_STARTERS = ("The speaker says", "In this video", "This video")

THEME_SCHEMA = '[{"theme": string, "note_ids": [string, ...]}]'
CUE_SCHEMA = (
    '[{"question": string, "options": [string, string, string, string], '
    '"answer_index": integer in [0, 3]}] with exactly five items'
)

# frozen clock used in replay mode so repeated runs serialize byte-identically
REPLAY_WALL = datetime(2000, 1, 1, tzinfo=timezone.utc)

_FENCE_RE = re.compile(r"```(?:[a-zA-Z0-9_-]+)?\s*\n(.*?)```", re.DOTALL)


class ParseError(RuntimeError):
    """Structured response still unusable after the repair retry."""

    def __init__(self, raw_text: str, reason: str) -> None:
        super().__init__(reason)
        self.raw_text = raw_text
        self.reason = reason


class TooFewNotes(ValueError):
    pass


class NoNotes(ValueError):
    pass


class UnknownNote(KeyError):
    pass


class NotInThemeMode(ValueError):
    pass


@dataclass(frozen=True)
class ExpansionRequest:
    """Inputs for one expansion: the note, its transcript window, and the
    user's style examples (exactly 3, or 0 in no-personalization mode)."""

    micronote: Micronote
    window: TranscriptWindow
    examples: tuple[OnboardingExample, ...]

    def __init__(self, micronote, window, examples=()) -> None:
        examples = tuple(examples)
        if len(examples) not in (0, 3):
            raise ValueError(f"examples must number 0 or 3, got {len(examples)}")
        object.__setattr__(self, "micronote", micronote)
        object.__setattr__(self, "window", window)
        object.__setattr__(self, "examples", examples)


def render_template(template: str, values: dict[str, str]) -> str:
    for name, value in values.items():
        template = template.replace("{{" + name + "}}", value)
    return template


def extract_json(text: str):
    """Pull the first fenced code block and parse it as JSON; fall back to
    parsing the whole text when no fence is present."""
    match = _FENCE_RE.search(text)
    candidate = match.group(1) if match else text
    return json.loads(candidate)


def format_examples(examples: tuple[OnboardingExample, ...]) -> str:
    blocks = []
    for i, ex in enumerate(examples, start=1):
        blocks.append(
            f"Example {i}:\n"
            f"Transcript excerpt: {ex.transcript_excerpt}\n"
            f"Keypoint: {ex.keypoint}\n"
            f"Full note: {ex.full_note}"
        )
    return "\n\n".join(blocks)


class Pipeline:
    """Stateless orchestrator over a gateway; all notebook ops return new
    values and never mutate their inputs."""

    def __init__(
        self,
        gateway: Gateway,
        generation: Optional[GenerationConfig] = None,
        window_before: float = DEFAULT_WINDOW_BEFORE,
        window_after: float = DEFAULT_WINDOW_AFTER,
        banned_starters: tuple[str, ...] = DEFAULT_BANNED_STARTERS,
        prompt_dir: Optional[Path] = None,
        clock: Optional[Callable[[], datetime]] = None,
    ) -> None:
        self.gateway = gateway
        self.generation = generation or GenerationConfig()
        self.window_before = window_before
        self.window_after = window_after
        self.banned_starters = tuple(banned_starters)
        self.prompt_dir = Path(prompt_dir) if prompt_dir else PROMPT_DIR
        if clock is not None:
            self.now = clock
        elif gateway.mode == "replay":
            self.now = lambda: REPLAY_WALL
        else:
            self.now = lambda: datetime.now(timezone.utc)

    def _template(self, name: str) -> str:
        return (self.prompt_dir / f"{name}.txt").read_text("utf-8")

    def _bundle(self, system: str, user: str) -> PromptBundle:
        return PromptBundle.build(system, user, self.generation)

    # -- expansion ----------------------------------------------------------

    def build_expansion_prompt(self, req: ExpansionRequest) -> PromptBundle:
        system = render_template(
            self._template("expansion_system"),
            {"banned_starters": ", ".join(f'"{p}"' for p in self.banned_starters)},
        )
        user = render_template(
            self._template("expansion_user"),
            {
                "examples": format_examples(req.examples),
                "window": req.window.text,
                "micronote": req.micronote.text,
            },
        )
        return self._bundle(system, user)

    def expansion_request(
        self, nb: Notebook, note: Micronote, profile: Optional[UserProfile], personalize: bool
    ) -> ExpansionRequest:
        window = window_around(
            nb.transcript, note.video_time, self.window_before, self.window_after
        )
        examples: tuple[OnboardingExample, ...] = ()
        if personalize and profile is not None and profile.onboarded:
            examples = profile.examples
        return ExpansionRequest(micronote=note, window=window, examples=examples)

    def expand_micronote(self, req: ExpansionRequest) -> ExpandedNote:
        bundle = self.build_expansion_prompt(req)
        base = dict(
            micronote_id=req.micronote.id,
            model_id=self.generation.model_id,
            prompt_fingerprint=bundle.fingerprint,
            created_wall=self.now(),
        )
        try:
            result = self.gateway.complete(bundle, self.generation)
        except GatewayError as err:
            # fixture misses name the fingerprint so callers can report it
            detail = err.fingerprint if err.code == "FIXTURE_MISS" else err.detail
            return ExpandedNote(
                text="", status="failed", failure_reason=f"{err.code}: {detail}", **base
            )
        text = result.text.strip()
        if self.gateway.detect_refusal(text):
            return ExpandedNote(text=text, status="refused", **base)
        return ExpandedNote(text=text, status="ok", **base)

    def expand_all(
        self,
        nb: Notebook,
        profile: Optional[UserProfile] = None,
        personalize: bool = True,
        only_note: Optional[str] = None,
    ) -> Notebook:
        """Expand every micronote lacking an ok expansion (or just one when
        only_note is given). Per-note failures land in ExpandedNote.status and
        never abort the batch; existing ok expansions are left untouched."""
        pending = [
            m
            for m in nb.micronotes
            if (only_note is None or m.id == only_note)
            and (m.id not in nb.expansions or nb.expansions[m.id].status != "ok")
        ]
        if only_note is not None and nb.get_micronote(only_note) is None:
            raise UnknownNote(only_note)
        if not pending:
            return nb

        requests = [
            self.expansion_request(nb, note, profile, personalize) for note in pending
        ]
        with ThreadPoolExecutor(max_workers=min(4, len(requests))) as pool:
            results = list(pool.map(self.expand_micronote, requests))

        expansions = dict(nb.expansions)
        for exp in results:
            expansions[exp.micronote_id] = exp
        return nb.with_changes(expansions=expansions)

    # -- structured calls (themes, cues) ------------------------------------

    def build_repair_prompt(
        self, original: PromptBundle, malformed: str, schema: str
    ) -> PromptBundle:
        repair_user = render_template(
            self._template("repair_user"),
            {"original": original.user, "malformed": malformed, "schema": schema},
        )
        return self._bundle(original.system, repair_user)

    def _structured_call(self, bundle: PromptBundle, parse: Callable, schema: str):
        """Call, parse, and on failure repair-retry exactly once."""
        result = self.gateway.complete(bundle, self.generation)
        try:
            return parse(result.text)
        except (ValueError, KeyError, TypeError):
            pass
        repair_bundle = self.build_repair_prompt(bundle, result.text, schema)
        repaired = self.gateway.complete(repair_bundle, self.generation)
        try:
            return parse(repaired.text)
        except (ValueError, KeyError, TypeError) as err:
            raise ParseError(repaired.text, str(err)) from None

    def build_theme_prompt(self, nb: Notebook) -> PromptBundle:
        expansions = nb.ok_expansions()
        notes_block = "\n".join(f"- [{e.micronote_id}] {e.text}" for e in expansions)
        return self._bundle(
            self._template("theme_system"),
            render_template(self._template("theme_user"), {"notes": notes_block}),
        )

    def organize_by_theme(self, nb: Notebook) -> list[ThemeAssignment]:
        """Group ok expansions into themes via the model; the response must be
        fenced JSON with known note ids, each used at most once."""
        expansions = nb.ok_expansions()
        if len(expansions) < 2:
            raise TooFewNotes("theme organization needs at least 2 ok expansions")
        known_ids = {e.micronote_id for e in expansions}

        bundle = self.build_theme_prompt(nb)

        def parse(text: str) -> list[ThemeAssignment]:
            data = extract_json(text)
            if not isinstance(data, list) or not data:
                raise ValueError("expected a non-empty JSON array of themes")
            seen: set[str] = set()
            themes: list[ThemeAssignment] = []
            for item in data:
                if not isinstance(item, dict):
                    raise ValueError("theme entries must be objects")
                if "theme" not in item or "note_ids" not in item:
                    raise ValueError('theme entries need "theme" and "note_ids" keys')
                name = item["theme"]
                ids = item["note_ids"]
                if not isinstance(name, str) or not name.strip():
                    raise ValueError("theme name must be a non-empty string")
                if not isinstance(ids, list) or not ids:
                    raise ValueError("note_ids must be a non-empty array")
                for note_id in ids:
                    if note_id not in known_ids:
                        raise ValueError(f"unknown note id {note_id!r}")
                    if note_id in seen:
                        raise ValueError(f"note id {note_id!r} assigned to two themes")
                    seen.add(note_id)
                themes.append(ThemeAssignment(theme_name=name, note_ids=ids))
            return themes

        return self._structured_call(bundle, parse, THEME_SCHEMA)

    def apply_themes(self, nb: Notebook, themes: list[ThemeAssignment]) -> Notebook:
        return nb.with_changes(themes=tuple(themes), ordering_mode="by_theme")

    def move_note(self, nb: Notebook, note_id: str, target_theme_name: str) -> Notebook:
        """Move one note to target theme: source theme is dropped if emptied,
        the target is created if new, and the note lands at its end."""
        if nb.ordering_mode != "by_theme" or nb.themes is None:
            raise NotInThemeMode("notebook is not in theme mode")
        if nb.get_micronote(note_id) is None:
            raise UnknownNote(note_id)

        new_themes: list[ThemeAssignment] = []
        target_found = False
        for theme in nb.themes:
            ids = [i for i in theme.note_ids if i != note_id]
            if theme.theme_name == target_theme_name:
                ids.append(note_id)
                target_found = True
            if ids:
                new_themes.append(ThemeAssignment(theme.theme_name, ids))
        if not target_found:
            new_themes.append(ThemeAssignment(target_theme_name, [note_id]))
        return nb.with_changes(themes=tuple(new_themes))

    def order_by_time(self, nb: Notebook) -> Notebook:
        """Back to original capture order; themes stay stored but inactive."""
        if nb.ordering_mode == "by_time":
            return nb
        return nb.with_changes(ordering_mode="by_time")

    def build_cue_prompt(self, nb: Notebook, nonce: int = 0) -> PromptBundle:
        keypoints = "\n".join(f"- {e.text}" for e in nb.ok_expansions())
        return self._bundle(
            self._template("cue_system"),
            render_template(
                self._template("cue_user"),
                {"topic": nb.title, "keypoints": keypoints, "nonce": str(nonce)},
            ),
        )

    def generate_cue_questions(self, nb: Notebook, nonce: int = 0) -> list[CueQuestion]:
        """Five multiple-choice review questions from the ok expansions.

        Regeneration passes a fresh nonce, which lands in the prompt and so
        forces a distinct fingerprint (fresh questions even in replay mode).
        """
        expansions = nb.ok_expansions()
        if not expansions:
            raise NoNotes("cue questions need at least 1 ok expansion")

        bundle = self.build_cue_prompt(nb, nonce)

        def parse(text: str) -> list[CueQuestion]:
            data = extract_json(text)
            if not isinstance(data, list):
                raise ValueError("expected a JSON array of questions")
            if len(data) != 5:
                raise ValueError(f"exactly 5 questions required, got {len(data)}")
            questions: list[CueQuestion] = []
            for item in data:
                if not isinstance(item, dict):
                    raise ValueError("question entries must be objects")
                for key in ("question", "options", "answer_index"):
                    if key not in item:
                        raise ValueError(f"question entry missing {key!r}")
                options = item["options"]
                if not isinstance(options, list) or len(options) != 4:
                    raise ValueError("options must be an array of exactly 4 strings")
                trimmed = [str(o).strip() for o in options]
                if len(set(trimmed)) != 4:
                    raise ValueError("options must be pairwise distinct")
                answer = item["answer_index"]
                if not isinstance(answer, int) or not (0 <= answer <= 3):
                    raise ValueError("answer_index must be an integer in [0, 3]")
                question = item["question"]
                if not isinstance(question, str) or not question.strip():
                    raise ValueError("question must be a non-empty string")
                questions.append(
                    CueQuestion(question=question, options=options, answer_index=answer)
                )
            return questions

        return self._structured_call(bundle, parse, CUE_SCHEMA)

    def build_summary_prompt(self, nb: Notebook) -> PromptBundle:
        keypoints = "\n".join(f"- {e.text}" for e in nb.ok_expansions())
        return self._bundle(
            self._template("summary_system"),
            render_template(
                self._template("summary_user"),
                {"keypoints": keypoints, "context": full_text(nb.transcript)},
            ),
        )

    def generate_summary(self, nb: Notebook) -> str:
        """Summary from the ok expansions, with the transcript as secondary
        context only; returned verbatim (sentence count is the model's)."""
        if not nb.ok_expansions():
            raise NoNotes("summary needs at least 1 ok expansion")
        result: CompletionResult = self.gateway.complete(
            self.build_summary_prompt(nb), self.generation
        )
        return result.text.strip()
