"""Versioned JSON document store and markdown export.

Layout under the base directory:

    profiles/<user>.json    user onboarding profiles
    notebooks/<id>.json     notebook documents
    fixtures/llm.json       recorded completions (see gateway.FixtureStore)
    reports/<id>.json       evaluation reports

Documents are written atomically (temp file + rename) in canonical JSON
(sorted keys, UTF-8, LF, 2-space indent) so identical values always produce
identical bytes. Every document carries schema_version; loading a document
written by a newer schema fails rather than guessing.
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path
from typing import Any

from .gateway import FixtureStore
from .model import (
    Notebook,
    UserProfile,
    notebook_from_dict,
    notebook_to_dict,
    profile_from_dict,
    profile_to_dict,
    validate_notebook,
    validate_profile,
)

SCHEMA_VERSION = 1


class StoreError(RuntimeError):
    pass


class NotFound(StoreError):
    pass


class InvalidNotebook(StoreError):
    def __init__(self, violations: list[str]) -> None:
        super().__init__("; ".join(violations))
        self.violations = violations


class InvalidProfile(StoreError):
    def __init__(self, violations: list[str]) -> None:
        super().__init__("; ".join(violations))
        self.violations = violations


class CorruptDocument(StoreError):
    def __init__(self, reasons: list[str]) -> None:
        super().__init__("; ".join(reasons))
        self.reasons = reasons


class VersionTooNew(StoreError):
    pass


def canonical_json(document: dict[str, Any]) -> str:
    return json.dumps(document, sort_keys=True, ensure_ascii=False, indent=2) + "\n"


class Store:
    """Document store rooted at base_dir; one writer lock per document path."""

    def __init__(self, base_dir: Path | str) -> None:
        self.base_dir = Path(base_dir)
        self._locks: dict[Path, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _lock_for(self, path: Path) -> threading.Lock:
        with self._locks_guard:
            if path not in self._locks:
                self._locks[path] = threading.Lock()
            return self._locks[path]

    def _write_atomic(self, path: Path, payload: str) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        with self._lock_for(path):
            tmp = path.with_name(path.name + ".tmp")
            tmp.write_text(payload, "utf-8")
            os.replace(tmp, path)

    def _read_document(self, path: Path, kind: str) -> dict[str, Any]:
        if not path.exists():
            raise NotFound(f"{kind} document {path.name} not found")
        try:
            document = json.loads(path.read_text("utf-8"))
        except (json.JSONDecodeError, UnicodeDecodeError) as err:
            raise CorruptDocument([f"unreadable JSON: {err}"]) from None
        if not isinstance(document, dict):
            raise CorruptDocument(["document is not a JSON object"])
        version = document.get("schema_version")
        if not isinstance(version, int):
            raise CorruptDocument(["missing schema_version"])
        if version > SCHEMA_VERSION:
            raise VersionTooNew(f"schema_version {version} > supported {SCHEMA_VERSION}")
        return document

    # -- notebooks -----------------------------------------------------------

    def notebook_path(self, notebook_id: str) -> Path:
        return self.base_dir / "notebooks" / f"{notebook_id}.json"

    def save_notebook(self, nb: Notebook) -> Path:
        violations = validate_notebook(nb)
        if violations:
            raise InvalidNotebook(violations)
        document = {"schema_version": SCHEMA_VERSION, "notebook": notebook_to_dict(nb)}
        path = self.notebook_path(nb.id)
        self._write_atomic(path, canonical_json(document))
        return path

    def load_notebook(self, notebook_id: str) -> Notebook:
        document = self._read_document(self.notebook_path(notebook_id), "notebook")
        try:
            nb = notebook_from_dict(document["notebook"])
        except (KeyError, TypeError, ValueError) as err:
            raise CorruptDocument([f"bad notebook payload: {err}"]) from None
        violations = validate_notebook(nb)
        if violations:
            raise CorruptDocument(violations)
        return nb

    def list_notebooks(self) -> list[str]:
        directory = self.base_dir / "notebooks"
        if not directory.exists():
            return []
        return sorted(p.stem for p in directory.glob("*.json"))

    # -- profiles ------------------------------------------------------------

    def profile_path(self, user_id: str) -> Path:
        return self.base_dir / "profiles" / f"{user_id}.json"

    def save_profile(self, profile: UserProfile) -> Path:
        violations = validate_profile(profile)
        if violations:
            raise InvalidProfile(violations)
        document = {"schema_version": SCHEMA_VERSION, "profile": profile_to_dict(profile)}
        path = self.profile_path(profile.user_id)
        self._write_atomic(path, canonical_json(document))
        return path

    def load_profile(self, user_id: str) -> UserProfile:
        document = self._read_document(self.profile_path(user_id), "profile")
        try:
            profile = profile_from_dict(document["profile"])
        except (KeyError, TypeError, ValueError) as err:
            raise CorruptDocument([f"bad profile payload: {err}"]) from None
        violations = validate_profile(profile)
        if violations:
            raise CorruptDocument(violations)
        return profile

    # -- reports and fixtures --------------------------------------------------

    def report_path(self, notebook_id: str) -> Path:
        return self.base_dir / "reports" / f"{notebook_id}.json"

    def save_report(self, notebook_id: str, report: dict[str, Any]) -> Path:
        document = {"schema_version": SCHEMA_VERSION, "report": report}
        path = self.report_path(notebook_id)
        self._write_atomic(path, canonical_json(document))
        return path

    def fixture_store(self) -> FixtureStore:
        return FixtureStore(self.base_dir / "fixtures" / "llm.json")


# ---------------------------------------------------------------------------
# Markdown export
# ---------------------------------------------------------------------------


def format_video_time(seconds: float) -> str:
    total = int(seconds)
    return f"{total // 60:02d}:{total % 60:02d}"


def _note_line(nb: Notebook, note_id: str) -> str:
    note = nb.get_micronote(note_id)
    assert note is not None
    expansion = nb.expansions.get(note_id)
    # refused/failed expansions fall back to the raw micronote
    text = expansion.text if expansion is not None and expansion.status == "ok" else note.text
    return f"- [{format_video_time(note.video_time)}] {text}"


def export_markdown(nb: Notebook) -> str:
    """Deterministic markdown rendering: title, notes (themed or in capture
    order), cue questions with answers behind a details fold, summary."""
    lines: list[str] = [f"# {nb.title}"]

    if nb.micronotes:
        lines.append("")
        lines.append("## Notes")
        if nb.ordering_mode == "by_theme" and nb.themes is not None:
            themed: set[str] = set()
            for theme in nb.themes:
                lines.append("")
                lines.append(f"### {theme.theme_name}")
                for note_id in theme.note_ids:
                    themed.add(note_id)
                    lines.append(_note_line(nb, note_id))
            leftovers = [m.id for m in nb.micronotes if m.id not in themed]
            if leftovers:
                lines.append("")
                lines.append("### Other notes")
                for note_id in leftovers:
                    lines.append(_note_line(nb, note_id))
        else:
            lines.append("")
            for note in nb.micronotes:
                lines.append(_note_line(nb, note.id))

    if nb.cue_questions:
        lines.append("")
        lines.append("## Cues")
        for i, q in enumerate(nb.cue_questions, start=1):
            lines.append("")
            lines.append(f"{i}. {q.question}")
            for letter, option in zip("ABCD", q.options):
                lines.append(f"   - {letter}. {option}")
            answer = f"{'ABCD'[q.answer_index]}. {q.options[q.answer_index]}"
            lines.append(f"   <details><summary>Answer</summary>{answer}</details>")

    if nb.summary:
        lines.append("")
        lines.append("## Summary")
        lines.append("")
        lines.append(nb.summary)

    return "\n".join(lines) + "\n"
