"""Shared builders: immutable fixture values and replay-seeded pipelines."""

from __future__ import annotations

from datetime import datetime, timedelta, timezone
from pathlib import Path

import pytest

from noteeline.gateway import Gateway
from noteeline.model import (
    CueQuestion,
    ExpandedNote,
    Micronote,
    Notebook,
    OnboardingExample,
    PlaybackEvent,
    ThemeAssignment,
    Transcript,
    TranscriptSegment,
    UserProfile,
)
from noteeline.pipeline import Pipeline
from noteeline.store import Store

FIXTURES = Path(__file__).parent / "fixtures"

WALL = datetime(2024, 3, 1, 12, 0, 0, tzinfo=timezone.utc)


def make_segments(*triples) -> list[TranscriptSegment]:
    return [TranscriptSegment(text=t, start=float(s), duration=float(d)) for t, s, d in triples]


def ocean_transcript() -> Transcript:
    return Transcript(
        video_ref="ocean.vtt",
        language="en",
        segments=make_segments(
            ("eight million tons of plastic find their way into the ocean every year", 0, 10),
            ("plastic pollution has increased by 200 percent in the last 10 years", 10, 10),
            ("abandoned fishing nets account for nearly half of the floating debris", 20, 10),
            ("rising sea temperatures stress the algae living inside coral", 30, 10),
            ("bleached reefs can recover if the water cools in time", 40, 10),
            ("biodegradable alternatives to plastic are entering the market", 50, 10),
        ),
    )


def make_note(note_id: str, text: str, video_time: float, write_seconds: float = 5.0) -> Micronote:
    created = WALL + timedelta(seconds=video_time)
    return Micronote(
        id=note_id,
        text=text,
        video_time=video_time,
        created_wall=created,
        finished_wall=created + timedelta(seconds=write_seconds),
    )


def ok_expansion(note_id: str, text: str, fingerprint: str = "f" * 64) -> ExpandedNote:
    return ExpandedNote(
        micronote_id=note_id,
        text=text,
        model_id="gpt-4-turbo",
        prompt_fingerprint=fingerprint,
        created_wall=WALL,
        status="ok",
    )


OCEAN_NOTES = (
    ("n1", "plastic pol. ->", 12.0),
    ("n2", "fishing nets = debris", 22.0),
    ("n3", "coral bleach ?", 34.0),
)

OCEAN_EXPANSIONS = {
    "n1": "Plastic pollution in oceans has increased by 200% in the last 10 years.",
    "n2": "Abandoned fishing nets account for nearly half of the floating debris in the ocean.",
    "n3": "Coral reefs bleach when rising sea temperatures stress the algae living inside them.",
}

OCEAN_THEME_RESPONSE = (
    "```json\n"
    '[{"theme": "Sources of Ocean Plastic", "note_ids": ["n1", "n2"]},'
    ' {"theme": "Climate Effects on Marine Life", "note_ids": ["n3"]}]\n'
    "```"
)

OCEAN_CUE_RESPONSE = (
    "```json\n"
    "[\n"
    '  {"question": "By how much has plastic pollution in oceans grown over the last decade?", "options": ["50%", "100%", "200%", "400%"], "answer_index": 2},\n'
    '  {"question": "What accounts for nearly half of the floating ocean debris?", "options": ["Bottles", "Abandoned fishing nets", "Bags", "Microbeads"], "answer_index": 1},\n'
    '  {"question": "What causes coral reefs to bleach?", "options": ["Overfishing", "Oil spills", "Rising sea temperatures", "Ship traffic"], "answer_index": 2},\n'
    '  {"question": "What lives inside coral and is stressed during bleaching?", "options": ["Algae", "Plankton", "Shrimp", "Bacteria"], "answer_index": 0},\n'
    '  {"question": "When can bleached reefs recover?", "options": ["Never", "If the water cools in time", "Only in aquariums", "After dredging"], "answer_index": 1}\n'
    "]\n"
    "```"
)

OCEAN_SUMMARY_RESPONSE = (
    "Plastic pollution in the ocean has risen sharply, increasing by 200% over the last "
    "decade. Abandoned fishing nets are the single largest component of floating debris. "
    "Rising sea temperatures stress the algae inside coral and cause reefs to bleach. "
    "Bleached reefs can still recover when waters cool in time."
)

ONBOARDING_EXAMPLES = (
    OnboardingExample(
        clip_ref="clip-1",
        transcript_excerpt="mitochondria convert nutrients into usable energy for the cell",
        keypoint="mito -> energy",
        full_note="Mitochondria convert nutrients into usable energy for the cell.",
    ),
    OnboardingExample(
        clip_ref="clip-2",
        transcript_excerpt="motivation often follows action rather than preceding it",
        keypoint="action b4 motivation",
        full_note="Motivation usually follows action instead of preceding it.",
    ),
    OnboardingExample(
        clip_ref="clip-3",
        transcript_excerpt="the headset weighs about 600 grams and ships with an external battery",
        keypoint="headset 600g + ext battery",
        full_note="The headset weighs about 600 grams and ships with an external battery.",
    ),
)


def ocean_profile() -> UserProfile:
    return UserProfile(user_id="kate", examples=ONBOARDING_EXAMPLES)


def ocean_notebook(expanded: bool = False) -> Notebook:
    notes = tuple(make_note(i, t, v) for i, t, v in OCEAN_NOTES)
    expansions = {}
    if expanded:
        expansions = {i: ok_expansion(i, OCEAN_EXPANSIONS[i]) for i, _, _ in OCEAN_NOTES}
    return Notebook(
        id="ocean-pollution",
        title="Ocean Pollution Presentation",
        user_id="kate",
        transcript=ocean_transcript(),
        micronotes=notes,
        expansions=expansions,
        events=(
            PlaybackEvent(kind="play", video_time=0.0, wall=WALL),
            PlaybackEvent(kind="pause", video_time=14.0, wall=WALL + timedelta(seconds=14)),
            PlaybackEvent(kind="play", video_time=14.0, wall=WALL + timedelta(seconds=20)),
            PlaybackEvent(
                kind="seek", video_time=30.0, target_time=25.0, wall=WALL + timedelta(seconds=36)
            ),
        ),
    )


class ReplayHarness:
    """Store + replay gateway + pipeline over one temp directory, with
    helpers to seed recorded completions keyed by real prompt fingerprints."""

    def __init__(self, base_dir: Path) -> None:
        self.store = Store(base_dir)
        self.fixtures = self.store.fixture_store()
        self.gateway = Gateway(mode="replay", fixtures=self.fixtures)
        self.pipeline = Pipeline(self.gateway)

    def seed_expansion(
        self,
        nb: Notebook,
        note_id: str,
        response: str,
        profile: UserProfile | None = None,
        personalize: bool = True,
    ) -> str:
        note = nb.get_micronote(note_id)
        assert note is not None
        req = self.pipeline.expansion_request(nb, note, profile, personalize)
        bundle = self.pipeline.build_expansion_prompt(req)
        self.fixtures.put(bundle.fingerprint, response)
        return bundle.fingerprint

    def seed_themes(self, nb: Notebook, response: str) -> str:
        bundle = self.pipeline.build_theme_prompt(nb)
        self.fixtures.put(bundle.fingerprint, response)
        return bundle.fingerprint

    def seed_theme_repair(self, nb: Notebook, malformed: str, response: str) -> str:
        from noteeline.pipeline import THEME_SCHEMA

        original = self.pipeline.build_theme_prompt(nb)
        bundle = self.pipeline.build_repair_prompt(original, malformed, THEME_SCHEMA)
        self.fixtures.put(bundle.fingerprint, response)
        return bundle.fingerprint

    def seed_cues(self, nb: Notebook, response: str, nonce: int = 0) -> str:
        bundle = self.pipeline.build_cue_prompt(nb, nonce)
        self.fixtures.put(bundle.fingerprint, response)
        return bundle.fingerprint

    def seed_cue_repair(self, nb: Notebook, malformed: str, response: str, nonce: int = 0) -> str:
        from noteeline.pipeline import CUE_SCHEMA

        original = self.pipeline.build_cue_prompt(nb, nonce)
        bundle = self.pipeline.build_repair_prompt(original, malformed, CUE_SCHEMA)
        self.fixtures.put(bundle.fingerprint, response)
        return bundle.fingerprint

    def seed_summary(self, nb: Notebook, response: str) -> str:
        bundle = self.pipeline.build_summary_prompt(nb)
        self.fixtures.put(bundle.fingerprint, response)
        return bundle.fingerprint

    def seed_ocean(self, profile: UserProfile | None = None) -> Notebook:
        """Seed the full ocean scenario: expansions, themes, cues, summary."""
        nb = ocean_notebook()
        for note_id, _, _ in OCEAN_NOTES:
            self.seed_expansion(nb, note_id, OCEAN_EXPANSIONS[note_id], profile=profile)
        expanded = ocean_notebook(expanded=True)
        self.seed_themes(expanded, OCEAN_THEME_RESPONSE)
        self.seed_cues(expanded, OCEAN_CUE_RESPONSE)
        self.seed_summary(expanded, OCEAN_SUMMARY_RESPONSE)
        return nb


@pytest.fixture
def harness(tmp_path: Path) -> ReplayHarness:
    return ReplayHarness(tmp_path / "data")


_WORDS = (
    "plastic", "ocean", "reef", "notes", "synapse", "memory", "don't", "->", "l2r",
    "energy", "pump", "tower", "cyan", "vector", "garum", "umami", "BVI", "20%",
)


def random_notebook(rng, notebook_id: str) -> Notebook:
    """Arbitrary valid notebook: random notes, expansions, events, themes."""
    import random as _random

    assert isinstance(rng, _random.Random)
    segments = []
    start = 0.0
    for i in range(rng.randint(1, 6)):
        duration = rng.uniform(0.5, 12.0)
        segments.append(
            TranscriptSegment(text=f"segment {i} " + rng.choice(_WORDS), start=start, duration=duration)
        )
        start += duration + rng.uniform(0.0, 2.0)

    notes = []
    for i in range(rng.randint(0, 8)):
        notes.append(
            make_note(
                f"note-{i}",
                " ".join(rng.choices(_WORDS, k=rng.randint(1, 6))),
                rng.uniform(0.0, start),
                write_seconds=rng.uniform(0.5, 30.0),
            )
        )

    expansions = {}
    for note in notes:
        roll = rng.random()
        if roll < 0.5:
            expansions[note.id] = ok_expansion(note.id, note.text.capitalize() + ".")
        elif roll < 0.65:
            expansions[note.id] = ExpandedNote(
                micronote_id=note.id,
                text="",
                model_id="gpt-4-turbo",
                prompt_fingerprint="a" * 64,
                created_wall=WALL,
                status="failed",
                failure_reason="TIMEOUT: scripted",
            )

    events = []
    for _ in range(rng.randint(0, 6)):
        kind = rng.choice(("play", "pause", "seek", "rate_change"))
        events.append(
            PlaybackEvent(
                kind=kind,
                video_time=rng.uniform(0, start),
                wall=WALL,
                target_time=rng.uniform(0, start) if kind == "seek" else None,
            )
        )

    themes = None
    ordering_mode = "by_time"
    ok_ids = [i for i, e in expansions.items() if e.status == "ok"]
    if len(ok_ids) >= 2 and rng.random() < 0.5:
        split = rng.randint(1, len(ok_ids) - 1)
        themes = (
            ThemeAssignment("First Half", ok_ids[:split]),
            ThemeAssignment("Second Half", ok_ids[split:]),
        )
        ordering_mode = rng.choice(("by_time", "by_theme"))

    cue_questions = None
    if rng.random() < 0.3:
        cue_questions = tuple(
            CueQuestion(
                question=f"Generated question {i}?",
                options=(f"a{i}", f"b{i}", f"c{i}", f"d{i}"),
                answer_index=rng.randint(0, 3),
            )
            for i in range(5)
        )

    return Notebook(
        id=notebook_id,
        title="Random notebook " + notebook_id,
        user_id="rand",
        transcript=Transcript(video_ref="rand.vtt", language="en", segments=segments),
        micronotes=notes,
        expansions=expansions,
        themes=themes,
        cue_questions=cue_questions,
        summary="A short summary." if rng.random() < 0.5 else None,
        events=events,
        ordering_mode=ordering_mode,
        cue_nonce=rng.randint(0, 3),
    )
