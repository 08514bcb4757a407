"""Caption parsing (WebVTT, SubRip, JSON segments) and transcript windowing.

All functions are pure over immutable inputs. Segment intervals are half-open
[start, start + duration): a window boundary that lands exactly on a cue
boundary selects the later cue.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from .model import Transcript, TranscriptSegment


class FormatError(ValueError):
    """Malformed caption input. Carries the offending line number when known."""

    def __init__(self, reason: str, line: int = 0) -> None:
        super().__init__(f"line {line}: {reason}" if line else reason)
        self.line = line
        self.reason = reason


class EmptyTranscript(ValueError):
    pass


@dataclass(frozen=True)
class TranscriptWindow:
    """Excerpt of transcript text around a point in playback time."""

    text: str
    first_index: int
    last_index: int
    window_start: float
    window_end: float


DEFAULT_WINDOW_BEFORE = 45.0
DEFAULT_WINDOW_AFTER = 15.0

_TAG_RE = re.compile(r"<[^>]*>")
_TIMESTAMP_RE = re.compile(r"^(?:(\d+):)?(\d{1,2}):(\d{1,2})[.,](\d{1,3})$")
_ARROW = "-->"


def _strip_tags(text: str) -> str:
    return _TAG_RE.sub("", text)


def _parse_timestamp(raw: str, line_no: int) -> float:
    m = _TIMESTAMP_RE.match(raw.strip())
    if not m:
        raise FormatError(f"malformed timestamp {raw.strip()!r}", line_no)
    hours = int(m.group(1)) if m.group(1) else 0
    minutes = int(m.group(2))
    seconds = int(m.group(3))
    millis = int(m.group(4).ljust(3, "0"))
    return hours * 3600.0 + minutes * 60.0 + seconds + millis / 1000.0


def _decode(data: bytes) -> str:
    try:
        text = data.decode("utf-8-sig")
    except UnicodeDecodeError as err:
        raise FormatError(f"not valid UTF-8: {err}") from None
    return text.replace("\r\n", "\n").replace("\r", "\n")


def _cue_from_lines(
    timing_line: str, payload_lines: list[str], line_no: int
) -> TranscriptSegment:
    left, _, right = timing_line.partition(_ARROW)
    # cue settings (e.g. positioning) may trail the end timestamp
    end_raw = right.strip().split(" ")[0]
    start = _parse_timestamp(left, line_no)
    end = _parse_timestamp(end_raw, line_no)
    if end <= start:
        raise FormatError(f"cue end {end} <= start {start}", line_no)
    text = "\n".join(_strip_tags(line).strip() for line in payload_lines).strip()
    return TranscriptSegment(text=text, start=start, duration=end - start)


def _collect_cues(lines: list[str], start_index: int) -> list[TranscriptSegment]:
    segments: list[TranscriptSegment] = []
    i = start_index
    n = len(lines)
    while i < n:
        line = lines[i]
        if _ARROW not in line:
            i += 1
            continue
        payload: list[str] = []
        j = i + 1
        while j < n and lines[j].strip():
            payload.append(lines[j])
            j += 1
        seg = _cue_from_lines(line, payload, i + 1)
        if seg.text:  # cues with empty payload carry no transcript text
            segments.append(seg)
        i = j
    return segments


def parse_vtt(data: bytes, video_ref: str = "", language: str = "und") -> Transcript:
    """Parse a WebVTT caption file into a Transcript.

    One segment per cue; styling tags are stripped; multi-line payloads are
    newline-joined. Raises FormatError on a missing WEBVTT header, malformed
    timestamps, end <= start, or zero cues.
    """
    lines = _decode(data).split("\n")
    if not lines or not lines[0].strip().startswith("WEBVTT"):
        raise FormatError("missing WEBVTT header", 1)
    segments = _collect_cues(lines, 1)
    if not segments:
        raise FormatError("no cues")
    segments.sort(key=lambda s: s.start)
    return Transcript(video_ref=video_ref, language=language, segments=segments)


def parse_srt(data: bytes, video_ref: str = "", language: str = "und") -> Transcript:
    """Parse a SubRip (.srt) file; same cue mapping as parse_vtt.

    Comma decimal separators in timestamps are accepted (and are the SubRip
    convention); numeric cue indices are ignored.
    """
    lines = _decode(data).split("\n")
    segments = _collect_cues(lines, 0)
    if not segments:
        raise FormatError("no cues")
    segments.sort(key=lambda s: s.start)
    return Transcript(video_ref=video_ref, language=language, segments=segments)


def parse_segments_json(
    data: bytes, video_ref: str = "", language: str = "und"
) -> Transcript:
    """Parse a JSON array of {"text", "start", "duration"} objects.

    Field-for-field mapping; output is sorted by start if the input is not.
    """
    try:
        parsed = json.loads(_decode(data))
    except json.JSONDecodeError as err:
        raise FormatError(f"invalid JSON: {err.msg}", err.lineno) from None
    if not isinstance(parsed, list):
        raise FormatError("top-level JSON value must be an array")
    segments = []
    for i, item in enumerate(parsed):
        if not isinstance(item, dict):
            raise FormatError(f"entry {i} is not an object")
        for key in ("text", "start", "duration"):
            if key not in item:
                raise FormatError(f"entry {i} missing field {key!r}")
        text = str(item["text"])
        try:
            start = float(item["start"])
            duration = float(item["duration"])
        except (TypeError, ValueError):
            raise FormatError(f"entry {i}: start/duration must be numbers") from None
        if start < 0:
            raise FormatError(f"entry {i}: negative start {start}")
        if duration <= 0:
            raise FormatError(f"entry {i}: non-positive duration {duration}")
        if not text.strip():
            raise FormatError(f"entry {i}: empty text")
        segments.append(TranscriptSegment(text=text, start=start, duration=duration))
    segments.sort(key=lambda s: s.start)
    return Transcript(video_ref=video_ref, language=language, segments=segments)


def segments_to_json(t: Transcript) -> bytes:
    """Canonical serializer for the JSON segment format (round-trip partner
    of the parse_* functions)."""
    rows = [
        {"text": s.text, "start": s.start, "duration": s.duration} for s in t.segments
    ]
    return (json.dumps(rows, ensure_ascii=False, indent=2) + "\n").encode("utf-8")


def window_around(
    t: Transcript,
    video_time: float,
    before: float = DEFAULT_WINDOW_BEFORE,
    after: float = DEFAULT_WINDOW_AFTER,
) -> TranscriptWindow:
    """Extract the transcript excerpt intersecting [video_time - before,
    video_time + after].

    A segment is included iff its half-open interval [start, start + duration)
    intersects the closed window. If nothing intersects (note taken during
    silence or past the end), falls back to the single segment nearest in time.
    """
    if before < 0 or after < 0:
        raise ValueError("before and after must be non-negative")
    if not t.segments:
        raise EmptyTranscript("transcript has no segments")

    w0 = video_time - before
    w1 = video_time + after
    hits = [
        i
        for i, seg in enumerate(t.segments)
        if seg.start <= w1 and seg.end > w0
    ]
    if not hits:
        # distance from video_time to the closed segment interval; earliest wins ties
        def gap(seg: TranscriptSegment) -> float:
            if video_time < seg.start:
                return seg.start - video_time
            if video_time > seg.end:
                return video_time - seg.end
            return 0.0

        nearest = min(range(len(t.segments)), key=lambda i: (gap(t.segments[i]), i))
        hits = [nearest]

    text = " ".join(t.segments[i].text.strip() for i in hits)
    return TranscriptWindow(
        text=text,
        first_index=hits[0],
        last_index=hits[-1],
        window_start=w0,
        window_end=w1,
    )


def full_text(t: Transcript) -> str:
    """All segment texts joined by single spaces in time order."""
    return " ".join(seg.text.strip() for seg in t.segments)
