// Wire types mirroring the engine's canonical JSON schemas.

export interface TranscriptSegment {
  text: string;
  start: number;
  duration: number;
}

export interface Transcript {
  video_ref: string;
  language: string;
  segments: TranscriptSegment[];
}

export interface Micronote {
  id: string;
  text: string;
  video_time: number;
  created_wall: string;
  finished_wall: string;
}

export type ExpansionStatus = 'ok' | 'refused' | 'failed';

export interface ExpandedNote {
  micronote_id: string;
  text: string;
  model_id: string;
  prompt_fingerprint: string;
  created_wall: string;
  status: ExpansionStatus;
  failure_reason: string | null;
}

export interface ThemeAssignment {
  theme_name: string;
  note_ids: string[];
}

export interface CueQuestion {
  question: string;
  options: string[];
  answer_index: number;
}

export type PlaybackKind = 'play' | 'pause' | 'seek' | 'rate_change';

export interface PlaybackEvent {
  kind: PlaybackKind;
  video_time: number;
  wall: string;
  target_time?: number;
}

export type OrderingMode = 'by_time' | 'by_theme';

export interface Notebook {
  id: string;
  title: string;
  user_id: string;
  transcript: Transcript;
  micronotes: Micronote[];
  expansions: Record<string, ExpandedNote>;
  themes: ThemeAssignment[] | null;
  cue_questions: CueQuestion[] | null;
  summary: string | null;
  events: PlaybackEvent[];
  ordering_mode: OrderingMode;
  cue_nonce: number;
}

export interface OnboardingExample {
  clip_ref: string;
  transcript_excerpt: string;
  keypoint: string;
  full_note: string;
}

export interface Profile {
  user_id: string;
  examples: OnboardingExample[];
}

/** Format seconds as MM:SS (or HH:MM:SS past the hour). */
export function formatTime(seconds: number): string {
  const total = Math.floor(seconds);
  const hours = Math.floor(total / 3600);
  const minutes = Math.floor((total % 3600) / 60);
  const secs = total % 60;
  const mmss = `${String(minutes).padStart(2, '0')}:${String(secs).padStart(2, '0')}`;
  return hours > 0 ? `${String(hours).padStart(2, '0')}:${mmss}` : mmss;
}
