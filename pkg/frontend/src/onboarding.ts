// Onboarding wizard: three short clips, one (keypoint, full note) pair each.
// Runs exactly once per user; the server-side profile is the source of truth
// for completion, and partial progress survives reloads via injected storage.

import type { ApiClient } from './api.js';
import type { OnboardingExample } from './types.js';

export interface ClipConfig {
  clipRef: string;
  title: string;
  videoUrl: string;
  transcriptExcerpt: string;
}

export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

interface Draft {
  keypoint: string;
  fullNote: string;
}

export class ValidationError extends Error {}

const REQUIRED_EXAMPLES = 3;

/** True when the user still needs the wizard (no server-side profile). */
export async function onboardingRequired(api: ApiClient, userId: string): Promise<boolean> {
  const profile = await api.getProfile(userId);
  return profile === null || profile.examples.length < REQUIRED_EXAMPLES;
}

export class OnboardingWizard {
  private drafts: (Draft | null)[];

  constructor(
    private api: ApiClient,
    private userId: string,
    private clips: ClipConfig[],
    private storage?: StorageLike,
  ) {
    if (clips.length !== REQUIRED_EXAMPLES) {
      throw new Error(`exactly ${REQUIRED_EXAMPLES} onboarding clips required`);
    }
    this.drafts = new Array(REQUIRED_EXAMPLES).fill(null);
    this.restore();
  }

  private get storageKey(): string {
    return `noteeline.onboarding.${this.userId}`;
  }

  private restore(): void {
    if (!this.storage) return;
    const raw = this.storage.getItem(this.storageKey);
    if (!raw) return;
    try {
      const saved = JSON.parse(raw) as (Draft | null)[];
      if (Array.isArray(saved) && saved.length === REQUIRED_EXAMPLES) {
        this.drafts = saved;
      }
    } catch {
      // corrupt draft: start over
    }
  }

  private persist(): void {
    this.storage?.setItem(this.storageKey, JSON.stringify(this.drafts));
  }

  /** First clip still missing its example; wizard resumes here after reload. */
  get stepIndex(): number {
    const index = this.drafts.findIndex((draft) => draft === null);
    return index === -1 ? REQUIRED_EXAMPLES : index;
  }

  get complete(): boolean {
    return this.drafts.every((draft) => draft !== null);
  }

  currentClip(): ClipConfig {
    return this.clips[Math.min(this.stepIndex, REQUIRED_EXAMPLES - 1)];
  }

  /** Validates locally and records one step; no server call happens here. */
  submitStep(keypoint: string, fullNote: string): void {
    if (this.complete) {
      throw new ValidationError('all steps already completed');
    }
    if (!keypoint.trim()) {
      throw new ValidationError('keypoint must not be empty');
    }
    if (!fullNote.trim()) {
      throw new ValidationError('full note must not be empty');
    }
    this.drafts[this.stepIndex] = { keypoint: keypoint.trim(), fullNote: fullNote.trim() };
    this.persist();
  }

  examples(): OnboardingExample[] {
    return this.drafts.map((draft, i) => {
      if (draft === null) {
        throw new ValidationError(`step ${i + 1} incomplete`);
      }
      return {
        clip_ref: this.clips[i].clipRef,
        transcript_excerpt: this.clips[i].transcriptExcerpt,
        keypoint: draft.keypoint,
        full_note: draft.fullNote,
      };
    });
  }

  /** Submits all three examples; refuses while any step is incomplete. */
  async finish(): Promise<void> {
    if (!this.complete) {
      throw new ValidationError(
        `cannot finish: ${REQUIRED_EXAMPLES - this.drafts.filter(Boolean).length} step(s) left`,
      );
    }
    await this.api.submitOnboarding(this.userId, this.examples());
    this.storage?.removeItem(this.storageKey);
  }
}
