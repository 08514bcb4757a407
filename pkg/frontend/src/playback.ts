// Playback event capture with periodic bulk flushing. Events queue locally
// and post in batches every few seconds; failed flushes requeue so nothing is
// lost while the server is unreachable.

import type { ApiClient } from './api.js';
import type { PlaybackEvent, PlaybackKind } from './types.js';

export const FLUSH_INTERVAL_MS = 5000;

export class PlaybackLogger {
  private queue: PlaybackEvent[] = [];
  private timer: ReturnType<typeof setInterval> | null = null;
  private flushing = false;

  constructor(
    private api: ApiClient,
    private notebookId: string,
    private now: () => Date = () => new Date(),
  ) {}

  get pending(): number {
    return this.queue.length;
  }

  record(kind: PlaybackKind, videoTime: number, targetTime?: number): void {
    const event: PlaybackEvent = {
      kind,
      video_time: videoTime,
      wall: this.now().toISOString(),
    };
    if (kind === 'seek') {
      event.target_time = targetTime ?? videoTime;
    }
    this.queue.push(event);
  }

  start(intervalMs: number = FLUSH_INTERVAL_MS): void {
    if (this.timer !== null) return;
    this.timer = setInterval(() => {
      void this.flush();
    }, intervalMs);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  /** Post everything queued; on failure the batch goes back to the front. */
  async flush(): Promise<boolean> {
    if (this.flushing || this.queue.length === 0) {
      return true;
    }
    this.flushing = true;
    const batch = this.queue;
    this.queue = [];
    try {
      await this.api.appendEvents(this.notebookId, batch);
      return true;
    } catch {
      this.queue = [...batch, ...this.queue];
      return false;
    } finally {
      this.flushing = false;
    }
  }
}
