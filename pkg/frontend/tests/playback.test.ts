import { afterEach, beforeEach, describe, expect, it, vi } from 'vitest';

import { ApiClient } from '../src/api.js';
import { FLUSH_INTERVAL_MS, PlaybackLogger } from '../src/playback.js';
import { MockBackend, emptyNotebook } from './helpers.js';

describe('playback logger', () => {
  let backend: MockBackend;
  let api: ApiClient;

  beforeEach(() => {
    vi.useFakeTimers();
    backend = new MockBackend();
    api = new ApiClient('http://mock', backend.fetch);
    backend.notebooks.set('nb1', emptyNotebook('nb1'));
  });

  afterEach(() => {
    vi.useRealTimers();
  });

  it('records events with wall timestamps; seek carries target_time', async () => {
    const logger = new PlaybackLogger(api, 'nb1', () => new Date('2024-03-01T12:00:05Z'));
    logger.record('pause', 14);
    logger.record('seek', 30, 25);
    logger.record('rate_change', 31);
    expect(logger.pending).toBe(3);

    await logger.flush();
    const events = backend.notebooks.get('nb1')!.events;
    expect(events).toHaveLength(3);
    expect(events[0]).toMatchObject({ kind: 'pause', video_time: 14 });
    expect(events[1]).toMatchObject({ kind: 'seek', video_time: 30, target_time: 25 });
    expect(events[2].target_time).toBeUndefined();
    expect(logger.pending).toBe(0);
  });

  it('bulk-flushes on the 5 second interval', async () => {
    const logger = new PlaybackLogger(api, 'nb1');
    logger.start();
    logger.record('play', 0);
    logger.record('pause', 3);

    expect(backend.callsTo('POST', '/events')).toBe(0);
    await vi.advanceTimersByTimeAsync(FLUSH_INTERVAL_MS);
    expect(backend.callsTo('POST', '/events')).toBe(1);
    expect(backend.notebooks.get('nb1')!.events).toHaveLength(2);

    // idle interval: nothing queued, no extra requests
    await vi.advanceTimersByTimeAsync(FLUSH_INTERVAL_MS);
    expect(backend.callsTo('POST', '/events')).toBe(1);
    logger.stop();
  });

  it('requeues events when the server is unreachable, then retries in order', async () => {
    let offline = true;
    const flakyFetch: typeof backend.fetch = async (url, init) => {
      if (offline) throw new TypeError('network down');
      return backend.fetch(url, init);
    };
    const logger = new PlaybackLogger(new ApiClient('http://mock', flakyFetch), 'nb1');

    logger.record('play', 0);
    logger.record('pause', 2);
    expect(await logger.flush()).toBe(false);
    expect(logger.pending).toBe(2);

    logger.record('seek', 9, 4);
    offline = false;
    expect(await logger.flush()).toBe(true);
    expect(logger.pending).toBe(0);
    const events = backend.notebooks.get('nb1')!.events;
    expect(events.map((e) => e.kind)).toEqual(['play', 'pause', 'seek']);
  });
});
