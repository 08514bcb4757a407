// In-memory stand-in for the engine API, used by the unit tests. It mirrors
// the endpoint semantics the UI depends on (the contract itself is pinned by
// the engine's own test suite; the e2e test drives the real server).

import type { FetchLike } from '../src/api.js';
import type {
  Micronote,
  Notebook,
  OnboardingExample,
  Profile,
  ThemeAssignment,
} from '../src/types.js';

let idCounter = 0;

export function freshId(prefix: string): string {
  idCounter += 1;
  return `${prefix}-${idCounter}`;
}

export function emptyNotebook(id: string, userId = 'default'): Notebook {
  return {
    id,
    title: 'Test notebook',
    user_id: userId,
    transcript: { video_ref: '', language: 'und', segments: [] },
    micronotes: [],
    expansions: {},
    themes: null,
    cue_questions: null,
    summary: null,
    events: [],
    ordering_mode: 'by_time',
    cue_nonce: 0,
  };
}

export function makeNote(id: string, text: string, videoTime: number): Micronote {
  const wall = new Date('2024-03-01T12:00:00Z').toISOString();
  return { id, text, video_time: videoTime, created_wall: wall, finished_wall: wall };
}

function json(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'Content-Type': 'application/json' },
  });
}

function error(status: number, code: string, detail: string): Response {
  return json({ code, detail }, status);
}

export class MockBackend {
  profiles = new Map<string, Profile>();
  notebooks = new Map<string, Notebook>();
  calls: { method: string; path: string; body?: unknown }[] = [];

  fetch: FetchLike = async (url, init) => {
    const method = init?.method ?? 'GET';
    const path = new URL(url, 'http://mock').pathname;
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    this.calls.push({ method, path, body });
    return this.route(method, path, body);
  };

  callsTo(method: string, pathPart: string): number {
    return this.calls.filter((c) => c.method === method && c.path.includes(pathPart)).length;
  }

  private route(method: string, path: string, body?: unknown): Response {
    let match = path.match(/^\/profiles\/([^/]+)\/onboarding$/);
    if (match && method === 'POST') {
      const examples = (body as { examples: OnboardingExample[] }).examples;
      if (!Array.isArray(examples) || examples.length !== 3) {
        return error(422, 'VALIDATION', 'exactly 3 onboarding examples required');
      }
      const profile: Profile = { user_id: match[1], examples };
      this.profiles.set(match[1], profile);
      return json(profile, 201);
    }

    match = path.match(/^\/profiles\/([^/]+)$/);
    if (match && method === 'GET') {
      const profile = this.profiles.get(match[1]);
      return profile ? json(profile) : error(404, 'NOT_FOUND', 'no profile');
    }

    if (path === '/notebooks' && method === 'POST') {
      const request = body as { title: string; user_id: string; id?: string };
      const nb = emptyNotebook(request.id ?? freshId('nb'), request.user_id);
      nb.title = request.title;
      this.notebooks.set(nb.id, nb);
      return json(nb, 201);
    }
    if (path === '/notebooks' && method === 'GET') {
      return json([...this.notebooks.keys()].sort());
    }

    match = path.match(/^\/notebooks\/([^/]+)$/);
    if (match && method === 'GET') {
      const nb = this.notebooks.get(match[1]);
      return nb ? json(nb) : error(404, 'NOT_FOUND', 'no notebook');
    }

    match = path.match(/^\/notebooks\/([^/]+)\/micronotes$/);
    if (match && method === 'POST') {
      const nb = this.notebooks.get(match[1]);
      if (!nb) return error(404, 'NOT_FOUND', 'no notebook');
      const request = body as {
        text: string;
        video_time: number;
        created_wall?: string;
        finished_wall?: string;
      };
      const now = new Date().toISOString();
      const note: Micronote = {
        id: freshId('note'),
        text: request.text,
        video_time: request.video_time,
        created_wall: request.created_wall ?? now,
        finished_wall: request.finished_wall ?? now,
      };
      nb.micronotes = [...nb.micronotes, note];
      return json(note, 201);
    }

    match = path.match(/^\/notebooks\/([^/]+)\/notes\/([^/]+)$/);
    if (match && method === 'PATCH') {
      const nb = this.notebooks.get(match[1]);
      if (!nb) return error(404, 'NOT_FOUND', 'no notebook');
      const note = nb.micronotes.find((m) => m.id === match![2]);
      if (!note) return error(404, 'UNKNOWN_NOTE', 'no such note');
      const patch = body as { micronote_text?: string; expansion_text?: string };
      if (patch.micronote_text !== undefined) {
        if (!patch.micronote_text.trim()) {
          return error(422, 'INVALID_NOTEBOOK', 'micronote text must be non-empty');
        }
        note.text = patch.micronote_text;
      }
      if (patch.expansion_text !== undefined) {
        const expansion = nb.expansions[note.id];
        if (!expansion) return error(404, 'UNKNOWN_NOTE', 'no expansion');
        expansion.text = patch.expansion_text;
      }
      return json(nb);
    }

    match = path.match(/^\/notebooks\/([^/]+)\/themes\/move$/);
    if (match && method === 'POST') {
      const nb = this.notebooks.get(match[1]);
      if (!nb) return error(404, 'NOT_FOUND', 'no notebook');
      if (nb.ordering_mode !== 'by_theme' || !nb.themes) {
        return error(409, 'NOT_IN_THEME_MODE', 'no themes');
      }
      const request = body as { note_id: string; target: string };
      if (!nb.micronotes.some((m) => m.id === request.note_id)) {
        return error(404, 'UNKNOWN_NOTE', 'no such note');
      }
      const next: ThemeAssignment[] = [];
      let found = false;
      for (const theme of nb.themes) {
        const ids = theme.note_ids.filter((id) => id !== request.note_id);
        if (theme.theme_name === request.target) {
          ids.push(request.note_id);
          found = true;
        }
        if (ids.length > 0) next.push({ theme_name: theme.theme_name, note_ids: ids });
      }
      if (!found) next.push({ theme_name: request.target, note_ids: [request.note_id] });
      nb.themes = next;
      return json(nb);
    }

    match = path.match(/^\/notebooks\/([^/]+)\/order$/);
    if (match && method === 'POST') {
      const nb = this.notebooks.get(match[1]);
      if (!nb) return error(404, 'NOT_FOUND', 'no notebook');
      const request = body as { mode: 'by_time' | 'by_theme' };
      if (request.mode === 'by_theme' && !nb.themes) {
        return error(409, 'NOT_IN_THEME_MODE', 'no themes');
      }
      nb.ordering_mode = request.mode;
      return json(nb);
    }

    match = path.match(/^\/notebooks\/([^/]+)\/events$/);
    if (match && method === 'POST') {
      const nb = this.notebooks.get(match[1]);
      if (!nb) return error(404, 'NOT_FOUND', 'no notebook');
      const request = body as { events: Notebook['events'] };
      nb.events = [...nb.events, ...request.events];
      return json(nb);
    }

    return error(500, 'INTERNAL', `unhandled route ${method} ${path}`);
  }
}

/** Minimal in-memory localStorage replacement. */
export class MemoryStorage {
  private data = new Map<string, string>();
  getItem(key: string): string | null {
    return this.data.get(key) ?? null;
  }
  setItem(key: string, value: string): void {
    this.data.set(key, value);
  }
  removeItem(key: string): void {
    this.data.delete(key);
  }
}
