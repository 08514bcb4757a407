// Typed client for the engine's HTTP API. The UI talks to the backend only
// through this module; it never touches the store or the LLM gateway.

import type {
  Micronote,
  Notebook,
  OnboardingExample,
  OrderingMode,
  PlaybackEvent,
  Profile,
} from './types.js';

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    public detail: string,
  ) {
    super(`${code}: ${detail}`);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, '');
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { 'Content-Type': 'application/json' } };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      let code = 'HTTP_ERROR';
      let detail = response.statusText;
      try {
        const payload = await response.json();
        code = payload.code ?? code;
        detail = payload.detail ?? detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, code, detail);
    }
    return response.json() as Promise<T>;
  }

  async health(): Promise<{ status: string; mode: string; schema_version: number }> {
    return this.request('GET', '/health');
  }

  /** null when the user has not onboarded yet. */
  async getProfile(userId: string): Promise<Profile | null> {
    try {
      return await this.request<Profile>('GET', `/profiles/${encodeURIComponent(userId)}`);
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        return null;
      }
      throw err;
    }
  }

  async submitOnboarding(userId: string, examples: OnboardingExample[]): Promise<Profile> {
    return this.request('POST', `/profiles/${encodeURIComponent(userId)}/onboarding`, {
      examples,
    });
  }

  async createNotebook(title: string, userId: string, id?: string): Promise<Notebook> {
    const body: Record<string, unknown> = { title, user_id: userId };
    if (id) body.id = id;
    return this.request('POST', '/notebooks', body);
  }

  async listNotebooks(): Promise<string[]> {
    return this.request('GET', '/notebooks');
  }

  async getNotebook(id: string): Promise<Notebook> {
    return this.request('GET', `/notebooks/${encodeURIComponent(id)}`);
  }

  async addMicronote(
    notebookId: string,
    note: { text: string; video_time: number; created_wall?: string; finished_wall?: string },
  ): Promise<Micronote> {
    return this.request('POST', `/notebooks/${encodeURIComponent(notebookId)}/micronotes`, note);
  }

  async editNote(
    notebookId: string,
    noteId: string,
    patch: { micronote_text?: string; expansion_text?: string },
  ): Promise<Notebook> {
    return this.request(
      'PATCH',
      `/notebooks/${encodeURIComponent(notebookId)}/notes/${encodeURIComponent(noteId)}`,
      patch,
    );
  }

  async expand(notebookId: string, noteId?: string): Promise<Notebook> {
    const query = noteId ? `?note=${encodeURIComponent(noteId)}` : '';
    return this.request('POST', `/notebooks/${encodeURIComponent(notebookId)}/expand${query}`);
  }

  async organizeThemes(notebookId: string): Promise<Notebook> {
    return this.request('POST', `/notebooks/${encodeURIComponent(notebookId)}/themes`);
  }

  async moveNote(notebookId: string, noteId: string, target: string): Promise<Notebook> {
    return this.request('POST', `/notebooks/${encodeURIComponent(notebookId)}/themes/move`, {
      note_id: noteId,
      target,
    });
  }

  async setOrder(notebookId: string, mode: OrderingMode): Promise<Notebook> {
    return this.request('POST', `/notebooks/${encodeURIComponent(notebookId)}/order`, { mode });
  }

  async generateCues(notebookId: string, regenerate = false): Promise<Notebook> {
    const query = regenerate ? '?regenerate=true' : '';
    return this.request('POST', `/notebooks/${encodeURIComponent(notebookId)}/cues${query}`);
  }

  async generateSummary(notebookId: string): Promise<Notebook> {
    return this.request('POST', `/notebooks/${encodeURIComponent(notebookId)}/summary`);
  }

  async appendEvents(notebookId: string, events: PlaybackEvent[]): Promise<Notebook> {
    return this.request('POST', `/notebooks/${encodeURIComponent(notebookId)}/events`, { events });
  }

  async exportMarkdown(notebookId: string): Promise<string> {
    const response = await this.fetchFn(
      `${this.baseUrl}/notebooks/${encodeURIComponent(notebookId)}/export.md`,
      { method: 'GET' },
    );
    if (!response.ok) {
      throw new ApiError(response.status, 'HTTP_ERROR', response.statusText);
    }
    return response.text();
  }
}
