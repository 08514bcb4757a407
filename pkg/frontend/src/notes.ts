// Notes panel controller: commits micronotes, edits, synthesis calls, and
// drag-and-drop theme moves. Holds the latest server notebook; every
// user-visible mutation is exactly one API call whose response replaces the
// local copy (reconciliation by server-assigned ids).

import type { ApiClient } from './api.js';
import type { Micronote, Notebook } from './types.js';

export class NotesController {
  constructor(
    private api: ApiClient,
    public notebook: Notebook,
    private now: () => Date = () => new Date(),
  ) {}

  get notebookId(): string {
    return this.notebook.id;
  }

  async refresh(): Promise<Notebook> {
    this.notebook = await this.api.getNotebook(this.notebookId);
    return this.notebook;
  }

  /**
   * Commit a micronote typed at the given playback position. `startedWall`
   * is the wall time of the first keystroke; writing time runs from there to
   * commit. Insertion is optimistic: the note joins the local list as soon as
   * the server assigns its id.
   */
  async commitMicronote(
    text: string,
    videoTime: number,
    startedWall?: Date,
  ): Promise<Micronote> {
    const finished = this.now();
    const created = startedWall ?? finished;
    const note = await this.api.addMicronote(this.notebookId, {
      text,
      video_time: videoTime,
      created_wall: created.toISOString(),
      finished_wall: finished.toISOString(),
    });
    this.notebook = {
      ...this.notebook,
      micronotes: [...this.notebook.micronotes, note],
    };
    return note;
  }

  async editMicronote(noteId: string, text: string): Promise<void> {
    this.notebook = await this.api.editNote(this.notebookId, noteId, { micronote_text: text });
  }

  async editExpansion(noteId: string, text: string): Promise<void> {
    this.notebook = await this.api.editNote(this.notebookId, noteId, { expansion_text: text });
  }

  async expandAll(): Promise<void> {
    this.notebook = await this.api.expand(this.notebookId);
  }

  async expandOne(noteId: string): Promise<void> {
    this.notebook = await this.api.expand(this.notebookId, noteId);
  }

  async organizeThemes(): Promise<void> {
    this.notebook = await this.api.organizeThemes(this.notebookId);
  }

  /** Drag-and-drop handler target: move one note under another theme. */
  async moveNote(noteId: string, targetTheme: string): Promise<void> {
    this.notebook = await this.api.moveNote(this.notebookId, noteId, targetTheme);
  }

  async orderByTime(): Promise<void> {
    this.notebook = await this.api.setOrder(this.notebookId, 'by_time');
  }

  async orderByTheme(): Promise<void> {
    this.notebook = await this.api.setOrder(this.notebookId, 'by_theme');
  }

  async generateCues(regenerate = false): Promise<void> {
    this.notebook = await this.api.generateCues(this.notebookId, regenerate);
  }

  async generateSummary(): Promise<void> {
    this.notebook = await this.api.generateSummary(this.notebookId);
  }

  themeFor(noteId: string): string | null {
    for (const theme of this.notebook.themes ?? []) {
      if (theme.note_ids.includes(noteId)) {
        return theme.theme_name;
      }
    }
    return null;
  }

  micronote(noteId: string): Micronote | undefined {
    return this.notebook.micronotes.find((m) => m.id === noteId);
  }
}
