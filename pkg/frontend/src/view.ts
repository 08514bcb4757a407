// Pure view state: which panels are open and which notes show their expanded
// form. Toggling is strictly display-side and never touches stored text.

import type { ExpandedNote, Micronote, Notebook } from './types.js';

export class ViewState {
  /** Cues panel starts hidden to leave space for writing. */
  cuesHidden = true;

  private expandedNoteIds = new Set<string>();

  toggleCues(): void {
    this.cuesHidden = !this.cuesHidden;
  }

  isExpanded(noteId: string): boolean {
    return this.expandedNoteIds.has(noteId);
  }

  /** Expand/Reduce: flips the per-note display and returns the new state. */
  toggleNote(noteId: string): boolean {
    if (this.expandedNoteIds.has(noteId)) {
      this.expandedNoteIds.delete(noteId);
      return false;
    }
    this.expandedNoteIds.add(noteId);
    return true;
  }

  /** Text to display for a note under the current toggle state. */
  displayText(note: Micronote, expansion: ExpandedNote | undefined): string {
    if (this.isExpanded(note.id) && expansion && expansion.status === 'ok') {
      return expansion.text;
    }
    return note.text;
  }
}

/** Notes in display order: capture order, or grouped by theme with any
 * unthemed notes trailing in capture order. */
export function displayOrder(notebook: Notebook): { theme: string | null; note: Micronote }[] {
  const byId = new Map(notebook.micronotes.map((m) => [m.id, m]));
  if (notebook.ordering_mode !== 'by_theme' || !notebook.themes) {
    return notebook.micronotes.map((note) => ({ theme: null, note }));
  }
  const rows: { theme: string | null; note: Micronote }[] = [];
  const seen = new Set<string>();
  for (const theme of notebook.themes) {
    for (const id of theme.note_ids) {
      const note = byId.get(id);
      if (note) {
        rows.push({ theme: theme.theme_name, note });
        seen.add(id);
      }
    }
  }
  for (const note of notebook.micronotes) {
    if (!seen.has(note.id)) {
      rows.push({ theme: null, note });
    }
  }
  return rows;
}
