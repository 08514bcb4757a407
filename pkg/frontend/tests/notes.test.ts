import { beforeEach, describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api.js';
import { NotesController } from '../src/notes.js';
import { MockBackend, emptyNotebook, makeNote } from './helpers.js';

describe('notes controller', () => {
  let backend: MockBackend;
  let api: ApiClient;

  beforeEach(() => {
    backend = new MockBackend();
    api = new ApiClient('http://mock', backend.fetch);
    backend.notebooks.set('nb1', emptyNotebook('nb1'));
  });

  it('commits a micronote with capture-start and commit wall times', async () => {
    const commitAt = new Date('2024-03-01T12:00:20Z');
    const controller = new NotesController(api, backend.notebooks.get('nb1')!, () => commitAt);
    const typingStarted = new Date('2024-03-01T12:00:15Z');

    const note = await controller.commitMicronote('plastic pol. ->', 93, typingStarted);

    expect(note.video_time).toBe(93);
    expect(note.created_wall).toBe(typingStarted.toISOString());
    expect(note.finished_wall).toBe(commitAt.toISOString());
    // optimistic local insertion with the server-assigned id
    expect(controller.notebook.micronotes.some((m) => m.id === note.id)).toBe(true);
    // and the server has it too
    expect(backend.notebooks.get('nb1')!.micronotes).toHaveLength(1);
  });

  it('makes exactly one API call per user-visible mutation', async () => {
    const controller = new NotesController(api, backend.notebooks.get('nb1')!);
    await controller.commitMicronote('first note', 1);
    expect(backend.callsTo('POST', '/micronotes')).toBe(1);

    const noteId = controller.notebook.micronotes[0].id;
    await controller.editMicronote(noteId, 'first note, edited');
    expect(backend.callsTo('PATCH', `/notes/${noteId}`)).toBe(1);
    expect(backend.calls).toHaveLength(2);
  });

  it('reconciles local state from each mutation response', async () => {
    const controller = new NotesController(api, backend.notebooks.get('nb1')!);
    await controller.commitMicronote('note one', 1);
    const noteId = controller.notebook.micronotes[0].id;
    await controller.editMicronote(noteId, 'rewritten');
    expect(controller.micronote(noteId)?.text).toBe('rewritten');
  });

  it('moves notes between themes and reports theme membership', async () => {
    const nb = backend.notebooks.get('nb1')!;
    nb.micronotes = [makeNote('a', 'one', 1), makeNote('b', 'two', 2)];
    nb.themes = [
      { theme_name: 'T1', note_ids: ['a'] },
      { theme_name: 'T2', note_ids: ['b'] },
    ];
    nb.ordering_mode = 'by_theme';

    const controller = new NotesController(api, nb);
    expect(controller.themeFor('a')).toBe('T1');

    await controller.moveNote('a', 'T2');
    expect(controller.themeFor('a')).toBe('T2');
    expect(controller.notebook.themes).toEqual([{ theme_name: 'T2', note_ids: ['b', 'a'] }]);
  });
});
