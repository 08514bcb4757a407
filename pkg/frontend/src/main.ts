// DOM wiring for the notetaking surface: video viewport on top, Notes panel
// below, collapsible Cues panel, Summary panel. All state logic lives in the
// imported modules; this file only binds it to elements.

import { ApiClient, ApiError } from './api.js';
import { NotesController } from './notes.js';
import { OnboardingWizard, onboardingRequired, type ClipConfig } from './onboarding.js';
import { PlaybackLogger } from './playback.js';
import { formatTime, type Notebook } from './types.js';
import { ViewState, displayOrder } from './view.js';

const API_BASE = (window as { NOTEELINE_API?: string }).NOTEELINE_API ?? 'http://127.0.0.1:8000';
const USER_ID = new URLSearchParams(location.search).get('user') ?? 'default';
const NOTEBOOK_ID = new URLSearchParams(location.search).get('notebook');

// three short clips (20-30 s each) shown once, during onboarding
const ONBOARDING_CLIPS: ClipConfig[] = [
  {
    clipRef: 'clip-science',
    title: 'How cells make energy',
    videoUrl: 'clips/science.mp4',
    transcriptExcerpt:
      'mitochondria take in nutrients and convert them into usable energy for the cell',
  },
  {
    clipRef: 'clip-psychology',
    title: 'Getting motivated',
    videoUrl: 'clips/psychology.mp4',
    transcriptExcerpt: 'motivation often follows action rather than preceding it',
  },
  {
    clipRef: 'clip-blog',
    title: 'Headset comparison',
    videoUrl: 'clips/blog.mp4',
    transcriptExcerpt: 'the headset weighs about 600 grams and ships with an external battery',
  },
];

const api = new ApiClient(API_BASE);
const view = new ViewState();

// user-tunable behavior; whether pausing should focus the note input is a
// preference, not a rule, so it ships as a setting
const SETTINGS = { focusNotesOnPause: false };

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
}

function showError(message: string): void {
  const banner = el<HTMLDivElement>('error-banner');
  banner.textContent = message;
  banner.hidden = false;
  setTimeout(() => {
    banner.hidden = true;
  }, 6000);
}

async function guard<T>(work: () => Promise<T>): Promise<T | undefined> {
  try {
    return await work();
  } catch (err) {
    showError(err instanceof ApiError ? `${err.code}: ${err.detail}` : String(err));
    return undefined;
  }
}

// -- onboarding ---------------------------------------------------------------

async function runOnboarding(): Promise<void> {
  if (!(await onboardingRequired(api, USER_ID))) return;

  const wizard = new OnboardingWizard(api, USER_ID, ONBOARDING_CLIPS, localStorage);
  const dialog = el<HTMLDialogElement>('onboarding');
  const clipTitle = el<HTMLHeadingElement>('onboarding-clip-title');
  const clipVideo = el<HTMLVideoElement>('onboarding-clip');
  const stepLabel = el<HTMLSpanElement>('onboarding-step');
  const keypoint = el<HTMLInputElement>('onboarding-keypoint');
  const fullNote = el<HTMLTextAreaElement>('onboarding-full-note');
  const feedback = el<HTMLParagraphElement>('onboarding-feedback');

  const showStep = () => {
    const clip = wizard.currentClip();
    stepLabel.textContent = `Step ${Math.min(wizard.stepIndex + 1, 3)} of 3`;
    clipTitle.textContent = clip.title;
    clipVideo.src = clip.videoUrl;
    keypoint.value = '';
    fullNote.value = '';
  };

  el<HTMLButtonElement>('onboarding-next').onclick = async () => {
    feedback.textContent = '';
    try {
      wizard.submitStep(keypoint.value, fullNote.value);
    } catch (err) {
      feedback.textContent = String(err instanceof Error ? err.message : err);
      return;
    }
    if (!wizard.complete) {
      showStep();
      return;
    }
    const done = await guard(() => wizard.finish());
    if (done !== undefined) {
      dialog.close();
    }
  };

  showStep();
  dialog.showModal();
  await new Promise<void>((resolve) => {
    dialog.addEventListener('close', () => resolve(), { once: true });
  });
}

// -- notebook rendering ----------------------------------------------------------

function renderNotes(controller: NotesController): void {
  const list = el<HTMLDivElement>('notes-list');
  list.textContent = '';
  let currentThemeBlock: HTMLDivElement | null = null;
  let currentTheme: string | null = null;

  for (const { theme, note } of displayOrder(controller.notebook)) {
    if (theme !== currentTheme || currentThemeBlock === null) {
      currentTheme = theme;
      currentThemeBlock = document.createElement('div');
      currentThemeBlock.className = 'theme-block';
      if (theme !== null) {
        const heading = document.createElement('h3');
        heading.textContent = theme;
        currentThemeBlock.appendChild(heading);
        currentThemeBlock.dataset.theme = theme;
        currentThemeBlock.addEventListener('dragover', (event) => event.preventDefault());
        currentThemeBlock.addEventListener('drop', (event) => {
          event.preventDefault();
          const noteId = event.dataTransfer?.getData('text/noteeline-note');
          if (noteId && theme) {
            void guard(() => controller.moveNote(noteId, theme)).then(() =>
              renderNotes(controller),
            );
          }
        });
      }
      list.appendChild(currentThemeBlock);
    }

    const expansion = controller.notebook.expansions[note.id];
    const row = document.createElement('div');
    row.className = 'note-row';
    row.draggable = controller.notebook.ordering_mode === 'by_theme';
    row.addEventListener('dragstart', (event) => {
      event.dataTransfer?.setData('text/noteeline-note', note.id);
    });

    const chip = document.createElement('button');
    chip.className = 'timestamp-chip';
    chip.textContent = `[${formatTime(note.video_time)}]`;
    chip.onclick = () => {
      el<HTMLVideoElement>('player').currentTime = note.video_time;
    };

    const text = document.createElement('span');
    text.className = 'note-text';
    text.textContent = view.displayText(note, expansion);
    if (expansion?.status === 'refused') {
      text.classList.add('refused');
      text.title = 'The model asked for more context; showing your micronote.';
    }

    const toggle = document.createElement('button');
    toggle.textContent = view.isExpanded(note.id) ? 'Reduce' : 'Expand';
    toggle.onclick = async () => {
      if (!controller.notebook.expansions[note.id] && !view.isExpanded(note.id)) {
        await guard(() => controller.expandOne(note.id));
      }
      view.toggleNote(note.id);
      renderNotes(controller);
    };

    const edit = document.createElement('button');
    edit.textContent = 'Edit';
    edit.onclick = async () => {
      const editingExpansion = view.isExpanded(note.id) && expansion?.status === 'ok';
      const current = editingExpansion ? expansion.text : note.text;
      const next = prompt(editingExpansion ? 'Edit expanded note' : 'Edit micronote', current);
      if (next !== null && next !== current) {
        await guard(() =>
          editingExpansion
            ? controller.editExpansion(note.id, next)
            : controller.editMicronote(note.id, next),
        );
        renderNotes(controller);
      }
    };

    row.append(chip, text, toggle, edit);
    currentThemeBlock.appendChild(row);
  }
}

function renderCues(controller: NotesController): void {
  const panel = el<HTMLDivElement>('cues-panel');
  const list = el<HTMLOListElement>('cues-list');
  panel.hidden = view.cuesHidden;
  list.textContent = '';
  for (const cue of controller.notebook.cue_questions ?? []) {
    const item = document.createElement('li');
    const question = document.createElement('p');
    question.textContent = cue.question;
    item.appendChild(question);
    cue.options.forEach((option, index) => {
      const choice = document.createElement('button');
      choice.className = 'cue-option';
      choice.textContent = option;
      choice.onclick = () => {
        // answers reveal per-question on click for self-quizzing
        choice.classList.add(index === cue.answer_index ? 'correct' : 'wrong');
      };
      item.appendChild(choice);
    });
    list.appendChild(item);
  }
}

function renderSummary(controller: NotesController): void {
  el<HTMLParagraphElement>('summary-text').textContent =
    controller.notebook.summary ?? 'No summary yet.';
}

function renderAll(controller: NotesController): void {
  renderNotes(controller);
  renderCues(controller);
  renderSummary(controller);
}

// -- session ---------------------------------------------------------------------

async function openNotebook(): Promise<Notebook> {
  if (NOTEBOOK_ID) {
    return api.getNotebook(NOTEBOOK_ID);
  }
  const existing = await api.listNotebooks();
  if (existing.length > 0) {
    return api.getNotebook(existing[existing.length - 1]);
  }
  return api.createNotebook('Untitled session', USER_ID);
}

async function start(): Promise<void> {
  await runOnboarding();

  const notebook = await openNotebook();
  const controller = new NotesController(api, notebook);
  const logger = new PlaybackLogger(api, notebook.id);
  logger.start();
  window.addEventListener('beforeunload', () => {
    void logger.flush();
  });

  const player = el<HTMLVideoElement>('player');
  player.addEventListener('play', () => logger.record('play', player.currentTime));
  player.addEventListener('pause', () => {
    logger.record('pause', player.currentTime);
    if (SETTINGS.focusNotesOnPause) {
      el<HTMLInputElement>('note-input').focus();
    }
  });
  let seekFrom = 0;
  player.addEventListener('seeking', () => logger.record('seek', seekFrom, player.currentTime));
  player.addEventListener('timeupdate', () => {
    if (!player.seeking) seekFrom = player.currentTime;
  });
  player.addEventListener('ratechange', () => logger.record('rate_change', player.currentTime));

  const input = el<HTMLInputElement>('note-input');
  let typingStarted: Date | null = null;
  input.addEventListener('input', () => {
    if (typingStarted === null && input.value.length > 0) {
      typingStarted = new Date(); // capture starts at the first keystroke
    }
    if (input.value.length === 0) {
      typingStarted = null;
    }
  });
  input.addEventListener('keydown', async (event) => {
    if (event.key !== 'Enter' || !input.value.trim()) return;
    const text = input.value;
    const started = typingStarted ?? new Date();
    input.value = '';
    typingStarted = null;
    await guard(() => controller.commitMicronote(text, player.currentTime, started));
    renderNotes(controller);
  });

  el<HTMLButtonElement>('expand-all').onclick = async () => {
    await guard(() => controller.expandAll());
    renderNotes(controller);
  };
  el<HTMLButtonElement>('order-theme').onclick = async () => {
    await guard(async () => {
      if (controller.notebook.themes) {
        await controller.orderByTheme();
      } else {
        await controller.organizeThemes();
      }
    });
    renderNotes(controller);
  };
  el<HTMLButtonElement>('order-time').onclick = async () => {
    await guard(() => controller.orderByTime());
    renderNotes(controller);
  };
  el<HTMLButtonElement>('toggle-cues').onclick = async () => {
    view.toggleCues();
    if (!view.cuesHidden && !controller.notebook.cue_questions) {
      await guard(() => controller.generateCues());
    }
    renderCues(controller);
  };
  el<HTMLButtonElement>('regenerate-cues').onclick = async () => {
    await guard(() => controller.generateCues(true));
    renderCues(controller);
  };
  el<HTMLButtonElement>('summarize').onclick = async () => {
    await guard(() => controller.generateSummary());
    renderSummary(controller);
  };

  renderAll(controller);
}

void start().catch((err) => showError(String(err)));
