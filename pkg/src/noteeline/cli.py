"""Batch and evaluation entry point.

Subcommands:

    ingest <captions-file> --format vtt|srt|json   create a notebook from captions
    expand <notebook> [--no-personalization]       expand pending micronotes
    themes <notebook>                              organize notes into themes
    cues <notebook> [--regenerate]                 generate 5 review questions
    summary <notebook>                             generate the summary
    eval <notebook> --handwritten FILE [--n-top N] [--ablation NOTEBOOK]
    export <notebook> [-o FILE]                    render markdown
    serve                                          run the HTTP service

Exit codes: 0 success, 2 validation error, 3 gateway/generation error.
Errors print as a single machine-parseable line "CODE: detail" on stderr.
Honors NOTEELINE_STORE_DIR, NOTEELINE_LLM_MODE, NOTEELINE_LLM_BASE_URL,
NOTEELINE_LLM_API_KEY, and NOTEELINE_BIND_ADDR.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys
from pathlib import Path
from typing import Optional

from . import pipeline as pl
from .api import ENV_STORE_DIR, create_app, map_error
from .gateway import Gateway, GatewayError
from .model import Notebook, UserProfile
from .report import build_report, expansion_corpus, render_text_report
from .store import NotFound, Store, export_markdown
from .transcript import parse_segments_json, parse_srt, parse_vtt

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_GATEWAY = 3

_GATEWAY_CODES = {
    "FIXTURE_MISS",
    "AUTH_ERROR",
    "RATE_LIMITED",
    "TIMEOUT",
    "TRANSPORT_ERROR",
    "PARSE_ERROR",
}

_PARSERS = {"vtt": parse_vtt, "srt": parse_srt, "json": parse_segments_json}


def _store(args: argparse.Namespace) -> Store:
    return Store(args.store or os.environ.get(ENV_STORE_DIR, "./noteeline-data"))


def _pipeline(store: Store) -> pl.Pipeline:
    return pl.Pipeline(Gateway(fixtures=store.fixture_store()))


def _fail(err: Exception) -> int:
    mapped = map_error(err)
    print(f"{mapped.code}: {mapped.detail}", file=sys.stderr)
    if isinstance(err, (GatewayError, pl.ParseError)) or mapped.code in _GATEWAY_CODES:
        return EXIT_GATEWAY
    return EXIT_VALIDATION


def _load_profile(store: Store, user_id: str) -> Optional[UserProfile]:
    try:
        return store.load_profile(user_id)
    except NotFound:
        return None


def cmd_ingest(args: argparse.Namespace) -> int:
    path = Path(args.captions_file)
    fmt = args.format or path.suffix.lstrip(".").lower()
    if fmt not in _PARSERS:
        print(f"VALIDATION: unknown caption format {fmt!r}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        data = path.read_bytes()
    except OSError as err:
        print(f"NOT_FOUND: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        transcript = _PARSERS[fmt](data, video_ref=path.name)
    except Exception as err:
        return _fail(err)
    # content-derived id: identical caption files ingest to identical notebooks
    notebook_id = hashlib.sha256(data).hexdigest()[:12]
    nb = Notebook(
        id=notebook_id,
        title=args.title or path.stem,
        user_id=args.user,
        transcript=transcript,
    )
    store = _store(args)
    try:
        store.save_notebook(nb)
    except Exception as err:
        return _fail(err)
    print(f"notebook {nb.id}: {len(transcript.segments)} segments")
    return EXIT_OK


def _run_synthesis(args: argparse.Namespace, action: str) -> int:
    store = _store(args)
    pipeline = _pipeline(store)
    try:
        nb = store.load_notebook(args.notebook)
    except Exception as err:
        return _fail(err)
    try:
        if action == "expand":
            personalize = not args.no_personalization
            profile = _load_profile(store, nb.user_id) if personalize else None
            nb = pipeline.expand_all(nb, profile, personalize=personalize)
            failures = [
                e.failure_reason
                for e in nb.expansions.values()
                if e.status == "failed" and e.failure_reason
            ]
            if failures:
                # batch state is persisted below, but a gateway failure is exit 3
                store.save_notebook(nb)
                print(failures[0], file=sys.stderr)
                return EXIT_GATEWAY
            ok = sum(1 for e in nb.expansions.values() if e.status == "ok")
            refused = sum(1 for e in nb.expansions.values() if e.status == "refused")
            line = f"expanded {ok} ok, {refused} refused"
        elif action == "themes":
            themes = pipeline.organize_by_theme(nb)
            nb = pipeline.apply_themes(nb, themes)
            line = f"{len(themes)} themes: " + ", ".join(t.theme_name for t in themes)
        elif action == "cues":
            nonce = nb.cue_nonce + 1 if args.regenerate else nb.cue_nonce
            questions = pipeline.generate_cue_questions(nb, nonce=nonce)
            nb = nb.with_changes(cue_questions=tuple(questions), cue_nonce=nonce)
            line = f"{len(questions)} cue questions"
        else:  # summary
            text = pipeline.generate_summary(nb)
            nb = nb.with_changes(summary=text)
            line = text
        store.save_notebook(nb)
    except Exception as err:
        return _fail(err)
    print(line)
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    store = _store(args)
    try:
        nb = store.load_notebook(args.notebook)
        handwritten = Path(args.handwritten).read_text("utf-8")
    except OSError as err:
        print(f"NOT_FOUND: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as err:
        return _fail(err)

    generated_without: Optional[str] = None
    if args.ablation:
        try:
            ablation_nb = store.load_notebook(args.ablation)
        except Exception as err:
            return _fail(err)
        generated_without = expansion_corpus(ablation_nb)

    try:
        document = build_report(
            nb,
            handwritten=handwritten,
            generated_without=generated_without,
            n_top=args.n_top,
        )
    except Exception as err:
        return _fail(err)
    store.save_report(nb.id, document)
    sys.stdout.write(render_text_report(document))
    return EXIT_OK


def cmd_export(args: argparse.Namespace) -> int:
    store = _store(args)
    try:
        nb = store.load_notebook(args.notebook)
    except Exception as err:
        return _fail(err)
    markdown = export_markdown(nb)
    if args.output:
        Path(args.output).write_text(markdown, "utf-8")
        print(f"wrote {args.output}")
    else:
        sys.stdout.write(markdown)
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    store = _store(args)
    bind = args.bind or os.environ.get("NOTEELINE_BIND_ADDR", "127.0.0.1:8000")
    host, _, port = bind.partition(":")
    uvicorn.run(create_app(store=store), host=host or "127.0.0.1", port=int(port or 8000))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="noteeline")
    parser.add_argument("--store", help="store directory (default: NOTEELINE_STORE_DIR)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="create a notebook from a caption file")
    p.add_argument("captions_file")
    p.add_argument("--format", choices=sorted(_PARSERS), help="inferred from suffix if omitted")
    p.add_argument("--title")
    p.add_argument("--user", default="default")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("expand", help="expand pending micronotes")
    p.add_argument("notebook")
    p.add_argument("--no-personalization", action="store_true")
    p.set_defaults(func=lambda a: _run_synthesis(a, "expand"))

    p = sub.add_parser("themes", help="organize notes into themes")
    p.add_argument("notebook")
    p.set_defaults(func=lambda a: _run_synthesis(a, "themes"))

    p = sub.add_parser("cues", help="generate cue questions")
    p.add_argument("notebook")
    p.add_argument("--regenerate", action="store_true")
    p.set_defaults(func=lambda a: _run_synthesis(a, "cues"))

    p = sub.add_parser("summary", help="generate the summary")
    p.add_argument("notebook")
    p.set_defaults(func=lambda a: _run_synthesis(a, "summary"))

    p = sub.add_parser("eval", help="print the evaluation tables")
    p.add_argument("notebook")
    p.add_argument("--handwritten", required=True, help="file of the user's own notes")
    p.add_argument("--n-top", type=int, default=500)
    p.add_argument("--ablation", help="notebook expanded with --no-personalization")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("export", help="render notebook markdown")
    p.add_argument("notebook")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--bind", help="host:port (default NOTEELINE_BIND_ADDR)")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
