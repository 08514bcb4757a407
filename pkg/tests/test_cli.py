"""CLI subcommands: exit codes, machine-parseable errors, golden stdout."""

from __future__ import annotations

import pytest

from noteeline.cli import main
from noteeline.store import Store

from conftest import (
    FIXTURES,
    OCEAN_SUMMARY_RESPONSE,
    ReplayHarness,
    ocean_notebook,
)
from oracles import oracle_chi_squared

HANDWRITTEN = (
    "plastic up 200% in 10 yrs\n"
    "nets -> half the debris\n"
    "heat stresses coral algae, reefs bleach\n"
)


def run(tmp_path, *argv, capsys=None):
    code = main(["--store", str(tmp_path / "data"), *argv])
    if capsys is None:
        return code, "", ""
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# -- ingest -----------------------------------------------------------------------


def test_ingest_vtt(tmp_path, capsys):
    code, out, _ = run(tmp_path, "ingest", str(FIXTURES / "sample.vtt"), capsys=capsys)
    assert code == 0
    assert "3 segments" in out
    notebook_id = out.split()[1].rstrip(":")
    store = Store(tmp_path / "data")
    nb = store.load_notebook(notebook_id)
    assert len(nb.transcript.segments) == 3


def test_ingest_is_deterministic(tmp_path, capsys):
    _, first, _ = run(tmp_path, "ingest", str(FIXTURES / "sample.vtt"), capsys=capsys)
    _, second, _ = run(tmp_path, "ingest", str(FIXTURES / "sample.vtt"), capsys=capsys)
    assert first == second


def test_ingest_srt_and_json(tmp_path, capsys):
    code, out, _ = run(tmp_path, "ingest", str(FIXTURES / "sample.srt"), capsys=capsys)
    assert code == 0 and "2 segments" in out
    code, out, _ = run(
        tmp_path, "ingest", str(FIXTURES / "sample_segments.json"), "--format", "json",
        capsys=capsys,
    )
    assert code == 0 and "2 segments" in out


def test_ingest_malformed_vtt_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.vtt"
    bad.write_text("no header here\n", "utf-8")
    code, _, err = run(tmp_path, "ingest", str(bad), capsys=capsys)
    assert code == 2
    assert err.startswith("FORMAT_ERROR:")


def test_ingest_missing_file_exit_2(tmp_path, capsys):
    code, _, err = run(tmp_path, "ingest", str(tmp_path / "nope.vtt"), capsys=capsys)
    assert code == 2
    assert err.startswith("NOT_FOUND:")


# -- synthesis subcommands -----------------------------------------------------------


def seeded_store(tmp_path) -> ReplayHarness:
    harness = ReplayHarness(tmp_path / "data")
    harness.seed_ocean()
    harness.store.save_notebook(ocean_notebook())
    return harness


def test_expand_then_themes_cues_summary_export(tmp_path, capsys):
    seeded_store(tmp_path)

    code, out, _ = run(tmp_path, "expand", "ocean-pollution", capsys=capsys)
    assert code == 0
    assert out.strip() == "expanded 3 ok, 0 refused"

    code, out, _ = run(tmp_path, "themes", "ocean-pollution", capsys=capsys)
    assert code == 0
    assert "Sources of Ocean Plastic" in out

    code, out, _ = run(tmp_path, "cues", "ocean-pollution", capsys=capsys)
    assert code == 0
    assert out.strip() == "5 cue questions"

    code, out, _ = run(tmp_path, "summary", "ocean-pollution", capsys=capsys)
    assert code == 0
    assert out.strip() == OCEAN_SUMMARY_RESPONSE

    code, out, _ = run(tmp_path, "export", "ocean-pollution", capsys=capsys)
    assert code == 0
    assert out.startswith("# Ocean Pollution Presentation")
    assert "## Summary" in out


def test_expand_without_fixture_exit_3(tmp_path, capsys):
    harness = ReplayHarness(tmp_path / "data")
    harness.store.save_notebook(ocean_notebook())
    code, _, err = run(tmp_path, "expand", "ocean-pollution", capsys=capsys)
    assert code == 3
    assert err.startswith("FIXTURE_MISS: ")
    fingerprint = err.split(": ", 1)[1].strip()
    assert len(fingerprint) == 64  # the offending prompt fingerprint


def test_unknown_notebook_exit_2(tmp_path, capsys):
    code, _, err = run(tmp_path, "expand", "missing", capsys=capsys)
    assert code == 2
    assert err.startswith("NOT_FOUND:")


def test_themes_too_few_notes_exit_2(tmp_path, capsys):
    harness = ReplayHarness(tmp_path / "data")
    harness.store.save_notebook(ocean_notebook())
    code, _, err = run(tmp_path, "themes", "ocean-pollution", capsys=capsys)
    assert code == 2
    assert err.startswith("TOO_FEW_NOTES:")


# -- eval -----------------------------------------------------------------------------


def eval_ready_store(tmp_path) -> ReplayHarness:
    harness = ReplayHarness(tmp_path / "data")
    harness.store.save_notebook(ocean_notebook(expanded=True))
    (tmp_path / "handwritten.txt").write_text(HANDWRITTEN, "utf-8")
    return harness


def test_eval_chi_cell_matches_oracle(tmp_path, capsys):
    eval_ready_store(tmp_path)
    code, out, _ = run(
        tmp_path, "eval", "ocean-pollution",
        "--handwritten", str(tmp_path / "handwritten.txt"),
        "--n-top", "50",
        capsys=capsys,
    )
    assert code == 0
    generated = " ".join(
        ocean_notebook(expanded=True).expansions[i].text for i in ("n1", "n2", "n3")
    )
    expected = oracle_chi_squared(HANDWRITTEN, generated, 50)
    cell = next(line for line in out.splitlines() if "with onboarding" in line)
    assert float(cell.split()[-1]) == pytest.approx(expected, abs=5e-5)  # printed at 4 decimals
    assert "Session stats" in out
    assert "pause count" in out


def test_eval_with_ablation_column(tmp_path, capsys):
    harness = eval_ready_store(tmp_path)
    ablation = ocean_notebook(expanded=True).with_changes(id="ocean-ablation")
    harness.store.save_notebook(ablation)
    code, out, _ = run(
        tmp_path, "eval", "ocean-pollution",
        "--handwritten", str(tmp_path / "handwritten.txt"),
        "--ablation", "ocean-ablation",
        capsys=capsys,
    )
    assert code == 0
    improvement = next(line for line in out.splitlines() if "relative improvement" in line)
    # identical corpora in both arms: 0% improvement
    assert float(improvement.split()[-1]) == pytest.approx(0.0, abs=1e-9)


def test_eval_stdout_is_byte_identical_across_runs(tmp_path, capsys):
    eval_ready_store(tmp_path)
    args = (
        "eval", "ocean-pollution", "--handwritten", str(tmp_path / "handwritten.txt"),
    )
    _, first, _ = run(tmp_path, *args, capsys=capsys)
    _, second, _ = run(tmp_path, *args, capsys=capsys)
    assert first == second
    golden = (FIXTURES / "golden_eval_stdout.txt").read_text("utf-8")
    assert first == golden


def test_eval_empty_handwritten_exit_2(tmp_path, capsys):
    eval_ready_store(tmp_path)
    (tmp_path / "empty.txt").write_text("...", "utf-8")
    code, _, err = run(
        tmp_path, "eval", "ocean-pollution", "--handwritten", str(tmp_path / "empty.txt"),
        capsys=capsys,
    )
    assert code == 2
    assert err.startswith("EMPTY_CORPUS:")
