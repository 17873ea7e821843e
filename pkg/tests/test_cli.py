import numpy as np
import pytest

from placealign.bundle import FeatureBundle, read_bundle, write_bundle
from placealign.cli import main
from placealign.model import AlignConfig, Trajectory
from placealign.spatial import pairwise_image_distances
from placealign.temporal import RetrievalConfig, search_distance_matrix


def run_cli(*args):
    return main([str(a) for a in args])


@pytest.fixture
def synth_files(tmp_path):
    ref = tmp_path / "ref.stab"
    query = tmp_path / "query.stab"
    truth = tmp_path / "truth.csv"
    rc = run_cli(
        "synth", "--frames", 40, "--dim", 24, "--shift", 1, "--noise", 0.1,
        "--seed", 3, "--ref-out", ref, "--query-out", query, "--truth-out", truth,
    )
    assert rc == 0
    return ref, query, truth


def parse_match_output(text):
    rows = []
    for line in text.splitlines():
        if line.startswith("#") or line.startswith("window"):
            continue
        w, mid, rank, start, length, dist, accepted = line.split("\t")
        rows.append((int(w), int(mid), int(rank), int(start), int(length), float(dist)))
    return rows


class TestSynthCommand:
    def test_writes_loadable_outputs(self, synth_files):
        ref, query, truth = synth_files
        rb, qb = read_bundle(ref), read_bundle(query)
        assert rb.n == 40 and rb.width == 7 and rb.dim == 24
        assert qb.n == 40
        assert not rb.projected
        assert truth.read_text().startswith("#")


class TestMatchCommand:
    def test_self_match_is_perfect(self, synth_files, tmp_path, capsys):
        ref, _, _ = synth_files
        out = tmp_path / "matches.tsv"
        rc = run_cli(
            "match", ref, ref, "--seq-len", 10, "--mode", "vanilla", "--output", out
        )
        assert rc == 0
        rows = parse_match_output(out.read_text())
        assert len(rows) == 40 - 10 + 1
        for w, mid, rank, start, length, dist in rows:
            assert rank == 0
            assert start == w
            assert length == 10
            assert dist == pytest.approx(0.0, abs=1e-6)

    def test_output_matches_library_calls(self, synth_files, tmp_path):
        ref, query, _ = synth_files
        out = tmp_path / "matches.tsv"
        rc = run_cli(
            "match", ref, query, "--seq-len", 12, "--beta", 2.0,
            "--mode", "adaptive", "--top-k", 3, "--output", out,
        )
        assert rc == 0
        rows = parse_match_output(out.read_text())

        reference = read_bundle(ref).to_trajectory()
        q = read_bundle(query).to_trajectory()
        cfg = AlignConfig(mode="adaptive")
        rcfg = RetrievalConfig(seq_len=12, beta=2.0)
        dch = pairwise_image_distances(q, reference, cfg)
        expected = []
        for w in range(0, len(q) - 12 + 1):
            ranked, _ = search_distance_matrix(dch[w : w + 12], rcfg.window_len, 3)
            for rank, m in enumerate(ranked):
                expected.append((w, w + 5, rank, m.start, m.length, m.distance))
        assert len(rows) == len(expected)
        for got, want in zip(rows, expected):
            assert got[:5] == want[:5]
            assert got[5] == pytest.approx(want[5], abs=1e-9)

    def test_seed_mismatch_fails_without_output(self, synth_files, tmp_path, capsys):
        ref, query, _ = synth_files
        pref, pquery = tmp_path / "pr.stab", tmp_path / "pq.stab"
        assert run_cli("project", ref, pref, "--target-dim", 8, "--seed", 1) == 0
        assert run_cli("project", query, pquery, "--target-dim", 8, "--seed", 2) == 0
        out = tmp_path / "never.tsv"
        rc = run_cli("match", pref, pquery, "--output", out)
        assert rc == 2
        assert "projection" in capsys.readouterr().err
        assert not out.exists()

    def test_corrupt_bundle_fails(self, synth_files, tmp_path, capsys):
        ref, _, _ = synth_files
        raw = bytearray(ref.read_bytes())
        raw[30] ^= 0xFF
        bad = tmp_path / "bad.stab"
        bad.write_bytes(bytes(raw))
        rc = run_cli("match", bad, ref)
        assert rc == 2
        assert "checksum" in capsys.readouterr().err


class TestProjectCommand:
    def test_projected_bundle_round_trip(self, synth_files, tmp_path):
        ref, query, _ = synth_files
        pref, pquery = tmp_path / "pr.stab", tmp_path / "pq.stab"
        assert run_cli("project", ref, pref, "--target-dim", 16, "--seed", 9) == 0
        assert run_cli("project", query, pquery, "--target-dim", 16, "--seed", 9) == 0
        pb = read_bundle(pref)
        assert pb.dim == 16 and pb.projected and pb.projection_seed == 9
        out = tmp_path / "m.tsv"
        assert run_cli("match", pref, pquery, "--seq-len", 10, "--output", out) == 0

    def test_double_projection_rejected(self, synth_files, tmp_path, capsys):
        ref, _, _ = synth_files
        p1 = tmp_path / "p1.stab"
        assert run_cli("project", ref, p1, "--target-dim", 16) == 0
        rc = run_cli("project", p1, tmp_path / "p2.stab", "--target-dim", 8)
        assert rc == 2
        assert "already projected" in capsys.readouterr().err


class TestEvalCommand:
    def test_eval_writes_curve_and_predictions(self, synth_files, tmp_path, capsys):
        ref, query, truth = synth_files
        prefix = tmp_path / "run"
        rc = run_cli(
            "eval", ref, query, truth, "--seq-len", 10, "--mode", "adaptive",
            "--tolerance", 2, "--out-prefix", prefix,
        )
        assert rc == 0
        assert "best F1" in capsys.readouterr().out
        curve = (tmp_path / "run_pr_curve.tsv").read_text()
        assert "precision" in curve and curve.startswith("#")
        preds = (tmp_path / "run_predictions.tsv").read_text()
        body = [l for l in preds.splitlines() if not l.startswith(("#", "query"))]
        assert len(body) == 40

    def test_eval_single_image_mode(self, synth_files, tmp_path, capsys):
        ref, query, truth = synth_files
        rc = run_cli(
            "eval", ref, query, truth, "--temporal", "single",
            "--mode", "holistic-cosine", "--out-prefix", tmp_path / "si",
        )
        assert rc == 0
        assert "best F1" in capsys.readouterr().out


class TestBenchCommand:
    def test_tiny_bench_reports_cells(self, capsys):
        rc = run_cli(
            "bench", "--n-frames", 30, "--seq-len", 4, "--dim", 16,
            "--repetitions", 2, "--target-dim", 8, "--variants", "grp-ra",
        )
        assert rc == 0
        out = capsys.readouterr().out
        line = [l for l in out.splitlines() if l.startswith("30\tgrp-ra")][0]
        fields = line.split("\t")
        assert int(fields[4]) == 30 * 4 * 8  # n * l * k cell updates
