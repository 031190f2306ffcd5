from __future__ import annotations

import csv
import io

import pytest

from press.cli import main
from press.trajectory import load_trajectories, save_trajectories


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    net, corp, model = d / "net.txt", d / "corpus.txt", d / "model.bin"
    assert main(["gen", "--seed", "2", "--rows", "5", "--cols", "5", "--count", "25",
                 "--network", str(net), "--out", str(corp)]) == 0
    assert main(["train", str(corp), "--network", str(net), "--out", str(model)]) == 0
    return d


def _args(d, *rest):
    return [*rest, "--network", str(d / "net.txt"), "--model", str(d / "model.bin")]


def _tables(text):
    out, name, buf = {}, None, []
    for line in text.splitlines() + [""]:
        if line.startswith("# table: "):
            name = line[9:]
            buf = []
        elif line.strip():
            buf.append(line)
        elif name:
            out[name] = list(csv.DictReader(io.StringIO("\n".join(buf))))
            name = None
    return out


def test_train_writes_cache_and_is_deterministic(workdir):
    assert (workdir / "model.bin.spx").exists()
    again = workdir / "again.bin"
    assert main(["train", str(workdir / "corpus.txt"), "--network", str(workdir / "net.txt"), "--out", str(again)]) == 0
    assert again.read_bytes() == (workdir / "model.bin").read_bytes()


def test_compress_decompress_round_trip(workdir, capsys):
    out = workdir / "c0.bin"
    assert main(_args(workdir, "compress", str(workdir / "corpus.txt"), "--out", str(out))) == 0
    stats = dict(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert float(stats["beta"]) > 1  # stops are removed even at zero bounds
    back = workdir / "back.txt"
    assert main(_args(workdir, "decompress", str(out), "--out", str(back))) == 0
    orig = load_trajectories(workdir / "corpus.txt")
    got = load_trajectories(back)
    assert [t.path for t in got] == [t.path for t in orig]
    assert [t.id for t in got] == [t.id for t in orig]


def test_empty_corpus_reports_na(workdir, capsys):
    empty = workdir / "empty.txt"
    save_trajectories([], empty)
    assert main(_args(workdir, "compress", str(empty), "--out", str(workdir / "e.bin"))) == 0
    stats = dict(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert stats["alpha"] == stats["beta"] == "N/A"


def test_query_batch_with_reference(workdir, capsys):
    comp = workdir / "c0.bin"
    if not comp.exists():
        main(_args(workdir, "compress", str(workdir / "corpus.txt"), "--out", str(comp)))
    trs = load_trajectories(workdir / "corpus.txt")
    lines = []
    for tr in trs[:10]:
        t0, t1 = tr.span
        lines.append(f"WHEREAT {tr.id} {t0}")
        lines.append(f"WHEREAT {tr.id} {(t0 + t1) / 2}")
        lines.append(f"RANGE {tr.id} {t0} {t1} -1e9 -1e9 1e9 1e9")
    q = workdir / "q.txt"
    q.write_text("\n".join(lines) + "\n")
    res = workdir / "r.txt"
    assert main(_args(workdir, "query", str(comp), str(q), "--reference", "--out", str(res))) == 0
    rows = res.read_text().splitlines()
    assert len(rows) == len(lines)
    assert all(r.endswith("agree=1") for r in rows)
    assert rows[0].startswith(lines[0] + "\tedge=")
    assert all(r.split("\t")[1] == "true" for r in rows[2::3])


def test_stats_tables(workdir, capsys):
    args = _args(workdir, "stats", str(workdir / "c0.bin"), "--corpus", str(workdir / "corpus.txt"),
                 "--thetas", "1,2,3", "--tsnd-grid", "0,100", "--nstd-grid", "0,100")
    assert main(args) == 0
    tables = _tables(capsys.readouterr().out)
    assert set(tables) >= {"model", "compressed_file", "compression", "theta_sweep", "bounds_sweep", "greedy_vs_dp"}
    assert [r["theta"] for r in tables["theta_sweep"]] == ["1", "2", "3"]
    assert len(tables["bounds_sweep"]) == 4
    gap = float(tables["greedy_vs_dp"][0]["gap"])
    assert gap >= 0


def test_usage_errors_exit_1(workdir, capsys):
    assert pytest.raises(SystemExit, main, []).value.code == 1
    assert pytest.raises(SystemExit, main, ["compress"]).value.code == 1
    assert pytest.raises(SystemExit, main, ["stats", "--network", "x", "--model", "y", "--thetas", "a"]).value.code == 1


def test_data_errors_exit_2(workdir, tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("T x 1 1\n99999\n0 0\n")
    assert main(_args(workdir, "compress", str(bad), "--out", str(tmp_path / "o.bin"))) == 2
    assert main(_args(workdir, "compress", str(tmp_path / "missing.txt"), "--out", str(tmp_path / "o.bin"))) == 2
    q = tmp_path / "q.txt"
    q.write_text("WHEREAT nobody 1\n")
    assert main(_args(workdir, "query", str(workdir / "c0.bin"), str(q))) == 2
    q.write_text("FLY t00000 1\n")
    assert main(_args(workdir, "query", str(workdir / "c0.bin"), str(q))) == 2
    empty = tmp_path / "empty.txt"
    empty.write_text("")
    assert main(["train", str(empty), "--network", str(workdir / "net.txt"), "--out", str(tmp_path / "m")]) == 2


def test_mismatches_exit_3(workdir, tmp_path):
    other_net, other_corp, other_model = tmp_path / "n.txt", tmp_path / "c.txt", tmp_path / "m.bin"
    main(["gen", "--seed", "9", "--rows", "4", "--cols", "4", "--count", "5",
          "--network", str(other_net), "--out", str(other_corp)])
    main(["train", str(other_corp), "--network", str(other_net), "--out", str(other_model)])
    # model trained on another network
    assert main(["decompress", str(workdir / "c0.bin"), "--network", str(other_net),
                 "--model", str(workdir / "model.bin"), "--out", str(tmp_path / "x")]) == 3
    # compressed file written with another model
    assert main(["decompress", str(workdir / "c0.bin"), "--network", str(other_net),
                 "--model", str(other_model), "--out", str(tmp_path / "x")]) == 3
