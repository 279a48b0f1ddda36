import json
import os

import pytest

from wdplab.cli import main
from wdplab.model import load_instance


def run(argv):
    return main(argv)


@pytest.fixture
def instance_dir(tmp_path):
    d = tmp_path / "instances"
    d.mkdir()
    # both seeds give instances with at least two winning bids, so the
    # label -> samples -> train chain has something to learn from
    for i, seed in enumerate((100, 102)):
        assert run([
            "gen", "synth", "--bids", "12", "--items", "4", "--umax", "6",
            "--seed", str(seed), "--out", str(d / f"inst{i}.json"),
        ]) == 0
    return d


class TestGen:
    def test_synth_writes_valid_instance(self, tmp_path):
        out = tmp_path / "x.json"
        assert run(["gen", "synth", "--bids", "8", "--items", "3",
                    "--umax", "4", "--seed", "1", "--out", str(out)]) == 0
        inst = load_instance(str(out))
        assert inst.num_bids == 8 and inst.num_items == 3

    def test_vm_writes_valid_instance(self, tmp_path):
        out = tmp_path / "vm.json"
        assert run(["gen", "vm", "--users", "20", "--vm-types", "6",
                    "--units-per-type", "30", "--dist", "0.2,0.3,0.5",
                    "--seed", "2", "--out", str(out)]) == 0
        inst = load_instance(str(out))
        assert inst.num_bids == 20
        assert all(it.units == 30 for it in inst.items)

    def test_gen_deterministic(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        args = ["gen", "synth", "--bids", "10", "--items", "3", "--umax", "3",
                "--seed", "9"]
        run(args + ["--out", str(a)])
        run(args + ["--out", str(b)])
        assert a.read_bytes() == b.read_bytes()


class TestSolve:
    def test_exact(self, instance_dir, tmp_path):
        src = sorted(instance_dir.iterdir())[0]
        out = tmp_path / "alloc.json"
        assert run(["solve", "exact", "--in", str(src), "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert set(doc) >= {"decisions", "revenue", "proven_optimal"}

    def test_heuristics(self, instance_dir, tmp_path):
        src = sorted(instance_dir.iterdir())[0]
        for method in ("rlp", "ss", "casanova", "greedy"):
            out = tmp_path / f"{method}.json"
            assert run(["solve", "heuristic", "--method", method,
                        "--in", str(src), "--seed", "3",
                        "--out", str(out)]) == 0
            assert "decisions" in json.loads(out.read_text())

    def test_gnn(self, instance_dir, tmp_path):
        from wdplab import gnn
        model_path = tmp_path / "model.json"
        gnn.save_model_file(gnn.init_model(4, seed=0), str(model_path))
        src = sorted(instance_dir.iterdir())[0]
        for mode in ("basic", "traversal"):
            out = tmp_path / f"gnn-{mode}.json"
            assert run(["solve", "gnn", "--model", str(model_path),
                        "--in", str(src), "--mode", mode,
                        "--out", str(out)]) == 0
            doc = json.loads(out.read_text())
            assert doc["gnn_calls"] >= 1


class TestWorkflow:
    def test_label_samples_train(self, instance_dir, tmp_path):
        labels = tmp_path / "labels"
        assert run(["label", "--instances", str(instance_dir),
                    "--out", str(labels), "--time-limit", "10"]) == 0
        assert len(list(labels.iterdir())) == 2

        dataset = tmp_path / "train.jsonl"
        assert run(["samples", "--labels", str(labels), "--mode",
                    "optimum-only", "--pk", "1.0", "--seed", "4",
                    "--out", str(dataset)]) == 0
        assert dataset.exists()

        model_out = tmp_path / "model.json"
        assert run(["train", "--samples", str(dataset), "--q", "4",
                    "--epochs", "2", "--seed", "5",
                    "--out", str(model_out)]) == 0
        from wdplab import gnn
        assert gnn.load_model_file(str(model_out)).q == 4

    def test_bench_and_report(self, instance_dir, tmp_path, capsys):
        csv_path = tmp_path / "report.csv"
        assert run(["bench", "--instances", str(instance_dir),
                    "--methods", "exact,greedy,ss", "--seed", "6",
                    "--zero-time", "--out", str(csv_path)]) == 0
        lines = csv_path.read_text().strip().splitlines()
        assert len(lines) == 1 + 2 * 3
        assert run(["report", "--in", str(csv_path)]) == 0
        shown = capsys.readouterr().out
        assert "greedy" in shown and "mean gap" in shown

    def test_bench_determinism_via_env_seed(self, instance_dir, tmp_path,
                                            monkeypatch):
        monkeypatch.setenv("WDPLAB_SEED", "123")
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (a, b):
            assert run(["bench", "--instances", str(instance_dir),
                        "--methods", "rlp,casanova", "--seed", "1",
                        "--zero-time", "--out", str(out)]) == 0
        assert a.read_bytes() == b.read_bytes()
