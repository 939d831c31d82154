import json
import subprocess
import sys

import pytest

from videocycle.cli import main


def run_cli(*argv):
    return main(list(argv))


@pytest.fixture(scope="module")
def tiny_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli_corpus") / "data"
    code = run_cli(
        "synth", "--out", str(root), "--seed", "5",
        "--videos", "2", "--test-videos", "1", "--frames", "5", "--size", "20",
    )
    assert code == 0
    return root


def _train_config(tmp_path, **overrides):
    values = dict(
        image_size=16, load_size=20, width_multiplier=0.125, epochs=1,
        batch_size=1, stride_x=1, stride_y=1, seed=11, pool_capacity=10,
    )
    values.update(overrides)
    path = tmp_path / "train.cfg"
    path.write_text("".join(f"{k} = {v}\n" for k, v in values.items()))
    return path


class TestExitCodes:
    def test_missing_required_flag_is_usage_error(self, capsys):
        assert run_cli("synth", "--seed", "3") == 2
        err = capsys.readouterr().err
        assert "usage" in err and "--out" in err

    def test_unknown_subcommand(self):
        assert run_cli("frobnicate") == 2

    def test_unknown_config_key_named(self, tmp_path, capsys, tiny_corpus):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("image_size = 16\nload_sise = 20\n")
        code = run_cli(
            "train", "--config", str(cfg),
            "--data-x", str(tiny_corpus / "x"), "--data-y", str(tiny_corpus / "y"),
            "--out", str(tmp_path / "out"),
        )
        assert code == 2
        assert "load_sise" in capsys.readouterr().err

    def test_runtime_failure_is_exit_one(self, tmp_path, capsys):
        code = run_cli(
            "translate", "--checkpoint", str(tmp_path / "missing"),
            "--in", str(tmp_path), "--out", str(tmp_path / "out"),
        )
        assert code == 1
        assert "videocycle: error:" in capsys.readouterr().err

    def test_bad_choice_is_usage_error(self, tmp_path):
        code = run_cli(
            "translate", "--checkpoint", "x", "--in", "y", "--out", "z",
            "--direction", "diagonal",
        )
        assert code == 2

    def test_help_exits_zero(self):
        assert run_cli("--help") == 0


class TestSynthCommand:
    def test_deterministic_manifests(self, tmp_path):
        args = ["--seed", "7", "--videos", "1", "--test-videos", "1",
                "--frames", "3", "--size", "20"]
        assert run_cli("synth", "--out", str(tmp_path / "a"), *args) == 0
        assert run_cli("synth", "--out", str(tmp_path / "b"), *args) == 0
        ma = json.loads((tmp_path / "a" / "manifest.json").read_text())
        mb = json.loads((tmp_path / "b" / "manifest.json").read_text())
        assert ma == mb
        assert len(ma["files"]) == 2 * 2 * 3  # 2 domains x 2 videos x 3 frames

    def test_refuses_clobber_without_overwrite(self, tmp_path, capsys):
        args = ["--seed", "7", "--videos", "1", "--test-videos", "1",
                "--frames", "3", "--size", "20"]
        out = tmp_path / "corpus"
        assert run_cli("synth", "--out", str(out), *args) == 0
        assert run_cli("synth", "--out", str(out), *args) == 1
        assert "overwrite" in capsys.readouterr().err
        assert run_cli("synth", "--out", str(out), "--overwrite", *args) == 0

    def test_split_video_ids_are_disjoint(self, tiny_corpus):
        train_ids = {p.name for p in (tiny_corpus / "x" / "train").iterdir()}
        test_ids = {p.name for p in (tiny_corpus / "x" / "test").iterdir()}
        assert train_ids and test_ids
        assert not (train_ids & test_ids)

    def test_overwrite_is_idempotent(self, tmp_path):
        args = ["--seed", "9", "--videos", "1", "--test-videos", "1",
                "--frames", "3", "--size", "20"]
        out = tmp_path / "corpus"
        assert run_cli("synth", "--out", str(out), *args) == 0
        first = (out / "manifest.json").read_text()
        assert run_cli("synth", "--out", str(out), "--overwrite", *args) == 0
        assert (out / "manifest.json").read_text() == first


class TestPipeline:
    def test_synth_train_translate_eval(self, tiny_corpus, tmp_path, capsys):
        cfg = _train_config(tmp_path)
        run_dir = tmp_path / "run"
        assert run_cli(
            "train", "--config", str(cfg),
            "--data-x", str(tiny_corpus / "x"), "--data-y", str(tiny_corpus / "y"),
            "--out", str(run_dir),
        ) == 0
        ckpt = capsys.readouterr().out.strip().splitlines()[-1]
        assert (run_dir / "loss_log.csv").exists()

        base_dir = tmp_path / "run_base"
        assert run_cli(
            "train", "--config", str(cfg), "--baseline",
            "--data-x", str(tiny_corpus / "x"), "--data-y", str(tiny_corpus / "y"),
            "--out", str(base_dir),
        ) == 0
        base_ckpt = capsys.readouterr().out.strip().splitlines()[-1]

        out_frames = tmp_path / "translated"
        assert run_cli(
            "translate", "--checkpoint", ckpt,
            "--in", str(tiny_corpus / "x" / "test" / "video_002"),
            "--out", str(out_frames),
        ) == 0
        assert len(list(out_frames.glob("*.png"))) == 5

        report = tmp_path / "report.csv"
        assert run_cli(
            "eval", "--checkpoint", ckpt, "--baseline", base_ckpt,
            "--data", str(tiny_corpus / "x"), "--report", str(report),
        ) == 0
        text = report.read_text()
        assert text.startswith("video_id,")
        assert len(text.splitlines()) == 3  # header, one video, mean row
        out = capsys.readouterr().out
        assert "ratio:" in out

    def test_eval_single_model(self, tiny_corpus, tmp_path, capsys):
        cfg = _train_config(tmp_path, epochs=1)
        run_dir = tmp_path / "single_run"
        assert run_cli(
            "train", "--config", str(cfg),
            "--data-x", str(tiny_corpus / "x"), "--data-y", str(tiny_corpus / "y"),
            "--out", str(run_dir),
        ) == 0
        ckpt = capsys.readouterr().out.strip().splitlines()[-1]
        report = tmp_path / "single.csv"
        assert run_cli(
            "eval", "--checkpoint", ckpt,
            "--data", str(tiny_corpus / "x"), "--report", str(report),
        ) == 0
        assert report.read_text().startswith("video_id,flicker")

    def test_train_resume_from_checkpoint(self, tiny_corpus, tmp_path, capsys):
        cfg = _train_config(tmp_path, epochs=2, checkpoint_every=6)
        full_dir = tmp_path / "full"
        assert run_cli(
            "train", "--config", str(cfg),
            "--data-x", str(tiny_corpus / "x"), "--data-y", str(tiny_corpus / "y"),
            "--out", str(full_dir),
        ) == 0
        capsys.readouterr()
        mid = full_dir / "checkpoints" / ("step_%08d" % 6)
        assert mid.exists()
        resumed_dir = tmp_path / "resumed"
        assert run_cli(
            "train", "--config", str(cfg), "--resume", str(mid),
            "--data-x", str(tiny_corpus / "x"), "--data-y", str(tiny_corpus / "y"),
            "--out", str(resumed_dir),
        ) == 0
        full_rows = (full_dir / "loss_log.csv").read_text().splitlines()
        resumed_rows = (resumed_dir / "loss_log.csv").read_text().splitlines()
        assert resumed_rows[1:] == full_rows[7:]


class TestConsoleScript:
    def test_module_invocation(self):
        proc = subprocess.run(
            [sys.executable, "-m", "videocycle.cli", "--help"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert "synth" in proc.stdout and "translate" in proc.stdout
