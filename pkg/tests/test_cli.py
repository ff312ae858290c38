"""End-to-end CLI behavior: subcommands, exit codes, determinism."""

import numpy as np
import pytest

from orthoreg import ScheduleConfig, RegKind
from orthoreg.cli import main
from orthoreg.matio import save_csv, save_matf
from orthoreg.schedule import lambda_at, weight_decay_at

RUN_CFG = """\
[model]
layers = dense:8:6, relu, dense:6:3, softmax_xent
init = gaussian:0.5

[train]
reg = srip
epochs = 3
batch_size = 16
seed = 3

[data]
source = blobs
seed = 1
n_per_class = 20
classes = 3
dims = 8
spread = 1.0
val_fraction = 0.25
split_seed = 1
"""


class TestGradcheck:
    def test_pass(self, tmp_path):
        out = tmp_path / "report.csv"
        code = main(["gradcheck", "--reg", "so", "--shape", "6x4",
                     "--seeds", "5", "--tol", "1e-4", "--out", str(out)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "seed,kind,shape,max_rel_err,skipped"
        assert len(lines) == 6

    def test_none_trivial(self, capsys):
        assert main(["gradcheck", "--reg", "none", "--shape", "3x3",
                     "--seeds", "2", "--tol", "1e-4"]) == 0

    def test_invalid_shape_names_flag(self, capsys):
        code = main(["gradcheck", "--reg", "so", "--shape", "0x4",
                     "--seeds", "2", "--tol", "1e-4"])
        assert code == 2
        assert "shape" in capsys.readouterr().err

    def test_unknown_reg(self, capsys):
        assert main(["gradcheck", "--reg", "l1", "--shape", "4x4",
                     "--seeds", "1", "--tol", "1e-4"]) == 2


class TestAnalyze:
    def test_identity_matf(self, tmp_path, capsys):
        path = tmp_path / "eye.matf"
        save_matf(path, np.eye(4))
        assert main(["analyze", str(path), "--ks", "2,4"]) == 0
        out = capsys.readouterr().out
        assert "mutual_coherence,0.0" in out
        assert "rip_delta_k4,0.0" in out

    def test_duplicated_column_csv(self, tmp_path, capsys):
        path = tmp_path / "dup.csv"
        save_csv(path, np.array([[3.0, 3.0], [4.0, 4.0]]))
        assert main(["analyze", str(path)]) == 0
        assert "mutual_coherence,1.0" in capsys.readouterr().out

    def test_text_format(self, tmp_path, capsys):
        path = tmp_path / "eye.matf"
        save_matf(path, np.eye(3))
        assert main(["analyze", str(path), "--format", "text"]) == 0
        assert "mutual_coherence: 0.0" in capsys.readouterr().out

    def test_k_too_large(self, tmp_path, capsys):
        path = tmp_path / "m.matf"
        save_matf(path, np.eye(8))
        assert main(["analyze", str(path), "--ks", "20"]) == 2
        assert "k=20" in capsys.readouterr().err

    def test_missing_file(self, capsys):
        assert main(["analyze", "no_such.matf"]) == 1

    def test_malformed_file(self, tmp_path):
        path = tmp_path / "junk.csv"
        path.write_text("1,2\n3,banana\n")
        assert main(["analyze", str(path)]) == 1

    def test_budget_exceeded_partial(self, tmp_path, capsys):
        # 190 columns give C(190, <=3) > 1e6, tripping the subset budget
        rng = np.random.default_rng(0)
        path = tmp_path / "wide.csv"
        save_csv(path, rng.standard_normal((4, 190)))
        out = tmp_path / "rep.csv"
        code = main(["analyze", str(path), "--ks", "3", "--out", str(out)])
        assert code == 3
        assert "partial,1.0" in out.read_text()

    def test_deterministic_reports(self, tmp_path):
        path = tmp_path / "w.matf"
        save_matf(path, np.random.default_rng(3).standard_normal((6, 4)))
        out1, out2 = tmp_path / "r1.csv", tmp_path / "r2.csv"
        assert main(["analyze", str(path), "--ks", "2,3",
                     "--out", str(out1)]) == 0
        assert main(["analyze", str(path), "--ks", "2,3",
                     "--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()


class TestTrain:
    def test_run_outputs(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(RUN_CFG)
        outdir = tmp_path / "out"
        assert main(["train", str(cfg), "--outdir", str(outdir)]) == 0
        assert (outdir / "record.csv").exists()
        assert (outdir / "timings.csv").exists()
        assert (outdir / "manifest.txt").exists()
        assert (outdir / "layer_00.matf").exists()
        assert (outdir / "layer_01.matf").exists()
        manifest = (outdir / "manifest.txt").read_text()
        assert "config_sha256:" in manifest
        assert "prng: numpy-pcg64" in manifest

    def test_rerun_byte_identical(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(RUN_CFG)
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["train", str(cfg), "--outdir", str(a)]) == 0
        assert main(["train", str(cfg), "--outdir", str(b)]) == 0
        assert (a / "record.csv").read_bytes() == (b / "record.csv").read_bytes()
        assert (a / "layer_00.matf").read_bytes() == \
            (b / "layer_00.matf").read_bytes()

    def test_missing_config(self, tmp_path, capsys):
        missing = tmp_path / "absent.cfg"
        assert main(["train", str(missing)]) == 1
        assert str(missing) in capsys.readouterr().err

    def test_threads_flag_keeps_records_identical(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(RUN_CFG)
        a, b = tmp_path / "t1", tmp_path / "t2"
        assert main(["train", str(cfg), "--outdir", str(a)]) == 0
        assert main(["train", str(cfg), "--outdir", str(b),
                     "--threads", "2"]) == 0
        assert (a / "record.csv").read_bytes() == (b / "record.csv").read_bytes()

    def test_threads_flag_validation(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(RUN_CFG)
        assert main(["train", str(cfg), "--threads", "0"]) == 2

    def test_unknown_key_named(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text(RUN_CFG.replace("seed = 3", "seed = 3\nwarmup = 5"))
        assert main(["train", str(cfg)]) == 2
        assert "warmup" in capsys.readouterr().err

    def test_non_finite_loss_preserves_partial_record(self, tmp_path, capsys):
        cfg = tmp_path / "explode.cfg"
        cfg.write_text(RUN_CFG.replace("[data]", "lr = 0:1e12\n\n[data]")
                       .replace("epochs = 3", "epochs = 30"))
        outdir = tmp_path / "boom"
        assert main(["train", str(cfg), "--outdir", str(outdir)]) == 1
        assert "partial record" in capsys.readouterr().err
        assert (outdir / "record.csv").exists()


class TestScheduleDump:
    def test_default_plan(self, capsys):
        assert main(["schedule-dump", "--epochs", "200", "--reg", "so"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "epoch,lambda,weight_decay"
        rows = [ln.split(",") for ln in lines[1:]]
        assert len(rows) == 200
        cfg = ScheduleConfig()
        for epoch_s, lam_s, wd_s in rows:
            e = int(epoch_s)
            assert float(lam_s) == lambda_at(cfg, e)
            assert float(wd_s) == weight_decay_at(cfg, RegKind.SO, e)
        assert rows[20][1] == "0.001"
        assert rows[150][1] == "0.0"
        assert all(r[1] == "0.1" for r in rows[:20])

    def test_config_file_plan(self, tmp_path, capsys):
        cfg = tmp_path / "s.cfg"
        cfg.write_text("[train]\nreg = dso\n[schedule]\nlambda_init = 0.2\n"
                       "lambda_breakpoints = 10:0.01\n")
        assert main(["schedule-dump", str(cfg), "--epochs", "15"]) == 0
        lines = capsys.readouterr().out.splitlines()[1:]
        assert lines[0].split(",")[1] == "0.2"
        assert lines[12].split(",")[1] == "0.01"

    def test_bad_epochs(self, capsys):
        assert main(["schedule-dump", "--epochs", "0"]) == 2


class TestUsage:
    def test_no_command_exits_2(self):
        with pytest.raises(SystemExit) as info:
            main([])
        assert info.value.code == 2

    def test_version(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["--version"])
        assert info.value.code == 0
