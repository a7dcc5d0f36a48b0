import json

import numpy as np
import pytest

from texweave.cli import RunConfig, main
from texweave.imaging import load_grayscale


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def sample(tmp_path_factory):
    d = tmp_path_factory.mktemp("synth")
    assert run("synth", "--kind", "dots", "--periods", 6, 6, "--defect", "hole", "--seed", 2,
               "--name", "s", "--out", d) == 0
    return d


class TestSynth:
    def test_clean_checker(self, tmp_path):
        assert run("synth", "--out", tmp_path, "--name", "c") == 0
        img = load_grayscale(tmp_path / "c.png")
        assert img.shape == (200, 200)
        assert not load_grayscale(tmp_path / "c.gt.png").any()

    def test_deterministic(self, tmp_path):
        for name in ("a", "b"):
            run("synth", "--defect", "bar", "--seed", 9, "--name", name, "--out", tmp_path)
        for suffix in (".png", ".gt.png"):
            assert (tmp_path / f"a{suffix}").read_bytes() == (tmp_path / f"b{suffix}").read_bytes()

    def test_bar_gt_marks_changed_pixels(self, tmp_path):
        run("synth", "--defect", "bar", "--noise", 0, "--seed", 5, "--name", "d", "--out", tmp_path)
        run("synth", "--defect", "none", "--noise", 0, "--seed", 5, "--name", "n", "--out", tmp_path)
        changed = load_grayscale(tmp_path / "d.png") != load_grayscale(tmp_path / "n.png")
        gt = load_grayscale(tmp_path / "d.gt.png") > 0.5
        assert np.all(gt[changed]) and gt.any()

    @pytest.mark.parametrize("argv", [["--kind", "plaid"], ["--periods", "1", "8"], ["--defect", "stain"]])
    def test_usage_errors(self, argv, capsys):
        with pytest.raises(SystemExit) as exc:
            run("synth", *argv)
        assert exc.value.code == 2


class TestInspect:
    def test_writes_three_files(self, sample, tmp_path, capsys):
        rc = run("inspect", "--input", sample / "s.png", "--period-rows", 25, "--period-cols", 25,
                 "--gt", sample / "s.gt.png", "--out", tmp_path)
        assert rc == 0
        assert sorted(p.name for p in tmp_path.iterdir()) == ["s.mask.png", "s.overlay.png", "s.report.json"]
        doc = json.loads((tmp_path / "s.report.json").read_text())
        assert doc["evaluation"]["metrics"]["precision"] == 1.0
        assert "precision 1.000" in capsys.readouterr().out

    def test_missing_period(self, sample, capsys):
        with pytest.raises(SystemExit) as exc:
            run("inspect", "--input", sample / "s.png", "--period-cols", 25)
        assert exc.value.code == 2

    @pytest.mark.parametrize("flags", [["--padding", "edge"], ["--jobs", "0"], ["--min-overlap", "2"],
                                       ["--scales", "0"], ["--period-rows", "1"],
                                       ["--canny-high", "0"], ["--canny-sigma", "-1"]])
    def test_bad_flags(self, sample, flags, capsys):
        argv = ["inspect", "--input", sample / "s.png", "--period-rows", 25, "--period-cols", 25, *flags]
        with pytest.raises(SystemExit) as exc:
            run(*argv)
        assert exc.value.code == 2

    def test_single_kernel_bank(self, sample, tmp_path):
        assert run("inspect", "--input", sample / "s.png", "--period-rows", 25, "--period-cols", 25,
                   "--scales", 1, "--orientations", 1, "--out", tmp_path) == 0
        doc = json.loads((tmp_path / "s.report.json").read_text())
        assert (doc["gabor"]["num_scales"], doc["gabor"]["num_orientations"]) == (1, 1)

    def test_canny_overrides(self, sample, tmp_path):
        run("inspect", "--input", sample / "s.png", "--period-rows", 25, "--period-cols", 25, "--out", tmp_path,
            "--canny-sigma", 1.5, "--canny-high", 0.3, "--canny-low", 0.5)
        opts = json.loads((tmp_path / "s.report.json").read_text())["options"]
        assert (opts["canny_sigma"], opts["canny_high"], opts["canny_low"]) == (1.5, 0.3, 0.5)

    def test_dumps(self, sample, tmp_path):
        run("inspect", "--input", sample / "s.png", "--period-rows", 25, "--period-cols", 25, "--out", tmp_path,
            "--dump-gabor-space", "--dump-features", "--dump-dendrogram")
        assert (tmp_path / "s.gabor.png").exists()
        feats = (tmp_path / "s.features.csv").read_text().splitlines()
        assert len(feats) == 1 + 4 * 36
        dend = (tmp_path / "s.dendrogram.csv").read_text().splitlines()
        assert len(dend) == 1 + 4 * 35

    def test_unreadable_input(self, tmp_path):
        (tmp_path / "bad.png").write_bytes(b"not an image")
        assert run("inspect", "--input", tmp_path / "bad.png", "--period-rows", 25, "--period-cols", 25,
                   "--out", tmp_path) == 1

    def test_jobs_bit_identical(self, sample, tmp_path):
        for jobs in (1, 4):
            run("inspect", "--input", sample / "s.png", "--period-rows", 25, "--period-cols", 25,
                "--jobs", jobs, "--out", tmp_path / str(jobs), "--dump-gabor-space")
        for name in ("s.mask.png", "s.overlay.png", "s.gabor.png"):
            assert (tmp_path / "1" / name).read_bytes() == (tmp_path / "4" / name).read_bytes()

    def test_gate_on_clean_texture(self, tmp_path):
        for seed in range(3):
            run("synth", "--seed", seed, "--name", f"c{seed}", "--out", tmp_path)
            run("inspect", "--input", tmp_path / f"c{seed}.png", "--period-rows", 25, "--period-cols", 25,
                "--min-separation", "1e5", "--out", tmp_path / "out")
            doc = json.loads((tmp_path / "out" / f"c{seed}.report.json").read_text())
            assert doc["defective_blocks"] == 0 and doc["mask_pixels"] == 0


class TestConfig:
    def test_defaults(self):
        import math

        cfg = RunConfig()
        assert (cfg.scales, cfg.orientations) == (5, 8)
        assert (cfg.sigma, cfg.kmax, cfg.spacing) == (2 * math.pi, math.pi / 2, math.sqrt(2))

    def test_round_trip(self):
        cfg = RunConfig(input=["a.png"], period_rows=25, period_cols=30, min_separation=1e5)
        assert RunConfig.from_json(cfg.to_json()) == cfg
        assert RunConfig.from_json(RunConfig().to_json()) == RunConfig()

    def test_unknown_key(self):
        with pytest.raises(ValueError):
            RunConfig.from_json('{"bogus": 1}')

    def test_saved_config_reproduces_run(self, sample, tmp_path):
        run("inspect", "--input", sample / "s.png", "--period-rows", 25, "--period-cols", 25,
            "--padding", "wrap", "--out", tmp_path / "a", "--save-config", tmp_path / "cfg.json")
        cfg = json.loads((tmp_path / "cfg.json").read_text())
        assert cfg["padding"] == "wrap"
        cfg["out"] = str(tmp_path / "b")
        (tmp_path / "cfg2.json").write_text(json.dumps(cfg))
        assert run("inspect", "--config", tmp_path / "cfg2.json") == 0
        for name in ("s.mask.png", "s.report.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_bad_config(self, tmp_path, capsys):
        (tmp_path / "c.json").write_text('{"nope": 3}')
        with pytest.raises(SystemExit) as exc:
            run("inspect", "--config", tmp_path / "c.json")
        assert exc.value.code == 2


class TestCorpus:
    @pytest.fixture()
    def manifest(self, tmp_path):
        lines = ["image,period_rows,period_cols,gt,group"]
        for i, (defect, group) in enumerate([("hole", "a"), ("none", "a"), ("blob", "b")]):
            run("synth", "--periods", 6, 6, "--defect", defect, "--seed", i, "--name", f"i{i}", "--out", tmp_path)
            lines.append(f"i{i}.png,25,25,i{i}.gt.png,{group}")
        path = tmp_path / "manifest.csv"
        path.write_text("\n".join(lines) + "\n")
        return path

    def test_three_rows(self, manifest, tmp_path):
        assert run("corpus", "--manifest", manifest, "--out", tmp_path / "o") == 0
        doc = json.loads((tmp_path / "o" / "corpus.report.json").read_text())
        assert len(doc["images"]) == 3 and set(doc["groups"]) == {"a", "b"}
        assert doc["overall"]["images"] == 3

    def test_group(self, manifest, tmp_path):
        assert run("corpus", "--manifest", manifest, "--group", "b", "--out", tmp_path / "o") == 0
        doc = json.loads((tmp_path / "o" / "corpus.report.json").read_text())
        assert [r["group"] for r in doc["images"]] == ["b"]

    def test_unreadable_row(self, manifest, tmp_path):
        with open(manifest, "a") as fh:
            fh.write("missing.png,25,25,,a\n")
        assert run("corpus", "--manifest", manifest, "--out", tmp_path / "o") == 1
        doc = json.loads((tmp_path / "o" / "corpus.report.json").read_text())
        assert doc["failed"] == 1 and doc["overall"]["images"] == 3

    def test_empty_manifest(self, tmp_path):
        (tmp_path / "m.csv").write_text("image,period_rows,period_cols,gt,group\n")
        assert run("corpus", "--manifest", tmp_path / "m.csv", "--out", tmp_path) == 1

    def test_missing_manifest_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            run("corpus")
        assert exc.value.code == 2
