import numpy as np
import pytest
import torch

from bundle_extractor.cli import main
from bundle_extractor.extract import extract, extract_folder, list_images
from bundle_extractor.models import CaptureModel, WeightsError, build_model

from placealign.bundle import read_bundle


class _StubModel(CaptureModel):
    def __init__(self, fmap, width):
        super().__init__(
            name="stub", features=torch.nn.Identity(), width=width,
            dim=fmap.shape[1] * fmap.shape[2] * (fmap.shape[3] // width), layer="stub",
        )
        self._fmap = fmap

    def _mid_layer(self, batch):
        return self._fmap


class TestSplitting:
    def test_flatten_order_matches_documentation(self):
        # (B, C, H, Wmap) with known values; width 2 -> groups of 2 columns
        c, h, wmap, width = 2, 3, 4, 2
        fmap = torch.arange(c * h * wmap, dtype=torch.float64).reshape(1, c, h, wmap)
        model = _StubModel(fmap, width)
        out = model.local_features(torch.zeros(1))[0].numpy()
        groups = wmap // width
        assert out.shape == (width, groups * h * c)
        for w in range(width):
            for g in range(groups):
                for hh in range(h):
                    for cc in range(c):
                        flat = g * h * c + hh * c + cc
                        assert out[w, flat] == fmap[0, cc, hh, w * groups + g].item()


class TestListImages:
    def test_sorted_order_and_suffix_filter(self, tmp_path):
        (tmp_path / "b.png").write_bytes(b"x")
        (tmp_path / "a.jpg").write_bytes(b"x")
        (tmp_path / "notes.txt").write_bytes(b"x")
        names = [p.name for p in list_images(tmp_path)]
        assert names == ["a.jpg", "b.png"]

    def test_missing_directory(self, tmp_path):
        with pytest.raises(NotADirectoryError):
            list_images(tmp_path / "nope")


class TestWeights:
    def test_missing_file_is_hard_error(self):
        with pytest.raises(WeightsError, match="not found"):
            build_model("vgg16-pool4", weights="/nonexistent/weights.pt")

    def test_mismatched_checkpoint_rejected(self, tmp_path):
        bogus = tmp_path / "bogus.pt"
        torch.save({"features.0.weight": torch.zeros(3, 3)}, bogus)
        with pytest.raises(WeightsError, match="does not match"):
            build_model("vgg16-pool4", weights=str(bogus))

    def test_checkpoint_round_trip(self, vgg_checkpoint):
        model = build_model("vgg16-pool4", weights=str(vgg_checkpoint))
        torch.manual_seed(7)
        import torchvision

        reference = torchvision.models.vgg16(weights=None).features[:24]
        for got, want in zip(model.features.parameters(), reference.parameters()):
            assert torch.equal(got, want)

    def test_random_seed_is_deterministic(self):
        a = build_model("vgg16-pool4", weights="random:3")
        b = build_model("vgg16-pool4", weights="random:3")
        for pa, pb in zip(a.features.parameters(), b.features.parameters()):
            assert torch.equal(pa, pb)

    def test_unknown_model_rejected(self):
        with pytest.raises(ValueError, match="unknown model"):
            build_model("resnet50", weights="random:0")


class TestExtraction:
    def test_vgg_bundle_shapes_and_nonnegativity(self, image_dir, tmp_path, vgg_checkpoint):
        out = tmp_path / "vgg.stab"
        meta = extract(
            "vgg16-pool4", image_dir, out, weights=str(vgg_checkpoint), batch_size=6
        )
        bundle = read_bundle(out)
        assert (bundle.n, bundle.width, bundle.dim) == (24, 7, 14336)
        assert (bundle.frames >= 0).all()
        assert not bundle.projected
        assert meta["images"][0] == "frame_0000.png"
        assert (tmp_path / "vgg.stab.meta.json").exists()

    def test_duplicate_images_give_identical_frames(self, image_dir, tmp_path, vgg_checkpoint):
        import shutil

        folder = tmp_path / "dup"
        folder.mkdir()
        src = sorted(image_dir.iterdir())[0]
        shutil.copy(src, folder / "a_frame.png")
        shutil.copy(src, folder / "b_frame.png")
        out = tmp_path / "dup.stab"
        model = build_model("vgg16-pool4", weights=str(vgg_checkpoint))
        extract_folder(model, folder, out, batch_size=1)
        bundle = read_bundle(out)
        assert np.array_equal(bundle.frames[0], bundle.frames[1])

    def test_unreadable_image_skipped_and_recorded(self, image_dir, tmp_path, vgg_checkpoint):
        import json
        import shutil

        folder = tmp_path / "broken"
        folder.mkdir()
        good = sorted(image_dir.iterdir())[:3]
        for p in good:
            shutil.copy(p, folder / p.name)
        (folder / "frame_0001_corrupt.png").write_bytes(b"not an image")
        out = tmp_path / "broken.stab"
        model = build_model("vgg16-pool4", weights=str(vgg_checkpoint))
        meta = extract_folder(model, folder, out, batch_size=2)
        assert read_bundle(out).n == 3
        assert len(meta["skipped"]) == 1
        assert "corrupt" in meta["skipped"][0]["path"]
        sidecar = json.loads((tmp_path / "broken.stab.meta.json").read_text())
        assert sidecar["skipped"] == meta["skipped"]

    def test_cli_missing_weights_exit_code(self, image_dir, tmp_path, capsys):
        rc = main(
            [
                "--model", "vgg16-pool4", "--input-dir", str(image_dir),
                "--output", str(tmp_path / "x.stab"), "--weights", "/none.pt",
            ]
        )
        assert rc == 2
        assert "not found" in capsys.readouterr().err
