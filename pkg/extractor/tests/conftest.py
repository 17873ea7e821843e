import numpy as np
import pytest
import torch
import torchvision
from PIL import Image

N_IMAGES = 24


@pytest.fixture(scope="session")
def image_dir(tmp_path_factory):
    """Deterministic folder of ordered noise images."""
    root = tmp_path_factory.mktemp("frames")
    for i in range(N_IMAGES):
        rng = np.random.default_rng(1000 + i)
        arr = rng.integers(0, 256, size=(240, 320, 3), dtype=np.uint8)
        Image.fromarray(arr).save(root / f"frame_{i:04d}.png")
    return root


@pytest.fixture(scope="session")
def vgg_checkpoint(tmp_path_factory):
    """Seeded features-only VGG16 state dict saved to disk."""
    torch.manual_seed(7)
    net = torchvision.models.vgg16(weights=None)
    path = tmp_path_factory.mktemp("weights") / "vgg16_features.pt"
    torch.save(net.features.state_dict(), path)
    return path
