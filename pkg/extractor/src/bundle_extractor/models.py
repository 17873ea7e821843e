"""Mid-layer capture models: network construction, weights, splitting.

Each supported model maps a batch of preprocessed images to (B, W, D)
local-feature stacks:

* ``densenet161-places-midlayer``: the first ReLU inside the tenth dense
  layer of the last dense block, a (1488, 7, 7) rectified map. Split
  along width into 7 columns; each column is flattened height-major then
  channel, giving D = 7 * 1488 = 10416.
* ``vgg16-pool4``: the fourth max-pool output, (512, 14, 14). The 14
  columns are split into 7 two-column groups, flattened column-major
  within the group, then height, then channel: D = 2 * 14 * 512 = 14336.

Weights come from a local state-dict file (full-model or features-only
keys), or from ``random:<seed>`` which initializes the architecture
deterministically from the seed (shape/smoke testing without network
access to pretrained checkpoints).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import torch
import torchvision

MODEL_NAMES = ("densenet161-places-midlayer", "vgg16-pool4")

IMAGE_SIZE = 224
NORMALIZE_MEAN = (0.485, 0.456, 0.406)
NORMALIZE_STD = (0.229, 0.224, 0.225)


class WeightsError(RuntimeError):
    """Weights are missing or do not fit the architecture."""


@dataclass
class CaptureModel:
    name: str
    features: torch.nn.Module
    width: int
    dim: int
    layer: str

    @torch.no_grad()
    def local_features(self, batch: torch.Tensor) -> torch.Tensor:
        """Map a preprocessed image batch to (B, W, D) local features."""
        fmap = self._mid_layer(batch)  # (B, C, H, width * groups)
        b, c, h, wmap = fmap.shape
        groups = wmap // self.width
        # (B, C, H, W*g) -> (B, W, g, H, C) -> (B, W, g*H*C)
        stacked = fmap.reshape(b, c, h, self.width, groups).permute(0, 3, 4, 2, 1)
        return stacked.reshape(b, self.width, groups * h * c)

    def _mid_layer(self, batch: torch.Tensor) -> torch.Tensor:
        raise NotImplementedError


class _DenseNetMid(CaptureModel):
    def _mid_layer(self, batch):
        captured = []
        hook = self.features.denseblock4.denselayer10.relu1.register_forward_hook(
            lambda module, args, out: captured.append(out)
        )
        try:
            self.features(batch)
        finally:
            hook.remove()
        return captured[0]


class _VggPool4(CaptureModel):
    def _mid_layer(self, batch):
        return self.features(batch)


def _load_state(module: torch.nn.Module, weights_path: Path) -> None:
    """Load a features-only or full-model state dict file, strictly."""
    if not weights_path.is_file():
        raise WeightsError(
            f"weights file not found: {weights_path} "
            "(pass a local state-dict file or random:<seed>)"
        )
    state = torch.load(weights_path, map_location="cpu", weights_only=True)
    if any(key.startswith("features.") for key in state):
        state = {
            key[len("features.") :]: value
            for key, value in state.items()
            if key.startswith("features.")
        }
    try:
        module.load_state_dict(state, strict=True)
    except RuntimeError as exc:
        raise WeightsError(
            f"{weights_path}: state dict does not match the model: {exc}"
        ) from exc


def build_model(name: str, weights: str, device: str = "cpu") -> CaptureModel:
    """Construct a capture model with the given weights source."""
    if name not in MODEL_NAMES:
        raise ValueError(f"unknown model {name!r}, expected one of {MODEL_NAMES}")

    if weights.startswith("random:"):
        torch.manual_seed(int(weights.split(":", 1)[1]))
        weights_path = None
    else:
        weights_path = Path(weights)

    if name == "densenet161-places-midlayer":
        net = torchvision.models.densenet161(weights=None)
        if weights_path is not None:
            _load_state(net.features, weights_path)
        model = _DenseNetMid(
            name=name,
            features=net.features,
            width=7,
            dim=10416,
            layer="features.denseblock4.denselayer10.relu1",
        )
    else:
        net = torchvision.models.vgg16(weights=None)
        if weights_path is not None:
            # the checkpoint covers the whole feature stack; we use its prefix
            _load_state(net.features, weights_path)
        model = _VggPool4(
            name=name,
            features=net.features[:24],
            width=7,
            dim=14336,
            layer="features.23 (pool4)",
        )

    model.features.eval()
    model.features.to(device)
    return model
