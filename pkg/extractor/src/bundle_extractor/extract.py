"""Folder-to-bundle extraction pipeline."""

from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np
import torch
from PIL import Image
from torchvision import transforms

from .bundlefmt import FORMAT_VERSION, write_bundle
from .models import (
    IMAGE_SIZE,
    NORMALIZE_MEAN,
    NORMALIZE_STD,
    CaptureModel,
    build_model,
)

log = logging.getLogger(__name__)

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp", ".ppm", ".tif", ".tiff", ".webp")

_PREPROCESS = transforms.Compose(
    [
        transforms.Resize(256),
        transforms.CenterCrop(IMAGE_SIZE),
        transforms.ToTensor(),
        transforms.Normalize(mean=NORMALIZE_MEAN, std=NORMALIZE_STD),
    ]
)


def list_images(input_dir) -> list:
    """Image files in the folder, in lexicographic (temporal) order."""
    root = Path(input_dir)
    if not root.is_dir():
        raise NotADirectoryError(f"input directory not found: {root}")
    return sorted(
        p for p in root.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES
    )


def _load_batch(paths, skipped):
    tensors, kept = [], []
    for index, path in paths:
        try:
            with Image.open(path) as img:
                tensors.append(_PREPROCESS(img.convert("RGB")))
            kept.append(path)
        except Exception as exc:  # unreadable image: skip, record index
            log.warning("skipping unreadable image #%d %s: %s", index, path, exc)
            skipped.append({"index": index, "path": str(path), "error": str(exc)})
    if not tensors:
        return None, kept
    return torch.stack(tensors), kept


def extract_folder(
    model: CaptureModel,
    input_dir,
    output_path,
    batch_size: int = 8,
    device: str = "cpu",
) -> dict:
    """Extract every image in the folder into one feature bundle.

    Frames appear in listing order; unreadable images are skipped with a
    warning and recorded in the metadata sidecar written next to the
    bundle. Returns the metadata dict.
    """
    paths = list_images(input_dir)
    if not paths:
        raise ValueError(f"no images found under {input_dir}")
    skipped = []
    frames = []
    order = []
    for lo in range(0, len(paths), batch_size):
        chunk = [(lo + i, p) for i, p in enumerate(paths[lo : lo + batch_size])]
        batch, kept = _load_batch(chunk, skipped)
        if batch is None:
            continue
        local = model.local_features(batch.to(device))
        frames.append(local.cpu().numpy().astype(np.float32))
        order.extend(str(p.name) for p in kept)
    if not frames:
        raise ValueError(f"no readable images under {input_dir}")
    stacked = np.concatenate(frames)
    write_bundle(output_path, stacked)

    meta = {
        "model": model.name,
        "layer": model.layer,
        "width": model.width,
        "dim": model.dim,
        "frames": len(stacked),
        "format_version": FORMAT_VERSION,
        "images": order,
        "skipped": skipped,
        "preprocess": {
            "resize": 256,
            "center_crop": IMAGE_SIZE,
            "normalize_mean": list(NORMALIZE_MEAN),
            "normalize_std": list(NORMALIZE_STD),
        },
        "flatten_order": "position, then column-within-group, then height, then channel",
    }
    sidecar = Path(str(output_path) + ".meta.json")
    sidecar.write_text(json.dumps(meta, indent=2) + "\n")
    return meta


def extract(
    model_name: str,
    input_dir,
    output_path,
    weights: str,
    batch_size: int = 8,
    device: str = "cpu",
) -> dict:
    """Build the model and run the folder extraction."""
    model = build_model(model_name, weights, device)
    return extract_folder(model, input_dir, output_path, batch_size, device)
