"""CNN mid-layer feature extractor writing placealign feature bundles."""

from .bundlefmt import write_bundle
from .extract import extract, extract_folder, list_images
from .models import MODEL_NAMES, CaptureModel, WeightsError, build_model

__version__ = "0.1.0"
