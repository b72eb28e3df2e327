"""Volumes, the VGRID file format, and thresholding.

A GrayVolume is a dense float32 grid (x slowest); a BinaryVolume is the
same thing with bits. Files round-trip through .vgrid: a one-line JSON
header after a magic string, then the raw little-endian payload.
"""
import pathlib
import tempfile

import numpy as np

from voxect import BinaryVolume, GrayVolume, binarize, load_volume, otsu_threshold, save_volume

rng = np.random.default_rng(1)

# a blurry two-level "segmentation output": bright blob on dark ground
blob = np.zeros((16, 16, 16), dtype=np.float32)
blob[4:12, 4:12, 4:12] = 0.85
blob += rng.normal(0.0, 0.05, blob.shape).astype(np.float32)
blob = np.clip(blob, 0.0, 1.0)
volume = GrayVolume(blob)
print("gray volume:", volume.shape, volume.values.dtype)

tmp = pathlib.Path(tempfile.mkdtemp())
path = tmp / "blob.vgrid"
save_volume(volume, path)
print("file header:", path.read_bytes()[:80])

back = load_volume(path)
print("round trip exact:", back == volume)

# Otsu picks the cut between the two intensity populations
tau = otsu_threshold(volume)
mask = binarize(volume, tau)
print(f"otsu threshold {tau:.4f} keeps {mask.foreground_count} voxels")
print("expected block size:", 8 * 8 * 8)

# binary volumes save as u8 and load back as BinaryVolume
save_volume(mask, tmp / "mask.vgrid")
print("mask round trip:", type(load_volume(tmp / "mask.vgrid")).__name__)
