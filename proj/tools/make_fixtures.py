#!/usr/bin/env python3
"""Regenerates the grayscale PNG fixtures under tests/data from scikit-image's bundled samples."""
import pathlib

import numpy as np
import skimage.data as data
from skimage.color import rgb2gray
from skimage.io import imsave
from skimage.transform import resize

OUT = pathlib.Path(__file__).resolve().parent.parent / "tests" / "data"

# (sample name, downscaled side, crop row, crop col)
CROPS = [
    ("camera", 96, 20, 30),
    ("astronaut", 96, 10, 32),
    ("coins", 96, 30, 40),
    ("moon", 96, 40, 40),
    ("brick", 128, 48, 48),
    ("grass", 128, 48, 48),
    ("gravel", 128, 48, 48),
    ("rocket", 96, 40, 20),
    ("coffee", 96, 40, 40),
    ("chelsea", 96, 30, 30),
    ("clock", 96, 40, 40),
    ("cell", 128, 48, 48),
]


def gray(name):
    img = getattr(data, name)()
    if img.ndim == 3:
        img = rgb2gray(img[..., :3])
    else:
        img = img.astype(np.float64) / 255.0
    return img


def to_u8(img):
    return np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)


def main():
    nat = OUT / "natural32"
    nat.mkdir(parents=True, exist_ok=True)
    for i, (name, side, r, c) in enumerate(CROPS):
        img = resize(gray(name), (side, side), anti_aliasing=True)
        imsave(nat / f"{i:02d}_{name}.png", to_u8(img[r:r + 32, c:c + 32]), check_contrast=False)
    cam = resize(gray("camera"), (256, 256), anti_aliasing=True)
    imsave(OUT / "camera256.png", to_u8(cam), check_contrast=False)
    ramp16 = (np.arange(16, dtype=np.uint16) * 4369).reshape(4, 4)
    imsave(OUT / "ramp16.png", ramp16, check_contrast=False)
    rgb = np.zeros((4, 4, 3), dtype=np.uint8)
    rgb[..., 0] = 200
    imsave(OUT / "rgb4.png", rgb, check_contrast=False)


if __name__ == "__main__":
    main()
