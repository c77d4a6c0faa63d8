#!/usr/bin/env python3
"""Fetch the classic grayscale benchmark photographs used in the literature.

The package itself ships no photographs (license provenance for the classic
test set is murky, and the recovery experiments run on the bundled synthetic
generators instead).  This script documents where the canonical files live
and, when run on a machine with network access, downloads them and converts
each to a 256 x 256 center-cropped 8-bit PGM next to this script.

Usage:
    python3 scripts/fetch_test_images.py [--dest DIR] [--list]

The canonical sources (USC-SIPI "miscellaneous" volume) are:
    barbara   http://sipi.usc.edu/database/  (also mirrored widely; the
              512x512 grayscale "barbara" raster predates the database)
    lena      USC-SIPI misc/4.2.04
    boat      USC-SIPI misc/boat.512
    peppers   USC-SIPI misc/4.2.07

If a download fails (offline sandbox, moved URL), the script reports the
failure and exits 3 without writing partial files.
"""

import argparse
import io
import sys
import urllib.request

SOURCES = {
    "barbara": "https://raw.githubusercontent.com/MKLab-ITI/image-datasets/master/barbara.png",
    "lena": "https://sipi.usc.edu/database/download.php?vol=misc&img=4.2.04",
    "boat": "https://sipi.usc.edu/database/download.php?vol=misc&img=boat.512",
    "peppers": "https://sipi.usc.edu/database/download.php?vol=misc&img=4.2.07",
}


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dest", default=None, help="output directory (default: alongside this script)")
    parser.add_argument("--list", action="store_true", help="print the source URLs and exit")
    args = parser.parse_args(argv)

    if args.list:
        for name, url in SOURCES.items():
            print(f"{name}: {url}")
        return 0

    try:
        import numpy as np

        from dirframes.imagegrid import center_crop, write_pgm
    except ImportError as exc:
        print(f"dirframes must be importable to convert downloads: {exc}", file=sys.stderr)
        return 2

    try:
        from PIL import Image  # pillow is only needed for the PNG/TIFF sources
    except ImportError:
        print("pillow is required to decode the downloaded images (pip install pillow)", file=sys.stderr)
        return 2

    import os

    dest = args.dest or os.path.dirname(os.path.abspath(__file__))
    failures = []
    for name, url in SOURCES.items():
        out = os.path.join(dest, f"{name}_256.pgm")
        try:
            with urllib.request.urlopen(url, timeout=30) as resp:
                payload = resp.read()
            img = Image.open(io.BytesIO(payload)).convert("L")
            arr = np.asarray(img, dtype=np.float64) / 255.0
            arr = center_crop(arr, 8)
            h, w = arr.shape
            side = min(h, w, 256)
            top, left = (h - side) // 2, (w - side) // 2
            write_pgm(arr[top : top + side, left : left + side], out)
            print(f"wrote {out}")
        except Exception as exc:  # noqa: BLE001 - report and keep going
            failures.append((name, str(exc)))
            print(f"failed {name}: {exc}", file=sys.stderr)
    if failures:
        print(f"{len(failures)} of {len(SOURCES)} downloads failed", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
