#!/usr/bin/env python3
# Copyright 2026 The FedDCL Authors.
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Writes the 5000-image MNIST sample shipped with mlxtend as IDX files.

The sample lives in mlxtend/data/data/mnist_5k.csv.gz (784 pixel columns
0-255, label last). Sources tried in order: --wheel, an installed mlxtend,
`pip download mlxtend`.
"""

import argparse
import gzip
import io
import pathlib
import struct
import subprocess
import sys
import tempfile
import zipfile

MEMBER = "mlxtend/data/data/mnist_5k.csv.gz"


def from_wheel(path):
    with zipfile.ZipFile(path) as z:
        return z.read(MEMBER)


def from_installed():
    try:
        import mlxtend  # noqa: F401
    except ImportError:
        return None
    p = pathlib.Path(mlxtend.__file__).parent / "data" / "data" / "mnist_5k.csv.gz"
    return p.read_bytes() if p.exists() else None


def from_pip(version):
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run([sys.executable, "-m", "pip", "download", "--no-deps", "-d", tmp,
                        f"mlxtend=={version}"], check=True)
        wheel = next(pathlib.Path(tmp).glob("mlxtend-*.whl"))
        return from_wheel(wheel)


def parse(blob):
    images, labels = bytearray(), bytearray()
    for line in io.TextIOWrapper(gzip.GzipFile(fileobj=io.BytesIO(blob)), encoding="ascii"):
        vals = [int(float(v)) for v in line.strip().split(",") if v]
        if not vals:
            continue
        if len(vals) != 785:
            raise SystemExit(f"unexpected row width {len(vals)}")
        images.extend(vals[:784])
        labels.append(vals[784])
    return bytes(images), bytes(labels)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="data/mnist5k")
    ap.add_argument("--wheel", help="local mlxtend wheel")
    ap.add_argument("--version", default="0.24.0")
    args = ap.parse_args()

    blob = from_wheel(args.wheel) if args.wheel else (from_installed() or from_pip(args.version))
    images, labels = parse(blob)
    n = len(labels)
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "images-idx3-ubyte").write_bytes(struct.pack(">IIII", 0x803, n, 28, 28) + images)
    (out / "labels-idx1-ubyte").write_bytes(struct.pack(">II", 0x801, n) + labels)
    counts = [labels.count(bytes([k])) for k in range(10)]
    print(f"wrote {n} images to {out} (per class: {counts})")


if __name__ == "__main__":
    main()
