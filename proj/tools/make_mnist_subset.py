# Copyright 2026 The vfmh Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Builds the desk-scale MNIST subset used by the acceptance suite.

Reads the 5000-digit MNIST sample shipped with mlxtend (pixels then label per
CSV row), shuffles it with a fixed seed, and writes IDX files for the first
2000 rows (train) and the next 1000 rows (test).

    python3 tools/make_mnist_subset.py --source mnist_5k.csv.gz --out data/mnist

Without --source the mlxtend wheel is fetched with pip and the CSV is read
from inside it.
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

import numpy as np

CSV_IN_WHEEL = "mlxtend/data/data/mnist_5k.csv.gz"


def fetch_csv() -> bytes:
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(
            [sys.executable, "-m", "pip", "download", "mlxtend==0.24.0",
             "--no-deps", "-d", tmp],
            check=True, stdout=subprocess.DEVNULL)
        wheel = next(pathlib.Path(tmp).glob("mlxtend-*.whl"))
        with zipfile.ZipFile(wheel) as zf:
            return zf.read(CSV_IN_WHEEL)


def write_images(path: pathlib.Path, images: np.ndarray) -> None:
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(images), 28, 28))
        f.write(images.astype(np.uint8).tobytes())


def write_labels(path: pathlib.Path, labels: np.ndarray) -> None:
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(labels.astype(np.uint8).tobytes())


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--source", type=pathlib.Path)
    parser.add_argument("--out", type=pathlib.Path, default=pathlib.Path("data/mnist"))
    parser.add_argument("--train", type=int, default=2000)
    parser.add_argument("--test", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=20240601)
    args = parser.parse_args()

    raw = args.source.read_bytes() if args.source else fetch_csv()
    table = np.loadtxt(io.BytesIO(gzip.decompress(raw)), delimiter=",", dtype=np.int64)
    pixels, labels = table[:, :-1], table[:, -1]
    if pixels.shape[1] != 784 or pixels.min() < 0 or pixels.max() > 255:
        raise SystemExit("unexpected MNIST CSV layout")
    if args.train + args.test > len(labels):
        raise SystemExit("not enough rows for the requested split")

    order = np.random.default_rng(args.seed).permutation(len(labels))
    pixels, labels = pixels[order], labels[order]
    train = slice(0, args.train)
    test = slice(args.train, args.train + args.test)

    args.out.mkdir(parents=True, exist_ok=True)
    write_images(args.out / "train-images-idx3-ubyte", pixels[train])
    write_labels(args.out / "train-labels-idx1-ubyte", labels[train])
    write_images(args.out / "t10k-images-idx3-ubyte", pixels[test])
    write_labels(args.out / "t10k-labels-idx1-ubyte", labels[test])
    for name, part in (("train", labels[train]), ("test", labels[test])):
        counts = np.bincount(part, minlength=10)
        print(f"{name}: {len(part)} rows, class counts {counts.tolist()}")


if __name__ == "__main__":
    main()
