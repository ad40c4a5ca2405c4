#!/usr/bin/env python3
# Copyright 2026 The dtsnn Authors
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
"""Builds gzipped IDX files from the 10k MNIST digits bundled in the npm
`mnist` package (src/digits/<d>.json, pixels stored as x/255 floats).

    npm pack mnist && tar xzf mnist-*.tgz
    python3 tools/make_mnist_subset.py package/src/digits data/mnist
"""
import gzip
import json
import pathlib
import random
import struct
import sys


def main(src, dst):
    images, labels = [], []
    for digit in range(10):
        flat = json.loads((pathlib.Path(src) / f"{digit}.json").read_text())["data"]
        for i in range(0, len(flat), 784):
            images.append(bytes(min(255, max(0, round(v * 255))) for v in flat[i:i + 784]))
            labels.append(digit)
    order = list(range(len(images)))
    random.Random(20180101).shuffle(order)
    out = pathlib.Path(dst)
    out.mkdir(parents=True, exist_ok=True)
    with gzip.GzipFile(out / "images-idx3-ubyte.gz", "wb", mtime=0) as f:
        f.write(struct.pack(">IIII", 0x803, len(order), 28, 28))
        f.write(b"".join(images[i] for i in order))
    with gzip.GzipFile(out / "labels-idx1-ubyte.gz", "wb", mtime=0) as f:
        f.write(struct.pack(">II", 0x801, len(order)))
        f.write(bytes(labels[i] for i in order))
    print(f"wrote {len(order)} samples to {out}")


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
