#!/usr/bin/env python3
# Copyright 2026 The pibnet Authors
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
`mnist` package (pixels stored as value/255 rounded to 3 decimals).

Output (default data/mnist/):
  train-images-idx3-ubyte.gz / train-labels-idx1-ubyte.gz  (first 7000)
  test-images-idx3-ubyte.gz  / test-labels-idx1-ubyte.gz   (remaining)
"""
import argparse
import gzip
import json
import pathlib
import random
import struct
import subprocess
import tarfile
import tempfile

PACKAGE = "mnist@1.1.0"
TRAIN_COUNT = 7000


def write_idx(path, magic, dims, payload):
    header = struct.pack(">I", magic) + b"".join(struct.pack(">I", d) for d in dims)
    with gzip.GzipFile(path, "wb", mtime=0) as f:
        f.write(header + payload)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data" / "mnist"))
    ap.add_argument("--tarball", help="pre-downloaded mnist-*.tgz")
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    with tempfile.TemporaryDirectory() as tmp:
        tgz = args.tarball
        if tgz is None:
            subprocess.run(["npm", "pack", PACKAGE], cwd=tmp, check=True, capture_output=True)
            tgz = next(pathlib.Path(tmp).glob("mnist-*.tgz"))
        samples = []
        with tarfile.open(tgz) as tar:
            for digit in range(10):
                raw = json.load(tar.extractfile(f"package/src/digits/{digit}.json"))["data"]
                assert len(raw) % 784 == 0
                for k in range(len(raw) // 784):
                    px = bytes(int(round(v * 255)) for v in raw[k * 784:(k + 1) * 784])
                    samples.append((px, digit))

    random.Random(20211).shuffle(samples)
    splits = {"train": samples[:TRAIN_COUNT], "test": samples[TRAIN_COUNT:]}
    for name, rows in splits.items():
        write_idx(out / f"{name}-images-idx3-ubyte.gz", 0x803, (len(rows), 28, 28),
                  b"".join(px for px, _ in rows))
        write_idx(out / f"{name}-labels-idx1-ubyte.gz", 0x801, (len(rows),),
                  bytes(lbl for _, lbl in rows))
        print(f"{name}: {len(rows)} samples")


if __name__ == "__main__":
    main()
