#!/usr/bin/env python3
# Copyright 2026 The fairemb Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Rebuilds the native MovieLens-100k files (u.data, u.user) from the copy
bundled in the RecBole wheel, for hosts that can reach PyPI but not
files.grouplens.org.

usage: movielens_from_recbole.py OUT_DIR [--wheel PATH]
"""

import argparse
import glob
import os
import subprocess
import sys
import tempfile
import zipfile

PREFIX = "recbole/dataset_example/ml-100k/ml-100k."


def find_wheel(tmp):
    subprocess.run(
        [sys.executable, "-m", "pip", "download", "--no-deps", "recbole==1.2.1", "-d", tmp],
        check=True,
    )
    return glob.glob(os.path.join(tmp, "recbole-*.whl"))[0]


def rows(zf, kind):
    lines = zf.read(PREFIX + kind).decode("utf-8").splitlines()
    return [line.split("\t") for line in lines[1:] if line]


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("out_dir")
    parser.add_argument("--wheel")
    args = parser.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        wheel = args.wheel or find_wheel(tmp)
        with zipfile.ZipFile(wheel) as zf:
            inter = rows(zf, "inter")
            users = rows(zf, "user")

    os.makedirs(args.out_dir, exist_ok=True)
    with open(os.path.join(args.out_dir, "u.data"), "w") as f:
        for user, item, rating, ts in inter:
            f.write(f"{user}\t{item}\t{int(float(rating))}\t{int(float(ts))}\n")
    with open(os.path.join(args.out_dir, "u.user"), "w") as f:
        for user, age, gender, occupation, zip_code in users:
            f.write(f"{user}|{age}|{gender}|{occupation}|{zip_code}\n")
    print(f"wrote {len(inter)} ratings and {len(users)} users to {args.out_dir}")


if __name__ == "__main__":
    main()
