#!/usr/bin/env python3
"""Fetch the BasicMotions UEA dataset (.ts train/test files).

The files ship inside the sktime wheel, so this downloads that wheel with pip
and extracts the two members. Usage: fetch_basicmotions.py [DEST_DIR]
"""

import pathlib
import subprocess
import sys
import tempfile
import zipfile

MEMBERS = {
    "sktime/datasets/data/BasicMotions/BasicMotions_TRAIN.ts": "BasicMotions_TRAIN.ts",
    "sktime/datasets/data/BasicMotions/BasicMotions_TEST.ts": "BasicMotions_TEST.ts",
}


def main() -> int:
    dest = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "data/BasicMotions")
    if all((dest / name).exists() for name in MEMBERS.values()):
        print(f"BasicMotions already present in {dest}")
        return 0
    dest.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(
            [sys.executable, "-m", "pip", "download", "--no-deps", "-q", "-d", tmp, "sktime==1.2.0"],
            check=True,
        )
        wheel = next(pathlib.Path(tmp).glob("sktime-*.whl"))
        with zipfile.ZipFile(wheel) as z:
            for member, name in MEMBERS.items():
                (dest / name).write_bytes(z.read(member))
    print(f"wrote BasicMotions to {dest}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
