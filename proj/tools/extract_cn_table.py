#!/usr/bin/env python3
"""Extract the 32768x10 colour-names table compiled into OpenCV's tracking module.

The table is the orthonormal 10-D projection of the 11 colour-name probabilities
(the layout used by colour-names correlation trackers). It is written as
32768 rows of 10 little-endian float32, row index = R/8 + 32*(G/8) + 1024*(B/8).

usage: extract_cn_table.py [libopencv_tracking.a] [out.bin]
"""
import subprocess
import sys
import tempfile
from pathlib import Path

SYMBOL = "_ZN2cv6detail8tracking10ColorNamesE"
MEMBER = "featureColorName.cpp.o"
TABLE_BYTES = 32768 * 10 * 4


def section_offset(obj: Path) -> int:
    out = subprocess.run(["readelf", "-SW", str(obj)], check=True,
                         capture_output=True, text=True).stdout
    for line in out.splitlines():
        if ".rodata." + SYMBOL in line:
            fields = line.split("]", 1)[1].split()
            # name type address offset size ...
            offset, size = int(fields[3], 16), int(fields[4], 16)
            if size != TABLE_BYTES:
                raise SystemExit(f"unexpected table size {size}")
            return offset
    raise SystemExit("colour-names symbol not found")


def main() -> None:
    lib = Path(sys.argv[1] if len(sys.argv) > 1
               else "/usr/lib/x86_64-linux-gnu/libopencv_tracking.a")
    out = Path(sys.argv[2] if len(sys.argv) > 2 else "data/cn_table.bin")
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(["ar", "x", str(lib.resolve()), MEMBER], cwd=tmp, check=True)
        obj = Path(tmp) / MEMBER
        offset = section_offset(obj)
        blob = obj.read_bytes()[offset:offset + TABLE_BYTES]
    out.write_bytes(blob)
    print(f"wrote {out} ({len(blob)} bytes)")


if __name__ == "__main__":
    main()
