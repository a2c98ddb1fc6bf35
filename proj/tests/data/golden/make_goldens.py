#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Writes the committed protocol golden frames with struct.pack.

Kept independent of the C++ encoder so decode/re-encode tests compare
against bytes produced by a second implementation of the wire layout.
"""
import os
import struct

HERE = os.path.dirname(os.path.abspath(__file__))


def frame(ftype, payload):
    return struct.pack("<IB", len(payload), ftype) + payload


def short_str(s):
    b = s.encode("utf-8")
    return struct.pack("<H", len(b)) + b


GOLDENS = {
    "hello.bin": frame(0x01, struct.pack("<I", 8)),
    "chunk_event.bin": frame(
        0x02,
        struct.pack("<QII", 7, 12, 4) + struct.pack("<4f", 1.0, -2.5, 0.25, 3.0),
    ),
    "decision_continue.bin": frame(0x03, struct.pack("<QBfI", 7, 0, 0.125, 0)),
    "decision_chop.bin": frame(0x03, struct.pack("<QBfI", 7, 1, 0.875, 4096)),
    "reset.bin": frame(0x04, struct.pack("<Q", 7)),
    "error.bin": frame(
        0x05, short_str("dim_mismatch") + short_str("hidden_dim 8 != model dim 16")
    ),
}

if __name__ == "__main__":
    for name, data in GOLDENS.items():
        with open(os.path.join(HERE, name), "wb") as f:
            f.write(data)
        print(name, len(data), data.hex())
