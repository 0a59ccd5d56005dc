"""Model files: one JSON header line, then raw little-endian float64 blocks.

Each block is written in column-major order; the header lists the block
names and shapes in file order.
"""
import json

import numpy as np

from ..errors import ParseError

MAGIC = "mvkit-model"


def save_model(path, meta, blocks):
    names = list(blocks)
    header = {
        "format": MAGIC,
        "schema": 1,
        "meta": meta,
        "blocks": [{"name": k, "shape": list(np.shape(blocks[k]))} for k in names],
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode() + b"\n")
        for k in names:
            arr = np.asarray(blocks[k], dtype="<f8")
            fh.write(arr.tobytes(order="F"))


def load_model(path):
    with open(path, "rb") as fh:
        first = fh.readline()
        body = fh.read()
    try:
        header = json.loads(first)
    except (json.JSONDecodeError, UnicodeDecodeError):
        raise ParseError("header is not JSON", path, 1) from None
    if header.get("format") != MAGIC:
        raise ParseError("not a model file", path, 1)
    blocks = {}
    offset = 0
    for spec in header["blocks"]:
        shape = tuple(spec["shape"])
        size = int(np.prod(shape)) * 8
        if offset + size > len(body):
            raise ParseError(f"truncated block {spec['name']!r}", path)
        flat = np.frombuffer(body, dtype="<f8", count=size // 8, offset=offset)
        blocks[spec["name"]] = flat.reshape(shape, order="F").astype(float)
        offset += size
    if offset != len(body):
        raise ParseError("trailing bytes after the last block", path)
    return header["meta"], blocks
