"""``WMHS`` binary and JSON sketch files.

Binary layout, little-endian::

    magic "WMHS" | version u16 | scheme u8 | reserved u8 | k u32
    master_seed u64 | layout_id u64 | n_records u64
    n_records fixed-width records

Record payloads: red-green ``k`` x u16, Ioffe ``k`` x (i64 k*, i64 t*),
reduction ``k`` x u64.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import BinaryIO, Sequence

import numpy as np

from .errors import DomainError, UsageError
from .redgreen import Sketch

MAGIC = b"WMHS"
VERSION = 1
_HEADER = struct.Struct("<4sHBBIQQQ")

SCHEME_IDS = {"redgreen": 1, "ioffe": 2, "reduction": 3}
_SCHEME_NAMES = {v: k for k, v in SCHEME_IDS.items()}
_DTYPES = {"redgreen": "<u2", "ioffe": "<i8", "reduction": "<u8"}
_WIDTH = {"redgreen": 1, "ioffe": 2, "reduction": 1}

U16_MAX = 0xFFFF


def _common_meta(sketches: Sequence[Sketch]) -> tuple[str, int, int, int]:
    if not sketches:
        raise UsageError("no sketches to write")
    first = sketches[0]
    meta = (first.scheme, first.k, first.master_seed, first.layout_id)
    for s in sketches[1:]:
        if (s.scheme, s.k, s.master_seed, s.layout_id) != meta:
            raise UsageError("all sketches in one file must share scheme, k, seed and layout")
    return meta


def encode_sketches(sketches: Sequence[Sketch]) -> bytes:
    scheme, k, seed, layout_id = _common_meta(sketches)
    values = np.stack([np.asarray(s.values) for s in sketches])
    if scheme == "redgreen" and values.size and int(values.max()) > U16_MAX:
        raise DomainError(
            f"hash value {int(values.max())} does not fit in 16 bits; the data is too sparse"
        )
    header = _HEADER.pack(MAGIC, VERSION, SCHEME_IDS[scheme], 0, k, seed, layout_id, len(sketches))
    return header + values.astype(_DTYPES[scheme]).tobytes()


def decode_sketches(data: bytes) -> list[Sketch]:
    if len(data) < _HEADER.size:
        raise UsageError("sketch file is truncated")
    magic, version, sid, _, k, seed, layout_id, n = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise UsageError("not a WMHS sketch file")
    if version != VERSION:
        raise UsageError(f"unsupported sketch file version {version}")
    if sid not in _SCHEME_NAMES:
        raise UsageError(f"unknown scheme id {sid}")
    scheme = _SCHEME_NAMES[sid]
    width = _WIDTH[scheme]
    body = np.frombuffer(data, _DTYPES[scheme], offset=_HEADER.size)
    if body.size != n * k * width:
        raise UsageError("sketch file size does not match its header")
    shape = (n, k, 2) if width == 2 else (n, k)
    body = body.reshape(shape)
    native = {"redgreen": np.int64, "ioffe": np.int64, "reduction": np.uint64}[scheme]
    return [Sketch(body[i].astype(native), scheme, seed, layout_id) for i in range(n)]


def sketches_to_json(sketches: Sequence[Sketch], labels: Sequence[str | None] | None = None) -> str:
    scheme, k, seed, layout_id = _common_meta(sketches)
    labels = labels or [None] * len(sketches)
    doc = {
        "format": "WMHS-json",
        "version": VERSION,
        "scheme": scheme,
        "k": k,
        "master_seed": seed,
        "layout_id": layout_id,
        "sketches": [
            {"label": lab, "values": np.asarray(s.values).tolist()}
            for s, lab in zip(sketches, labels)
        ],
    }
    return json.dumps(doc, separators=(",", ":"))


def sketches_from_json(text: str) -> list[Sketch]:
    doc = json.loads(text)
    if not isinstance(doc, dict) or doc.get("format") != "WMHS-json":
        raise UsageError("not a WMHS JSON sketch file")
    scheme = doc["scheme"]
    dtype = np.uint64 if scheme == "reduction" else np.int64
    return [
        Sketch(np.array(rec["values"], dtype=dtype), scheme, int(doc["master_seed"]), int(doc["layout_id"]))
        for rec in doc["sketches"]
    ]


def write_sketches(
    path: str | Path | BinaryIO,
    sketches: Sequence[Sketch],
    *,
    fmt: str = "wmhs",
    labels: Sequence[str | None] | None = None,
) -> None:
    if fmt == "wmhs":
        data = encode_sketches(sketches)
    elif fmt == "json":
        data = (sketches_to_json(sketches, labels) + "\n").encode()
    else:
        raise UsageError(f"unknown sketch format {fmt!r}")
    if hasattr(path, "write"):
        path.write(data)
    else:
        Path(path).write_bytes(data)


def read_sketches(path: str | Path) -> list[Sketch]:
    data = Path(path).read_bytes()
    if data[:4] == MAGIC:
        return decode_sketches(data)
    try:
        return sketches_from_json(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise UsageError(f"{path}: not a sketch file ({exc})") from None
