"""File formats: matrix CSV, mask CSV, label lists, PGM images and JSON reports."""

import json
import os
from pathlib import Path

import numpy as np


def _ensure_parent(path):
    path = Path(path)
    parent = path.parent
    try:
        parent.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create directory {parent}: {exc.strerror}") from exc
    return path


def write_matrix(path, a):
    """Comma-separated, one row per line, 17 significant digits (round-trips exactly)."""
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    path = _ensure_parent(path)
    lines = [",".join(format(float(x), ".17g") for x in row) for row in a]
    try:
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def read_matrix(path):
    path = Path(path)
    rows = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append([float(x) for x in line.split(",")])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric field") from None
    if not rows:
        raise ValueError(f"{path}: empty matrix file")
    width = len(rows[0])
    for i, r in enumerate(rows):
        if len(r) != width:
            raise ValueError(f"{path}: row {i + 1} has {len(r)} fields, expected {width}")
    a = np.array(rows, dtype=np.float64)
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{path}: matrix contains NaN or Inf")
    return a


def write_mask(path, mask):
    """One ``row,col`` line per True entry, row-major order."""
    rows, cols = np.nonzero(np.asarray(mask, dtype=bool))
    path = _ensure_parent(path)
    path.write_text("".join(f"{i},{j}\n" for i, j in zip(rows, cols)), encoding="utf-8")


def read_mask(path, shape):
    mask = np.zeros(shape, dtype=bool)
    text = Path(path).read_text(encoding="utf-8").split()
    for item in text:
        i, j = (int(x) for x in item.split(","))
        mask[i, j] = True
    return mask


def write_indices(path, idx):
    path = _ensure_parent(path)
    path.write_text("".join(f"{int(i)}\n" for i in np.asarray(idx).ravel()), encoding="utf-8")


def read_labels(path):
    """Integer labels, one per line or comma separated."""
    text = Path(path).read_text(encoding="utf-8").replace(",", " ").split()
    try:
        return np.array([int(float(x)) for x in text], dtype=np.int64)
    except ValueError:
        raise ValueError(f"{path}: labels must be integers") from None


def write_json(path, obj):
    path = _ensure_parent(path)
    path.write_text(json.dumps(obj, sort_keys=True, indent=2, default=_json_default) + "\n",
                    encoding="utf-8")


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


# --- PGM -------------------------------------------------------------------

def _tokens(data, start, count):
    """Read ``count`` whitespace-separated header tokens, skipping # comments."""
    out = []
    pos = start
    while len(out) < count:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos >= len(data):
            raise ValueError("truncated PGM header")
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        end = pos
        while end < len(data) and not data[end:end + 1].isspace() and data[end:end + 1] != b"#":
            end += 1
        out.append(data[pos:end])
        pos = end
    return out, pos


def read_pgm(path):
    """Parse a P2 (ASCII) or P5 (binary) PGM into a height x width float array.

    Pixel values are returned raw, without scaling by maxval.
    """
    data = Path(path).read_bytes()
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise ValueError(f"{path}: not a P2/P5 PGM file")
    try:
        (w, h, maxval), pos = _tokens(data, 2, 3)
        width, height, maxval = int(w), int(h), int(maxval)
    except ValueError as exc:
        raise ValueError(f"{path}: bad PGM header ({exc})") from None
    if width <= 0 or height <= 0 or not 0 < maxval < 65536:
        raise ValueError(f"{path}: bad PGM dimensions or maxval")
    n = width * height
    if magic == b"P2":
        vals = data[pos:].split()
        if len(vals) < n:
            raise ValueError(f"{path}: expected {n} pixels, found {len(vals)}")
        pix = np.array([int(x) for x in vals[:n]], dtype=np.float64)
    else:
        pos += 1  # single whitespace after maxval
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        raw = data[pos:pos + n * dtype.itemsize]
        if len(raw) < n * dtype.itemsize:
            raise ValueError(f"{path}: truncated pixel data")
        pix = np.frombuffer(raw, dtype=dtype).astype(np.float64)
    if np.any(pix > maxval):
        raise ValueError(f"{path}: pixel value above maxval {maxval}")
    return pix.reshape(height, width)


def write_pgm(path, img, binary=True, maxval=255):
    img = np.asarray(img)
    height, width = img.shape
    path = _ensure_parent(path)
    vals = np.clip(np.rint(img), 0, maxval).astype(np.int64)
    if binary:
        dtype = ">u2" if maxval > 255 else "u1"
        header = f"P5\n{width} {height}\n{maxval}\n".encode("ascii")
        path.write_bytes(header + vals.astype(dtype).tobytes())
    else:
        body = "\n".join(" ".join(str(x) for x in row) for row in vals)
        path.write_text(f"P2\n# written by tcnmf\n{width} {height}\n{maxval}\n{body}\n",
                        encoding="ascii")


def read_pgm_dir(directory):
    """Stack every ``*.pgm`` image in ``directory`` (sorted by name) as columns.

    Returns ``(v, (height, width), names)``; pixels go row-major into each column.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise ValueError(f"{directory}: not a directory")
    files = sorted(p for p in directory.iterdir() if p.suffix.lower() == ".pgm")
    if not files:
        raise ValueError(f"{directory}: no .pgm files found")
    cols, shape = [], None
    for f in files:
        img = read_pgm(f)
        if shape is None:
            shape = img.shape
        elif img.shape != shape:
            raise ValueError(f"{f}: image is {img.shape}, expected {shape}")
        cols.append(img.ravel())
    return np.column_stack(cols), shape, [f.name for f in files]


def parse_shape(text):
    """``"32x32"`` -> ``(32, 32)``."""
    try:
        h, w = (int(x) for x in text.lower().split("x"))
    except ValueError:
        raise ValueError(f"image shape must look like HxW, got {text!r}") from None
    if h <= 0 or w <= 0:
        raise ValueError(f"image shape must be positive, got {text!r}")
    return h, w


def output_path(prefix, name):
    return Path(os.fspath(prefix)) / name
