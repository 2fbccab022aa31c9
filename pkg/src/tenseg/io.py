"""Reading and writing tensors, models, detections and run configs.

TSR1 layout (all little-endian): the magic ``b"TSR1"``, a ``uint32`` number
of modes ``K``, ``K`` ``uint64`` extents, then the ``float64`` entries in
column-major (``vec``) order.
"""

from __future__ import annotations

import csv
import json
import struct
from pathlib import Path
from typing import Dict, List, Sequence, Union

import numpy as np

from .ccid import DetectionResult
from .decompose import CPModel, HOSVDModel
from .tensor import vec

__all__ = [
    "MAGIC",
    "FileFormatError",
    "write_tsr1",
    "read_tsr1",
    "read_matrix_csv",
    "write_matrix_csv",
    "read_tensor",
    "save_model",
    "load_model",
    "write_truth",
    "read_truth",
    "write_detection",
    "read_config",
]

MAGIC = b"TSR1"
PathLike = Union[str, Path]


class FileFormatError(ValueError):
    """A file exists but its content does not have the expected layout."""


def write_tsr1(path: PathLike, x) -> None:
    x = np.asarray(x, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", x.ndim))
        fh.write(struct.pack(f"<{x.ndim}Q", *x.shape))
        fh.write(vec(x).astype("<f8").tobytes())


def read_tsr1(path: PathLike) -> np.ndarray:
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise FileFormatError(f"{path}: not a TSR1 file")
    if len(data) < 8:
        raise FileFormatError(f"{path}: truncated header")
    (k,) = struct.unpack_from("<I", data, 4)
    head = 8 + 8 * k
    if len(data) < head:
        raise FileFormatError(f"{path}: truncated header")
    shape = struct.unpack_from(f"<{k}Q", data, 8)
    m = int(np.prod(shape, dtype=np.int64))
    if len(data) != head + 8 * m:
        raise FileFormatError(f"{path}: expected {m} values, file holds {(len(data) - head) / 8:g}")
    values = np.frombuffer(data, dtype="<f8", offset=head, count=m)
    return values.reshape(shape, order="F").astype(np.float64)


def read_matrix_csv(path: PathLike) -> np.ndarray:
    """CSV with one row per time point, returned as a ``p x T`` matrix.

    A first row that does not parse as numbers is taken as a header.
    """
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if rows:
        try:
            [float(v) for v in rows[0]]
        except ValueError:
            rows = rows[1:]
    if not rows:
        raise FileFormatError(f"{path}: no data rows")
    try:
        mat = np.array([[float(v) for v in r] for r in rows])
    except ValueError as err:
        raise FileFormatError(f"{path}: {err}") from None
    return mat.T.copy()


def write_matrix_csv(path: PathLike, series) -> None:
    """Inverse of :func:`read_matrix_csv` for a ``p x T`` matrix."""
    series = np.atleast_2d(np.asarray(series, dtype=np.float64))
    np.savetxt(path, series.T, delimiter=",", fmt="%.17g")


def read_tensor(path: PathLike) -> np.ndarray:
    """TSR1 file, or a CSV matrix (``p x T``) when the suffix is ``.csv``."""
    if str(path).lower().endswith(".csv"):
        return read_matrix_csv(path)
    return read_tsr1(path)


def save_model(directory: PathLike, model: Union[CPModel, HOSVDModel]) -> None:
    """Factor matrices as TSR1 files plus ``manifest.json``."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    files = []
    for k, f in enumerate(model.factors):
        name = f"factor_{k}.tsr"
        write_tsr1(d / name, f)
        files.append(name)
    manifest: Dict = {"format": 1, "factors": files,
                      "shapes": [list(f.shape) for f in model.factors]}
    if isinstance(model, CPModel):
        manifest.update(kind="cp", rank=model.rank, weights=model.weights.tolist(),
                        errors=list(model.errors))
    else:
        write_tsr1(d / "core.tsr", model.core)
        manifest.update(kind="hosvd", core="core.tsr", ranks=list(model.core.shape))
    (d / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


def load_model(directory: PathLike) -> Union[CPModel, HOSVDModel]:
    d = Path(directory)
    manifest = json.loads((d / "manifest.json").read_text())
    factors = [read_tsr1(d / name) for name in manifest["factors"]]
    if manifest["kind"] == "cp":
        return CPModel(weights=np.asarray(manifest["weights"], dtype=np.float64),
                       factors=factors, errors=list(manifest.get("errors", [])))
    if manifest["kind"] == "hosvd":
        return HOSVDModel(core=read_tsr1(d / manifest["core"]), factors=factors)
    raise FileFormatError(f"{d}: unknown model kind {manifest['kind']!r}")


def write_truth(path: PathLike, change_points: Sequence[int]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["change_point"])
        w.writerows([[int(c)] for c in change_points])


def read_truth(path: PathLike) -> List[int]:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows or rows[0] != ["change_point"]:
        raise FileFormatError(f"{path}: missing 'change_point' header")
    return [int(r[0]) for r in rows[1:]]


def write_detection(prefix: PathLike, res: DetectionResult, extra: Dict = None) -> None:
    """``<prefix>.csv`` with one row per change-point and ``<prefix>.json``.

    The CSV lists every estimate with its rank on the solution path (``-1``
    when it is not on the path, e.g. after relocation) and its CS* score.
    """
    prefix = Path(prefix)
    rank = {c: i for i, c in enumerate(res.solution_path)}
    with open(prefix.with_suffix(".csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "path_rank", "cs_star"])
        for c in res.change_points:
            i = rank.get(c, -1)
            score = res.scores[i] if 0 <= i < len(res.scores) else float("nan")
            w.writerow([c, i, f"{score:.6g}"])
    summary = {
        "change_points": res.change_points,
        "n_cpts": res.n_cpts,
        "selected": res.selected,
        "candidates": res.candidates,
        "solution_path": res.solution_path,
        "chosen": res.chosen,
        "threshold": res.threshold if np.isfinite(res.threshold) else None,
        "T": res.T,
        "d": res.d,
        **(extra or {}),
    }
    prefix.with_suffix(".json").write_text(json.dumps(summary, indent=2) + "\n")


def read_config(path: PathLike) -> Dict[str, str]:
    """Flat ``key = value`` file; ``#`` starts a comment, dashes in keys become underscores."""
    out: Dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FileFormatError(f"{path}:{lineno}: expected key = value")
        key, value = (p.strip() for p in line.split("=", 1))
        if not key:
            raise FileFormatError(f"{path}:{lineno}: empty key")
        out[key.lstrip("-").replace("-", "_")] = value
    return out
