"""CSV + JSON-sidecar serialization for batches, paths, Wiener-Hopf samples
and Levy pairs.

Floats are written with ``%.17g`` so that files round-trip exactly and are
byte-identical for identical inputs.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from kingman.convolution import SampleBatch
from kingman.fluctuations import WhSamplePairs
from kingman.kernel import KingmanOrder
from kingman.processes import PathGrid
from kingman.radchf import LevyPair

FLOAT_FMT = "%.17g"


def _stem(path) -> Path:
    path = Path(path)
    return path.with_suffix("") if path.suffix in (".csv", ".json") else path


def dump_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_csv(path, header: list[str], rows: np.ndarray) -> None:
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        np.savetxt(fh, rows, fmt=FLOAT_FMT, delimiter=",")


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.size and data.shape[1] != len(header):
        raise ValueError(f"{path}: header has {len(header)} columns, rows have {data.shape[1]}")
    return header, data.reshape(-1, len(header))


def save_batch(batch: SampleBatch, path) -> tuple[Path, Path]:
    stem = _stem(path)
    csv_path, json_path = stem.with_suffix(".csv"), stem.with_suffix(".json")
    write_csv(csv_path, [f"x{j + 1}" for j in range(batch.dim)], batch.data)
    dump_json({"s": batch.order.s, "dim": batch.dim, "n": batch.n, "seed": batch.seed,
               "meta": batch.meta}, json_path)
    return csv_path, json_path


def load_batch(path, s: float | None = None) -> SampleBatch:
    """Read a batch; the order comes from the sidecar, or from ``s`` if there is none."""
    stem = _stem(path)
    header, data = read_csv(stem.with_suffix(".csv"))
    if header != [f"x{j + 1}" for j in range(len(header))]:
        raise ValueError(f"unexpected batch header {header}")
    side = stem.with_suffix(".json")
    meta = json.loads(side.read_text()) if side.exists() else {}
    if s is None:
        if "s" not in meta:
            raise ValueError(f"{side} missing; pass the order s explicitly")
        s = meta["s"]
    batch = SampleBatch(KingmanOrder(s), data, meta.get("seed"), meta.get("meta", {}))
    if meta and (meta.get("n") != batch.n or meta.get("dim") != batch.dim):
        raise ValueError(f"{side} does not match the CSV shape")
    return batch


def save_path(path: PathGrid, out) -> tuple[Path, Path]:
    """Single paths use columns ``t,x1..xk``; batches prepend a ``path`` index column."""
    stem = _stem(out)
    cols = [f"x{j + 1}" for j in range(path.dim)]
    n, T = path.n_paths, path.times.size
    if n == 1:
        header, rows = ["t", *cols], np.column_stack([path.times, path.states[0]])
    else:
        idx = np.repeat(np.arange(n), T)
        tt = np.tile(path.times, n)
        header = ["path", "t", *cols]
        rows = np.column_stack([idx, tt, path.states.reshape(n * T, path.dim)])
    write_csv(stem.with_suffix(".csv"), header, rows)
    dump_json({"seed": path.seed, "n_paths": n, "times": path.times.tolist(), "dim": path.dim,
               "meta": path.meta}, stem.with_suffix(".json"))
    return stem.with_suffix(".csv"), stem.with_suffix(".json")


def load_path(path) -> PathGrid:
    stem = _stem(path)
    header, data = read_csv(stem.with_suffix(".csv"))
    side = stem.with_suffix(".json")
    meta = json.loads(side.read_text()) if side.exists() else {}
    if header[0] == "t":
        return PathGrid(data[:, 0], data[None, :, 1:], meta.get("seed"), meta.get("meta", {}))
    if header[:2] != ["path", "t"]:
        raise ValueError(f"unexpected path header {header}")
    n = int(data[:, 0].max()) + 1
    T = data.shape[0] // n
    return PathGrid(data[:T, 1], data[:, 2:].reshape(n, T, -1), meta.get("seed"), meta.get("meta", {}))


WH_COLUMNS = ["g_bar", "x_bar", "g_comp", "x_comp"]


def save_pairs(pairs: WhSamplePairs, out, seed: int | None = None) -> tuple[Path, Path]:
    stem = _stem(out)
    write_csv(stem.with_suffix(".csv"), WH_COLUMNS, pairs.columns())
    meta = dict(pairs.meta, p=pairs.p, n=pairs.n, seed=seed)
    dump_json(meta, stem.with_suffix(".json"))
    return stem.with_suffix(".csv"), stem.with_suffix(".json")


def load_pairs(path) -> WhSamplePairs:
    stem = _stem(path)
    header, data = read_csv(stem.with_suffix(".csv"))
    if header != WH_COLUMNS:
        raise ValueError(f"unexpected Wiener-Hopf header {header}")
    meta = json.loads(stem.with_suffix(".json").read_text())
    return WhSamplePairs(float(meta["p"]), *(data[:, j].copy() for j in range(4)), meta=meta)


def save_levy_pair(pair: LevyPair, path) -> None:
    dump_json(pair.to_dict(), path)


def load_levy_pair(path) -> LevyPair:
    return LevyPair.from_dict(json.loads(Path(path).read_text()))
