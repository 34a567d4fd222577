"""Datasets: libsvm loading, synthetic generation, trace persistence.

Synthetic data is drawn from numpy's PCG64 bit generator seeded with the
user seed (``numpy.random.Generator(PCG64(seed))``); the generator name is
written into the dataset provenance.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import InvalidArgument, ParseError
from .solver import TRACE_FIELDS

PRNG = "numpy.PCG64"
LABEL_FLIP_RATE = 0.05
SIGMOID_NOISE = 0.01
TRUTH_DENSITY = 0.2

TRACE_COLUMNS = TRACE_FIELDS + ("rel_err",)


@dataclass(frozen=True)
class Dataset:
    A: sp.csr_matrix
    b: np.ndarray
    name: str
    provenance: dict

    @property
    def N(self):
        return self.A.shape[0]

    @property
    def n(self):
        return self.A.shape[1]


def load_libsvm(path, dims=None):
    """Parse ``label idx:val idx:val ...`` lines with 1-based, increasing indices.

    ``dims`` overrides the inferred feature count (the largest index seen).
    Two-valued labels are mapped to {-1, +1}, the smaller one to -1.
    """
    path = Path(path)
    labels, indptr, indices, data = [], [0], [], []
    with path.open() as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            tokens = line.split()
            try:
                labels.append(float(tokens[0]))
            except ValueError:
                raise ParseError(f"bad label {tokens[0]!r}", lineno) from None
            last = 0
            for tok in tokens[1:]:
                idx, sep, val = tok.partition(":")
                try:
                    if not sep:
                        raise ValueError
                    j, v = int(idx), float(val)
                except ValueError:
                    raise ParseError(f"malformed token {tok!r}", lineno) from None
                if j < 1:
                    raise ParseError(f"index {j} is not 1-based", lineno)
                if j <= last:
                    raise ParseError(f"indices not strictly increasing at {tok!r}", lineno)
                last = j
                indices.append(j - 1)
                data.append(v)
            indptr.append(len(indices))
    if not labels:
        raise ParseError(f"{path}: no samples")
    n = max(indices) + 1 if indices else 0
    if dims is not None:
        if dims < n:
            raise InvalidArgument(f"dims={dims} smaller than largest index {n}")
        n = dims
    if n == 0:
        raise ParseError(f"{path}: no features")
    A = sp.csr_matrix((np.array(data), np.array(indices, dtype=np.intp), np.array(indptr)),
                      shape=(len(labels), n))
    b = np.array(labels)
    values = np.unique(b)
    if values.size == 2:
        b = np.where(b == values[0], -1.0, 1.0)
    return Dataset(A=A, b=b, name=path.stem, provenance={"source": "file", "path": str(path)})


def write_libsvm(ds, path):
    A = ds.A.tocsr()
    with Path(path).open("w") as fh:
        for i in range(A.shape[0]):
            lo, hi = A.indptr[i], A.indptr[i + 1]
            items = " ".join(f"{j + 1}:{float(v)!r}" for j, v in zip(A.indices[lo:hi], A.data[lo:hi]))
            fh.write(f"{float(ds.b[i])!r} {items}".rstrip() + "\n")


def _sigmoid(t):
    return 0.5 * (1.0 + np.tanh(0.5 * t))


def synth_problem(kind, N, n, sparsity=1.0, seed=0):
    """Reproducible synthetic dataset.

    ``logistic``: labels are signs of ``<a_i, x_true>`` with 5% flipped.
    ``sigmoid_ls``: ``b_i = sigmoid(<a_i, x_true>) + 0.01 * noise``.
    Features are standard normal, each kept with probability ``sparsity``.
    """
    if kind not in ("logistic", "sigmoid_ls"):
        raise InvalidArgument(f"unknown synthetic kind {kind!r}")
    if N < 1 or n < 1:
        raise InvalidArgument("N and n must be >= 1")
    if not 0.0 < sparsity <= 1.0:
        raise InvalidArgument("sparsity must lie in (0, 1]")
    rng = np.random.Generator(np.random.PCG64(seed))
    dense = rng.standard_normal((N, n))
    if sparsity < 1.0:
        dense *= rng.random((N, n)) < sparsity
    A = sp.csr_matrix(dense)
    x_true = rng.standard_normal(n) * (rng.random(n) < TRUTH_DENSITY)
    margin = A @ x_true
    if kind == "logistic":
        b = np.where(margin >= 0.0, 1.0, -1.0)
        flips = rng.random(N) < LABEL_FLIP_RATE
        b[flips] = -b[flips]
    else:
        b = _sigmoid(margin) + SIGMOID_NOISE * rng.standard_normal(N)
    prov = {"source": "synthetic", "kind": kind, "seed": seed, "prng": PRNG,
            "N": N, "n": n, "sparsity": sparsity}
    return Dataset(A=A, b=b, name=f"synth-{kind}-{N}x{n}-s{seed}", provenance=prov)


def relative_error(psi, psi_star):
    return (psi - psi_star) / max(1.0, psi_star)


def trace_rows(trace, psi_star=None):
    for rec in trace:
        row = asdict(rec)
        row["rel_err"] = None if psi_star is None else relative_error(rec.psi, psi_star)
        yield row


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_trace(trace, path, fmt="csv", psi_star=None, exclude=()):
    """One row per iteration in :data:`TRACE_COLUMNS` order.

    ``rel_err = (psi - psi_star) / max(1, psi_star)`` when ``psi_star`` is given.
    """
    cols = [c for c in TRACE_COLUMNS if c not in exclude]
    path = Path(path)
    if fmt == "csv":
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(cols)
            for row in trace_rows(trace, psi_star):
                w.writerow([_csv_cell(row[c]) for c in cols])
    elif fmt in ("jsonl", "json-lines"):
        with path.open("w") as fh:
            for row in trace_rows(trace, psi_star):
                fh.write(json.dumps({c: row[c] for c in cols}) + "\n")
    else:
        raise InvalidArgument(f"unknown trace format {fmt!r}")


def read_trace(path, fmt="csv"):
    """Inverse of :func:`write_trace`, returning dict rows."""
    path = Path(path)
    if fmt in ("jsonl", "json-lines"):
        with path.open() as fh:
            return [json.loads(line) for line in fh if line.strip()]
    with path.open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    out = []
    for row in rows:
        parsed = {}
        for key, val in row.items():
            if val == "":
                parsed[key] = None
                continue
            try:
                parsed[key] = int(val)
            except ValueError:
                try:
                    parsed[key] = float(val)
                except ValueError:
                    parsed[key] = val
        out.append(parsed)
    return out


