"""Dataset model, text ingestion format, synthetic benchmark generator,
and logical-label binarization.

The on-disk format is plain UTF-8 text.  A dataset file reads

    #ldl q o n
    <n lines of q feature values>
    <blank line>
    <n lines of o distribution values>

with whitespace-delimited decimals printed at 17 significant digits, which
round-trips float64 exactly.  Lines are instances; in memory instances are
columns (X is q x n, D is o x n).
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .linalg import check_matrix

__all__ = [
    "ParseError",
    "LdlDataset",
    "check_logical_labels",
    "generate_artificial",
    "binarize",
    "load_dataset",
    "save_dataset",
    "load_matrix",
    "save_matrix",
    "standardize_features",
]

DISTRIBUTION_SUM_TOL = 1e-6


class ParseError(ValueError):
    """Malformed dataset file; ``line`` is the 1-based offending line."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass
class LdlDataset:
    """Features plus ground-truth label distributions for n instances."""

    name: str
    X: np.ndarray          # q x n features, instances as columns
    D: np.ndarray          # o x n distributions, each column sums to 1
    label_names: list = None

    def __post_init__(self):
        self.X = check_matrix(self.X, "X")
        self.D = check_matrix(self.D, "D")
        if self.X.shape[1] != self.D.shape[1]:
            raise ValueError(
                f"X has {self.X.shape[1]} instances but D has {self.D.shape[1]}")
        if (self.D < 0).any() or (self.D > 1).any():
            raise ValueError("distribution entries must lie in [0, 1]")
        sums = self.D.sum(axis=0)
        bad = np.abs(sums - 1.0) > DISTRIBUTION_SUM_TOL
        if bad.any():
            j = int(np.argmax(bad))
            raise ValueError(
                f"distribution column {j} sums to {sums[j]:.8f}, expected 1")
        if self.label_names is not None and len(self.label_names) != self.D.shape[0]:
            raise ValueError("label_names length must match label count")

    @property
    def n_features(self):
        return self.X.shape[0]

    @property
    def n_labels(self):
        return self.D.shape[0]

    @property
    def n_instances(self):
        return self.X.shape[1]

    def subsample(self, indices, name=None):
        """Dataset restricted to the given instance indices."""
        idx = np.asarray(indices, dtype=int)
        return LdlDataset(name=name or f"{self.name}[{idx.size}]",
                          X=self.X[:, idx], D=self.D[:, idx],
                          label_names=self.label_names)


def check_logical_labels(L):
    """Validate a {0,1} label matrix with at least one mark per column."""
    L = check_matrix(L, "logical labels")
    if not np.isin(L, (0.0, 1.0)).all():
        raise ValueError("logical labels must be 0 or 1")
    if not L.any(axis=0).all():
        raise ValueError("every instance needs at least one positive label")
    return L


def generate_artificial():
    """Deterministic 2601-instance synthetic benchmark (3 features, 3 labels).

    The first two features form a 51 x 51 grid with spacing 0.04 over
    [-1, 1]; the third is sin((x1 + x2) * pi).  Per-label scores come from
    a cubic feature lift followed by a squared cascade, normalized to sum
    to one.
    """
    ticks = np.linspace(-1.0, 1.0, 51)
    g1, g2 = np.meshgrid(ticks, ticks, indexing="ij")
    x1 = g1.ravel()
    x2 = g2.ravel()
    x3 = np.sin((x1 + x2) * np.pi)
    X = np.vstack([x1, x2, x3])

    m, n, p, q = 1.0, 0.5, 0.2, 1.0
    W = m * X + n * X**2 + p * X**3 + q        # rows w_1, w_2, w_3
    r1 = np.array([4.0, 2.0, 1.0])
    r2 = np.array([1.0, 2.0, 4.0])
    r3 = np.array([1.0, 4.0, 2.0])
    eta1 = eta2 = 0.01
    phi1 = (r1 @ W) ** 2
    phi2 = (r2 @ W + eta1 * phi1) ** 2
    phi3 = (r3 @ W + eta2 * phi2) ** 2
    Phi = np.vstack([phi1, phi2, phi3])
    D = Phi / Phi.sum(axis=0, keepdims=True)
    return LdlDataset(name="artificial", X=X, D=D,
                      label_names=["y1", "y2", "y3"])


def binarize(D, strategy="cumulative", threshold=0.5, k=1):
    """Binarize distribution columns into logical labels.

    strategy:
      "cumulative" -- mark labels in descending-degree order until the
          cumulative degree first exceeds ``threshold`` (ties broken by
          lower label index).
      "mean" -- mark labels whose degree exceeds the column mean, falling
          back to the top label when none does.
      "topk" -- mark the ``k`` largest degrees (index tie-break).

    Every column ends up with at least one mark.
    """
    D = check_matrix(D, "D")
    o, n = D.shape
    L = np.zeros((o, n))
    if strategy == "cumulative":
        for j in range(n):
            # lexsort: primary key descending degree, secondary ascending index
            order = np.lexsort((np.arange(o), -D[:, j]))
            cum = 0.0
            for idx in order:
                L[idx, j] = 1.0
                cum += D[idx, j]
                if cum > threshold:
                    break
    elif strategy == "mean":
        means = D.mean(axis=0)
        L[D > means] = 1.0
        empty = ~L.any(axis=0)
        if empty.any():
            L[np.argmax(D[:, empty], axis=0), np.flatnonzero(empty)] = 1.0
    elif strategy == "topk":
        if not 1 <= k <= o:
            raise ValueError(f"k must be in [1, {o}]")
        for j in range(n):
            order = np.lexsort((np.arange(o), -D[:, j]))
            L[order[:k], j] = 1.0
    else:
        raise ValueError(f"unknown binarization strategy {strategy!r}")
    return L


def _fmt(values):
    return " ".join(format(v, ".17g") for v in values)


def save_dataset(ds, path):
    """Write a dataset in the #ldl text format (17 significant digits)."""
    q, o, n = ds.n_features, ds.n_labels, ds.n_instances
    lines = [f"#ldl {q} {o} {n}"]
    lines.extend(_fmt(ds.X[:, j]) for j in range(n))
    lines.append("")
    lines.extend(_fmt(ds.D[:, j]) for j in range(n))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_row(text, expected, line_no, what):
    parts = text.split()
    if len(parts) != expected:
        raise ParseError(f"expected {expected} {what} values, got {len(parts)}", line_no)
    try:
        return [float(v) for v in parts]
    except ValueError as exc:
        raise ParseError(f"bad {what} value: {exc}", line_no) from exc


def load_dataset(path, name=None):
    """Parse a #ldl text file into an :class:`LdlDataset`."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError("empty file", 1)
    header = lines[0].split()
    if len(header) != 4 or header[0] != "#ldl":
        raise ParseError(f"expected header '#ldl q o n', got {lines[0]!r}", 1)
    try:
        q, o, n = (int(v) for v in header[1:])
    except ValueError as exc:
        raise ParseError(f"non-integer dimensions in header: {exc}", 1) from exc
    if q < 1 or o < 1 or n < 1:
        raise ParseError("dimensions must be positive", 1)
    if len(lines) < 1 + n + 1 + n:
        raise ParseError(f"file truncated: need {1 + 2 * n + 1} lines for n={n}", len(lines))

    X = np.empty((q, n))
    for j in range(n):
        X[:, j] = _parse_row(lines[1 + j], q, 2 + j, "feature")
    sep = lines[1 + n]
    if sep.strip():
        raise ParseError("expected blank separator line between features and distributions", 2 + n)
    D = np.empty((o, n))
    for j in range(n):
        line_no = 3 + n + j
        D[:, j] = _parse_row(lines[2 + n + j], o, line_no, "distribution")
        s = D[:, j].sum()
        if abs(s - 1.0) > DISTRIBUTION_SUM_TOL:
            raise ParseError(f"distribution sums to {s:.8f}, expected 1", line_no)
        if (D[:, j] < 0).any() or (D[:, j] > 1).any():
            raise ParseError("distribution entries must lie in [0, 1]", line_no)
    for extra, text in enumerate(lines[2 + 2 * n:], start=3 + 2 * n):
        if text.strip():
            raise ParseError(f"unexpected trailing content {text!r}", extra)

    if name is None:
        import os
        name = os.path.splitext(os.path.basename(str(path)))[0]
    try:
        return LdlDataset(name=name, X=X, D=D)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def save_matrix(M, path, kind):
    """Write an o x n matrix (one instance per line) with a #ldl-<kind> header."""
    M = check_matrix(M, kind)
    o, n = M.shape
    lines = [f"#ldl-{kind} {o} {n}"]
    lines.extend(_fmt(M[:, j]) for j in range(n))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_matrix(path, kind=None):
    """Read a matrix written by :func:`save_matrix`; returns (matrix, kind)."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError("empty file", 1)
    header = lines[0].split()
    if len(header) != 3 or not header[0].startswith("#ldl-"):
        raise ParseError(f"expected header '#ldl-<kind> o n', got {lines[0]!r}", 1)
    file_kind = header[0][len("#ldl-"):]
    if kind is not None and file_kind != kind:
        raise ParseError(f"expected a {kind} file, found {file_kind}", 1)
    try:
        o, n = int(header[1]), int(header[2])
    except ValueError as exc:
        raise ParseError(f"non-integer dimensions in header: {exc}", 1) from exc
    if len(lines) < 1 + n:
        raise ParseError(f"file truncated: need {1 + n} lines for n={n}", len(lines))
    M = np.empty((o, n))
    for j in range(n):
        M[:, j] = _parse_row(lines[1 + j], o, 2 + j, file_kind)
    for extra, text in enumerate(lines[1 + n:], start=2 + n):
        if text.strip():
            raise ParseError(f"unexpected trailing content {text!r}", extra)
    return M, file_kind


def standardize_features(X):
    """Z-score each feature (row); constant features map to zero."""
    X = check_matrix(X, "X")
    if X.shape[1] < 2:
        raise ValueError("need at least 2 instances to standardize")
    mean = X.mean(axis=1, keepdims=True)
    std = X.std(axis=1, keepdims=True)
    flat = (std < 1e-15).ravel()
    if flat.any():
        warnings.warn(
            f"{int(flat.sum())} constant feature(s) mapped to zero", stacklevel=2)
    safe = np.where(std < 1e-15, 1.0, std)
    Z = (X - mean) / safe
    Z[flat, :] = 0.0
    return Z
