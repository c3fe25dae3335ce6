"""CSV ingestion for grouped designs, plus a synthetic hourly-profile dataset.

Covariate columns form groups either through an explicit group map (a JSON
list of groups, each an ordered list of column names) or the naming
convention ``<variable>_<groupindex>``: the integer suffix is the 1-based
group index, and within a group the columns are ordered by the first
appearance of their variable prefix in the header.
"""

from __future__ import annotations

import csv
import json
import re

import numpy as np

from .model import GroupedDesign


class DatasetError(ValueError):
    """Malformed dataset or group map; carries a 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


_NAME_RE = re.compile(r"^(.*)_(\d+)$")


def infer_groups(columns: list[str], response: str) -> list[list[str]]:
    """Group covariate columns by the ``<var>_<groupindex>`` convention."""
    prefixes: list[str] = []
    by_index: dict[int, dict[str, str]] = {}
    for col in columns:
        if col == response:
            continue
        m = _NAME_RE.match(col)
        if not m:
            raise DatasetError(
                f"column {col!r} does not follow the <var>_<groupindex> "
                "convention; pass an explicit group map", line=1)
        var, idx = m.group(1), int(m.group(2))
        if var not in prefixes:
            prefixes.append(var)
        slot = by_index.setdefault(idx, {})
        if var in slot:
            raise DatasetError(f"duplicate column {col!r}", line=1)
        slot[var] = col
    if not by_index:
        raise DatasetError("no covariate columns found", line=1)
    indices = sorted(by_index)
    if indices != list(range(indices[0], indices[0] + len(indices))):
        raise DatasetError(
            f"group indices {indices} are not contiguous", line=1)
    groups = []
    for idx in indices:
        slot = by_index[idx]
        if set(slot) != set(prefixes):
            missing = sorted(set(prefixes) - set(slot))
            raise DatasetError(
                f"group {idx} is missing columns for {missing}", line=1)
        groups.append([slot[var] for var in prefixes])
    return groups


def load_group_map(path) -> list[list[str]]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DatasetError(f"group map is not valid JSON: {exc.msg}",
                           line=exc.lineno) from exc
    if (not isinstance(raw, list) or not raw
            or not all(isinstance(grp, list) and grp for grp in raw)):
        raise DatasetError("group map must be a nonempty list of nonempty "
                           "column-name lists", line=1)
    sizes = {len(grp) for grp in raw}
    if len(sizes) != 1:
        raise DatasetError(
            f"groups must all have the same size, got sizes {sorted(sizes)}",
            line=1)
    flat = [c for grp in raw for c in grp]
    if len(set(flat)) != len(flat):
        raise DatasetError("group map repeats a column", line=1)
    return [[str(c) for c in grp] for grp in raw]


def load_dataset(csv_path, response: str, group_map_path=None
                 ) -> tuple[GroupedDesign, list[list[str]]]:
    """Read a headered CSV into a grouped design.

    Returns the design and the resolved group structure (list of groups,
    each a list of column names).  Missing or non-numeric cells raise
    :class:`DatasetError` with the offending line number; the model types
    do not handle missing data.
    """
    with open(csv_path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError("empty file", line=1) from None
        if response not in header:
            raise DatasetError(
                f"response column {response!r} not in header", line=1)
        if group_map_path is not None:
            groups = load_group_map(group_map_path)
            for grp in groups:
                for col in grp:
                    if col not in header:
                        raise DatasetError(
                            f"group map column {col!r} not in header", line=1)
                    if col == response:
                        raise DatasetError(
                            f"response {response!r} cannot be a covariate",
                            line=1)
        else:
            groups = infer_groups(header, response)

        col_pos = {name: i for i, name in enumerate(header)}
        y_pos = col_pos[response]
        x_pos = [col_pos[c] for grp in groups for c in grp]

        ys, rows = [], []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DatasetError(
                    f"expected {len(header)} fields, got {len(row)}",
                    line=line_no)
            try:
                ys.append(float(row[y_pos]))
                rows.append([float(row[i]) for i in x_pos])
            except ValueError:
                bad = next(v for i, v in enumerate(row)
                           if i in (y_pos, *x_pos) and not _is_number(v))
                raise DatasetError(
                    f"non-numeric value {bad!r}", line=line_no) from None

    if not rows:
        raise DatasetError("no data rows", line=2)
    X = np.asarray(rows, dtype=float)
    y = np.asarray(ys, dtype=float)
    if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
        bad_row = int(np.argmax(~np.all(np.isfinite(np.column_stack([X, y])),
                                        axis=1)))
        raise DatasetError("non-finite value", line=bad_row + 2)
    g, p = len(groups), len(groups[0])
    return GroupedDesign(X=X, y=y, g=g, p=p), groups


def _is_number(token: str) -> bool:
    try:
        v = float(token)
    except ValueError:
        return False
    return np.isfinite(v)


def standardize_columns(X: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Center and scale columns; constant columns keep scale 1."""
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale = np.where(scale > 0, scale, 1.0)
    return (X - mean) / scale, mean, scale


def write_hourly_profile_csv(csv_path, n_days: int = 357, seed: int = 7,
                             n_hours: int = 24) -> list[int]:
    """Write a synthetic dataset shaped like a daily air-profile study.

    One row per day; per hour j there are two covariates ``temp_j`` and
    ``hum_j`` (so g = 24 hourly groups with p = 2), and the response
    ``benzene_max`` follows a piecewise-constant hourly coefficient profile
    plus noise.  Returns the true change locations (1-based pair labels).
    """
    rng = np.random.default_rng(seed)
    hours = np.arange(n_hours)
    # smooth daily shapes plus day-to-day variation
    temp = (10 + 8 * np.sin((hours - 3) / 24 * 2 * np.pi)[None, :]
            + 3 * rng.standard_normal((n_days, 1))
            + 1.5 * rng.standard_normal((n_days, n_hours)))
    hum = (60 - 15 * np.sin((hours - 5) / 24 * 2 * np.pi)[None, :]
           + 8 * rng.standard_normal((n_days, 1))
           + 4 * rng.standard_normal((n_days, n_hours)))

    changes = [9, 15, 20]
    seg_coef = [(0.05, -0.01), (0.35, -0.06), (0.10, 0.02), (0.30, -0.04)]
    beta_t = np.empty(n_hours)
    beta_h = np.empty(n_hours)
    seg = 0
    for j in range(1, n_hours + 1):
        if j in changes:
            seg += 1
        beta_t[j - 1], beta_h[j - 1] = seg_coef[seg]

    y = temp @ beta_t + hum @ beta_h + rng.standard_normal(n_days)

    header = ["benzene_max"]
    for j in range(1, n_hours + 1):
        header += [f"temp_{j}", f"hum_{j}"]
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(n_days):
            row = [f"{y[i]:.6f}"]
            for j in range(n_hours):
                row += [f"{temp[i, j]:.6f}", f"{hum[i, j]:.6f}"]
            writer.writerow(row)
    return changes
