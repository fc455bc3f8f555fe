"""Count datasets for paired and unpaired designs.

Counts are stored at the raw (counted-egg) scale together with the
per-sample analytical sensitivity ``f``, so that ``epg = raw * f``.

CSV layouts understood by :func:`load_csv`:

* paired: columns ``pre,post`` with optional ``f_pre,f_post``;
* unpaired: long format ``group,count`` (group is ``C`` or ``T``) with an
  optional ``f`` column, or the wide ``pre,post`` layout where blank cells
  are skipped;
* simulator output: ``masterPre/masterPost`` (raw) or ``obsPre/obsPost``
  (epg), chosen by the ``raw_counts`` flag.

Lines starting with ``#`` are ignored.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .errors import SchemaError, ValidationError

PAIRED = "paired"
UNPAIRED = "unpaired"

_REL_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class CountDataset:
    design: str
    pre_raw: np.ndarray
    post_raw: np.ndarray
    f_pre: np.ndarray
    f_post: np.ndarray

    def __post_init__(self):
        if self.design not in (PAIRED, UNPAIRED):
            raise ValidationError(f"design must be 'paired' or 'unpaired', got {self.design!r}")
        pre = _as_counts(self.pre_raw, "pre")
        post = _as_counts(self.post_raw, "post")
        f_pre = _as_factors(self.f_pre, pre.size, "f_pre")
        f_post = _as_factors(self.f_post, post.size, "f_post")
        if pre.size < 1 or post.size < 1:
            raise ValidationError("both groups need at least one sample")
        if self.design == PAIRED and pre.size != post.size:
            raise ValidationError(
                f"paired design needs equal lengths, got {pre.size} pre and {post.size} post"
            )
        for name, arr in (("pre_raw", pre), ("post_raw", post), ("f_pre", f_pre), ("f_post", f_post)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def paired(self):
        return self.design == PAIRED

    @property
    def n_pre(self):
        return self.pre_raw.size

    @property
    def n_post(self):
        return self.post_raw.size

    @property
    def sample_size(self):
        """Animals per group; the smaller group for unpaired data."""
        return min(self.n_pre, self.n_post)

    def __eq__(self, other):
        if not isinstance(other, CountDataset):
            return NotImplemented
        return (
            self.design == other.design
            and np.array_equal(self.pre_raw, other.pre_raw)
            and np.array_equal(self.post_raw, other.post_raw)
            and np.array_equal(self.f_pre, other.f_pre)
            and np.array_equal(self.f_post, other.f_post)
        )

    def permuted(self, order):
        """Paired dataset with animals reordered (rows move with their data)."""
        order = np.asarray(order)
        if not self.paired:
            raise ValidationError("permuted() is only defined for paired data")
        return CountDataset(self.design, self.pre_raw[order], self.post_raw[order],
                            self.f_pre[order], self.f_post[order])


def _as_counts(values, label):
    arr = np.asarray(values, dtype=float).ravel()
    for i, v in enumerate(arr):
        if not np.isfinite(v) or v < 0:
            raise ValidationError(f"{label} count at row {i + 1} is negative or not finite: {v}")
        if v != np.round(v):
            raise ValidationError(f"{label} count at row {i + 1} is not an integer: {v}")
    return arr.astype(np.int64)


def _as_factors(values, n, label):
    arr = np.broadcast_to(np.asarray(values, dtype=float), (n,)).copy()
    bad = ~(np.isfinite(arr) & (arr > 0))
    if bad.any():
        i = int(np.argmax(bad))
        raise ValidationError(f"{label} at row {i + 1} must be a positive number, got {arr[i]}")
    return arr


def make_dataset(pre, post, f_pre=1.0, f_post=None, design=PAIRED, raw_counts=True):
    """Build a dataset from raw counts, or from epg values when ``raw_counts`` is false."""
    f_post = f_pre if f_post is None else f_post
    pre = np.asarray(pre, dtype=float).ravel()
    post = np.asarray(post, dtype=float).ravel()
    fp = _as_factors(f_pre, pre.size, "f_pre")
    fq = _as_factors(f_post, post.size, "f_post")
    if not raw_counts:
        pre = _epg_to_raw(pre, fp, "pre")
        post = _epg_to_raw(post, fq, "post")
    return CountDataset(design, pre, post, fp, fq)


def _epg_to_raw(epg, f, label, rows=None):
    raw = epg / f
    rounded = np.round(raw)
    for i in range(epg.size):
        if not np.isfinite(epg[i]) or epg[i] < 0:
            row = rows[i] if rows is not None else i + 1
            raise ValidationError(f"{label} value at row {row} is negative or not finite: {epg[i]:g}")
        if abs(raw[i] - rounded[i]) > _REL_TOL * max(1.0, abs(raw[i])):
            row = rows[i] if rows is not None else i + 1
            raise ValidationError(
                f"{label} value at row {row}: {epg[i]:g} not a multiple of {f[i]:g}"
            )
    return rounded


def epg_view(ds):
    """Return ``(pre_epg, post_epg)`` as raw * f."""
    return ds.pre_raw * ds.f_pre, ds.post_raw * ds.f_post


# ---------------------------------------------------------------------------
# CSV


def _read_rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        lines = [ln for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    reader = csv.DictReader(lines)
    if reader.fieldnames is None:
        raise SchemaError(f"{path}: no header row")
    header = [h.strip() for h in reader.fieldnames]
    rows = [{k.strip(): (v or "").strip() for k, v in r.items() if k is not None} for r in reader]
    return header, rows


def _number(text, column, row):
    try:
        return float(text)
    except ValueError:
        raise ValidationError(f"column {column!r} row {row}: cannot parse {text!r} as a number") from None


def _column(rows, name, skip_blank=False):
    vals, where = [], []
    for i, r in enumerate(rows, start=2):
        text = r.get(name, "")
        if text == "":
            if skip_blank:
                continue
            raise ValidationError(f"column {name!r} row {i}: missing value")
        vals.append(_number(text, name, i))
        where.append(i)
    return np.array(vals, dtype=float), where


def _pick(header, raw_counts):
    if "pre" in header and "post" in header:
        return "pre", "post"
    if raw_counts and "masterPre" in header and "masterPost" in header:
        return "masterPre", "masterPost"
    if not raw_counts and "obsPre" in header and "obsPost" in header:
        return "obsPre", "obsPost"
    raise SchemaError(
        "missing count columns: expected pre,post"
        + (" or masterPre,masterPost" if raw_counts else " or obsPre,obsPost")
        + f"; found {', '.join(header)}"
    )


def load_csv(path, design=PAIRED, raw_counts=True, f_pre=None, f_post=None, f_default=1.0):
    """Read a dataset from CSV.

    ``f_pre``/``f_post`` override any sensitivity column in the file; when
    neither is present ``f_default`` is used. With ``raw_counts=False`` the
    values are epg and must be exact multiples of ``f``.
    """
    header, rows = _read_rows(path)
    unpaired = design == UNPAIRED
    if unpaired and "group" in header and "count" in header:
        groups = [r.get("group", "").upper() for r in rows]
        for i, g in enumerate(groups, start=2):
            if g not in ("C", "T"):
                raise ValidationError(f"column 'group' row {i}: expected C or T, got {g!r}")
        values, _ = _column(rows, "count")
        if "f" in header:
            f_col, _ = _column(rows, "f")
        else:
            f_col = np.full(values.size, f_default)
        line = np.arange(2, values.size + 2)
        is_c = np.array([g == "C" for g in groups], dtype=bool)
        pre, post = values[is_c], values[~is_c]
        fp = np.full(pre.size, f_pre) if f_pre is not None else f_col[is_c]
        fq = np.full(post.size, f_post) if f_post is not None else f_col[~is_c]
        rows_pre, rows_post = list(line[is_c]), list(line[~is_c])
    else:
        c_pre, c_post = _pick(header, raw_counts)
        pre, rows_pre = _column(rows, c_pre, skip_blank=unpaired)
        post, rows_post = _column(rows, c_post, skip_blank=unpaired)
        fp = _factor(rows, header, "f_pre", f_pre, f_default, rows_pre)
        fq = _factor(rows, header, "f_post", f_post, f_default, rows_post)
    fp = _as_factors(fp, pre.size, "f_pre")
    fq = _as_factors(fq, post.size, "f_post")
    if not raw_counts:
        pre = _epg_to_raw(pre, fp, "pre", rows_pre)
        post = _epg_to_raw(post, fq, "post", rows_post)
    else:
        for vals, where, label in ((pre, rows_pre, "pre"), (post, rows_post, "post")):
            for v, row in zip(vals, where):
                if v < 0 or v != np.round(v):
                    raise ValidationError(f"{label} value at row {row} must be a non-negative integer, got {v:g}")
    return CountDataset(design, pre, post, fp, fq)


def _factor(rows, header, name, override, default, where):
    if override is not None:
        return np.full(len(where), float(override))
    if name in header:
        wanted = set(where)
        vals = [_number(r[name], name, i) for i, r in enumerate(rows, start=2) if i in wanted]
        return np.array(vals, dtype=float)
    return np.full(len(where), float(default))


def write_csv(ds, path, raw_counts=True):
    """Write ``ds`` so that ``load_csv(path, ds.design, raw_counts)`` returns it."""
    pre_v, post_v = (ds.pre_raw, ds.post_raw) if raw_counts else epg_view(ds)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        if ds.paired:
            w.writerow(["pre", "post", "f_pre", "f_post"])
            for row in zip(pre_v, post_v, ds.f_pre, ds.f_post):
                w.writerow([_fmt(x) for x in row])
        else:
            w.writerow(["group", "count", "f"])
            for v, f in zip(pre_v, ds.f_pre):
                w.writerow(["C", _fmt(v), _fmt(f)])
            for v, f in zip(post_v, ds.f_post):
                w.writerow(["T", _fmt(v), _fmt(f)])


def _fmt(x):
    x = float(x)
    return str(int(x)) if x.is_integer() else repr(x)
