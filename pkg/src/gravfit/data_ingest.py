"""Loading the trade dataset: archive download, legacy Stata .dta, CSV."""

import csv
import logging
import os
import shutil
import struct
import urllib.error
import urllib.request
import zipfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    ArchiveFormatError,
    ColumnNameError,
    CSVParseError,
    DataError,
    EmptyInputError,
    MissingMemberError,
    NetworkError,
    TruncatedFileError,
    UnsupportedVersionError,
)

log = logging.getLogger(__name__)

ARCHIVE_URL = "https://personal.lse.ac.uk/tenreyro/regressors.zip"
DATASET_MEMBER = "Log of Gravity.dta"

GRAVITY_COLUMNS = (
    "trade",
    "lypex",
    "lypim",
    "lyex",
    "lyim",
    "ldist",
    "border",
    "comlang",
    "colony",
    "landl_ex",
    "landl_im",
    "lremot_ex",
    "lremot_im",
    "comfrt_wto",
    "open_wto",
)


class ColumnTable:
    """Immutable table of named float64 columns.

    Parameters
    ----------
    columns : mapping of str to array-like
        Column vectors, all of the same length. Insertion order is kept.
    source : str
        Free-form provenance (file path and format).
    """

    def __init__(self, columns, source=""):
        cols = {}
        n_rows = None
        for name, values in columns.items():
            if not isinstance(name, str) or not name:
                raise DataError(f"invalid column name {name!r}")
            if name in cols:
                raise DataError(f"duplicate column name {name!r}")
            arr = np.array(values, dtype=np.float64, copy=True).reshape(-1)
            if n_rows is None:
                n_rows = arr.shape[0]
            elif arr.shape[0] != n_rows:
                raise DataError(f"column {name!r} has {arr.shape[0]} rows, expected {n_rows}")
            arr.setflags(write=False)
            cols[name] = arr
        self._columns = cols
        self.n_rows = 0 if n_rows is None else n_rows
        self.source = source

    @property
    def columns(self):
        return dict(self._columns)

    @property
    def names(self):
        return list(self._columns)

    def __getitem__(self, name):
        try:
            return self._columns[name]
        except KeyError:
            raise ColumnNameError(name) from None

    def __contains__(self, name):
        return name in self._columns

    def __len__(self):
        return self.n_rows

    def __eq__(self, other):
        if not isinstance(other, ColumnTable):
            return NotImplemented
        if self.names != other.names or self.n_rows != other.n_rows:
            return False
        return all(
            np.array_equal(self[k].view(np.uint64), other[k].view(np.uint64))
            or np.array_equal(self[k], other[k], equal_nan=True)
            for k in self.names
        )

    def __repr__(self):
        return f"ColumnTable(n_rows={self.n_rows}, columns={self.names}, source={self.source!r})"

    def take(self, index):
        """Return a new table with rows reordered/selected by ``index``."""
        index = np.asarray(index)
        return ColumnTable({k: v[index] for k, v in self._columns.items()}, source=self.source)

    def select(self, names):
        return ColumnTable({k: self[k] for k in names}, source=self.source)

    def drop(self, name):
        self[name]
        return ColumnTable({k: v for k, v in self._columns.items() if k != name}, source=self.source)


# ---------------------------------------------------------------------------
# archive
# ---------------------------------------------------------------------------


def fetch_archive(url=ARCHIVE_URL, dest_dir="regressors", member=DATASET_MEMBER, timeout=60.0):
    """Download and extract the replication archive; return the dataset path.

    Nothing is downloaded if the archive is already in ``dest_dir`` and nothing
    is extracted if the dataset file already exists.
    """
    if not url.startswith(("http://", "https://")):
        raise DataError(f"not an http(s) URL: {url!r}")
    dest = Path(dest_dir)
    dest.mkdir(parents=True, exist_ok=True)
    target = dest / member
    if target.exists():
        return target

    archive = dest / (url.rsplit("/", 1)[-1] or "archive.zip")
    if not archive.exists():
        log.info("downloading %s", url)
        tmp = archive.with_suffix(archive.suffix + ".part")
        try:
            with urllib.request.urlopen(url, timeout=timeout) as resp, open(tmp, "wb") as fh:
                shutil.copyfileobj(resp, fh)
        except (urllib.error.URLError, OSError) as exc:
            tmp.unlink(missing_ok=True)
            raise NetworkError(url, exc) from exc
        os.replace(tmp, archive)

    try:
        with zipfile.ZipFile(archive) as zf:
            matches = [m for m in zf.namelist() if m.rsplit("/", 1)[-1] == member]
            if not matches:
                raise MissingMemberError(f"{member!r} not found in {archive}")
            with zf.open(matches[0]) as src, open(target, "wb") as out:
                shutil.copyfileobj(src, out)
    except zipfile.BadZipFile as exc:
        raise ArchiveFormatError(f"{archive} is not a valid zip archive: {exc}") from exc
    return target


# ---------------------------------------------------------------------------
# Stata .dta (legacy binary formats 104-115)
# ---------------------------------------------------------------------------

SUPPORTED_DTA_VERSIONS = range(104, 116)

_BYTE, _INT, _LONG, _FLOAT, _DOUBLE = 251, 252, 253, 254, 255
_OLD_TYPE_CODES = {ord("b"): _BYTE, ord("i"): _INT, ord("l"): _LONG, ord("f"): _FLOAT, ord("d"): _DOUBLE}
_TYPE_NAMES = {_BYTE: "byte", _INT: "int", _LONG: "long", _FLOAT: "float", _DOUBLE: "double"}
_NUMPY_CODES = {_BYTE: "i1", _INT: "i2", _LONG: "i4", _FLOAT: "f4", _DOUBLE: "f8"}

# largest non-missing value per type for format >= 113 (extended missing codes)
_MAX_VALID = {
    _BYTE: 100,
    _INT: 32740,
    _LONG: 2147483620,
    _FLOAT: float(np.frombuffer(struct.pack("<I", 0x7EFFFFFF), "<f4")[0]),
    _DOUBLE: struct.unpack("<d", struct.pack("<Q", 0x7FDFFFFFFFFFFFFF))[0],
}
# single system-missing value for format < 113
_OLD_MISSING = {
    _BYTE: 127,
    _INT: 32767,
    _LONG: 2147483647,
    _FLOAT: 2.0**127,
    _DOUBLE: 2.0**1023,
}


@dataclass(frozen=True)
class DtaFileInfo:
    format_version: int
    byte_order: str  # "little" or "big"
    n_vars: int
    n_obs: int
    var_names: list
    var_types: list  # "byte", "int", "long", "float", "double" or "strN"
    data_offset: int = 0

    def __post_init__(self):
        if not (self.n_vars == len(self.var_names) == len(self.var_types)):
            raise DataError("inconsistent variable count in .dta header")


class _Cursor:
    def __init__(self, buf):
        self.buf = buf
        self.pos = 0

    def take(self, size, what):
        if self.pos + size > len(self.buf):
            raise TruncatedFileError(len(self.buf), self.pos + size - len(self.buf), what)
        out = self.buf[self.pos : self.pos + size]
        self.pos += size
        return out

    def unpack(self, fmt, what):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))


def _cstr(raw):
    return raw.split(b"\x00", 1)[0].decode("latin-1")


def _parse_dta_header(buf):
    if not buf:
        raise EmptyInputError("empty .dta file")
    cur = _Cursor(buf)
    version = cur.take(1, "format version")[0]
    if version not in SUPPORTED_DTA_VERSIONS:
        raise UnsupportedVersionError(version)
    order_byte = cur.take(1, "byte order")[0]
    if order_byte not in (1, 2):
        raise DataError(f"invalid byte-order byte {order_byte} in .dta header")
    bo = ">" if order_byte == 1 else "<"
    cur.take(2, "file type")
    n_vars, n_obs = cur.unpack(bo + "HI", "variable/observation counts")
    cur.take(81 if version > 105 else 32, "data label")
    if version > 104:
        cur.take(18, "time stamp")

    raw_types = cur.take(n_vars, "type list")
    var_types = []
    codes = []
    for t in raw_types:
        if version < 111:
            # 109/110 files exist with either coding; 251-255 never occur as old string codes
            if t in _OLD_TYPE_CODES:
                code = _OLD_TYPE_CODES[t]
            elif version > 108 and t in _TYPE_NAMES:
                code = t
            elif t > 0x7F:
                code = t - 0x7F
            else:
                raise DataError(f"unknown storage type byte {t}")
        else:
            code = t
            if not (1 <= code <= 244 or code in _TYPE_NAMES):
                raise DataError(f"unknown storage type byte {t}")
        codes.append(code)
        var_types.append(_TYPE_NAMES.get(code, f"str{code}"))

    name_len = 33 if version > 108 else 9
    names = [_cstr(cur.take(name_len, "variable names")) for _ in range(n_vars)]
    cur.take(2 * (n_vars + 1), "sort list")
    fmt_len = 49 if version > 113 else (12 if version > 104 else 7)
    cur.take(fmt_len * n_vars, "format list")
    cur.take((33 if version > 108 else 9) * n_vars, "value-label list")
    cur.take((81 if version > 105 else 32) * n_vars, "variable labels")
    if version > 104:
        while True:
            if version > 108:
                kind, length = cur.unpack(bo + "bi", "expansion field")
            else:
                kind, length = cur.unpack(bo + "bh", "expansion field")
            if kind == 0:
                break
            cur.take(length, "expansion field")

    info = DtaFileInfo(
        format_version=version,
        byte_order="big" if bo == ">" else "little",
        n_vars=n_vars,
        n_obs=n_obs,
        var_names=names,
        var_types=var_types,
        data_offset=cur.pos,
    )
    return info, codes, bo


def read_dta_info(path):
    """Parse only the header and descriptors of a legacy .dta file."""
    buf = Path(path).read_bytes()
    return _parse_dta_header(buf)[0]


def read_dta(path):
    """Read a legacy Stata dataset into a ColumnTable.

    Numeric variables are widened to float64 and Stata's missing codes become
    NaN. String variables, labels and value labels are skipped.
    """
    path = Path(path)
    buf = path.read_bytes()
    info, codes, bo = _parse_dta_header(buf)

    fields = []
    for i, code in enumerate(codes):
        fmt = f"S{code}" if code <= 244 else bo + _NUMPY_CODES[code]
        fields.append((f"f{i}", fmt))
    record = np.dtype(fields)
    needed = record.itemsize * info.n_obs
    available = len(buf) - info.data_offset
    if available < needed:
        raise TruncatedFileError(len(buf), needed - available, "observation records")
    data = np.frombuffer(buf, dtype=record, count=info.n_obs, offset=info.data_offset)

    columns = {}
    for i, (name, code) in enumerate(zip(info.var_names, codes)):
        if code <= 244:
            continue
        raw = data[f"f{i}"]
        values = raw.astype(np.float64)
        if info.format_version >= 113:
            missing = raw > _MAX_VALID[code]
        else:
            missing = raw == raw.dtype.type(_OLD_MISSING[code])
        values[missing] = np.nan
        columns[name] = values
    return ColumnTable(columns, source=f"{path} (Stata .dta format {info.format_version}, {info.byte_order}-endian)")


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------


def write_csv(table, path):
    """Write ``table`` as comma-separated text with round-trip float precision."""
    if not table.names:
        raise EmptyInputError("cannot write a table without columns")
    cols = [table[k] for k in table.names]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(table.names)
        for i in range(table.n_rows):
            writer.writerow([repr(float(c[i])) for c in cols])


def read_csv(path):
    """Read a numeric CSV written by :func:`write_csv` (or any compatible file).

    Empty cells and ``nan`` are read as missing.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or not any(h.strip() for h in header):
            raise EmptyInputError(f"{path} is empty")
        header = [h.strip() for h in header]
        rows = []
        for row_no, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"row {row_no} has {len(row)} cells, expected {len(header)}")
            parsed = []
            for name, cell in zip(header, row):
                cell = cell.strip()
                if cell == "" or cell == ".":
                    parsed.append(np.nan)
                    continue
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise CSVParseError(row_no, name, cell) from None
            rows.append(parsed)
    data = np.array(rows, dtype=np.float64).reshape(len(rows), len(header))
    return ColumnTable({name: data[:, j] for j, name in enumerate(header)}, source=f"{path} (csv)")


def load_table(path):
    """Dispatch on file extension: ``.dta`` or CSV."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    if path.suffix.lower() == ".dta":
        return read_dta(path)
    return read_csv(path)


def validate_gravity_table(table, required=GRAVITY_COLUMNS):
    for name in required:
        if name not in table:
            raise ColumnNameError(name)
