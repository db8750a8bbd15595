"""Binary file formats and text exports.

All multi-byte values are little-endian.  Four container formats:

PATP  pressure data     magic "PATP", u16 version, u32 n_x n_y n_t,
                        f64 t_max, then n*n_t f64 values (detector-major).
PATY  CS measurements   magic "PATY", u16 version, u8 matrix kind,
                        u32 m n d, u64 seed, f64 scale, f64 noise_level,
                        u32 n_t, f64 t_max, then m*n_t f64 values.
PATM  matrices          magic "PATM", u16 version, u8 kind, u32 m n d,
                        u64 seed, f64 scale, then the kind's payload
                        (dense i8 / u32 row list / n*d u32 column lists).
PATI  images            magic "PATI", u16 version, u32 n_x n_y n_z,
                        then n f64 values (x fastest, z slowest).

Filtered traces reuse the pressure container with a filter-tag byte after the
version (magic "PATF").  Grid extents travel in the experiment config, not in
the data files.
"""

import struct

import numpy as np

from .errors import FileFormatError
from .forward import PressureData
from .grids import TimeGrid
from .recon import ReconImage
from .sensing import BERNOULLI, CsData, EXPANDER, HADAMARD, IDENTITY_SUBSET, MeasurementMatrix
from .sparsify import FilteredData

VERSION = 1

_KIND_CODES = {BERNOULLI: 1, HADAMARD: 2, EXPANDER: 3, IDENTITY_SUBSET: 4}
_KIND_NAMES = {v: k for k, v in _KIND_CODES.items()}

_FILTER_CODES = {"ubp_filter": 1, "sparsifying_T": 2, "tail_integral": 3, "recovered": 4}
_FILTER_NAMES = {v: k for k, v in _FILTER_CODES.items()}


def _read_exact(f, count, what):
    data = f.read(count)
    if len(data) != count:
        raise FileFormatError(f"truncated file while reading {what}")
    return data


def _check_magic(f, magic):
    got = f.read(4)
    if got != magic:
        raise FileFormatError(f"bad magic {got!r}, expected {magic!r}")
    (version,) = struct.unpack("<H", _read_exact(f, 2, "version"))
    if version != VERSION:
        raise FileFormatError(f"unsupported version {version}")


def _write_array(f, arr, dtype):
    np.ascontiguousarray(arr, dtype=dtype).tofile(f)


def _read_array(f, dtype, count, what):
    arr = np.fromfile(f, dtype=dtype, count=count)
    if arr.size != count:
        raise FileFormatError(f"truncated file while reading {what}")
    return arr


# -- PATP ---------------------------------------------------------------


def write_pressure(path, pressure):
    with open(path, "wb") as f:
        f.write(b"PATP")
        f.write(struct.pack("<HIII", VERSION, pressure.grid.n_x, pressure.grid.n_y,
                            pressure.times.n_t))
        f.write(struct.pack("<d", pressure.times.t_max))
        _write_array(f, pressure.values, "<f8")


def read_pressure(path, detector_grid):
    """Read a PATP file; the grid extents come from the caller's config and
    must match the stored counts."""
    with open(path, "rb") as f:
        _check_magic(f, b"PATP")
        n_x, n_y, n_t = struct.unpack("<III", _read_exact(f, 12, "dims"))
        (t_max,) = struct.unpack("<d", _read_exact(f, 8, "t_max"))
        values = _read_array(f, "<f8", n_x * n_y * n_t, "values").reshape(n_x * n_y, n_t)
    if (detector_grid.n_x, detector_grid.n_y) != (n_x, n_y):
        raise FileFormatError(
            f"file holds a {n_x} x {n_y} grid, config says "
            f"{detector_grid.n_x} x {detector_grid.n_y}"
        )
    return PressureData(detector_grid, TimeGrid(t_max, n_t), values)


# -- PATY ---------------------------------------------------------------


def write_csdata(path, cs):
    with open(path, "wb") as f:
        f.write(b"PATY")
        f.write(struct.pack("<HB", VERSION, _KIND_CODES[cs.kind]))
        f.write(struct.pack("<IIIQ", cs.m, cs.n, cs.d, cs.seed))
        f.write(struct.pack("<ddId", cs.scale, cs.noise_level, cs.times.n_t,
                            cs.times.t_max))
        _write_array(f, cs.values, "<f8")


def read_csdata(path):
    with open(path, "rb") as f:
        _check_magic(f, b"PATY")
        (kind_code,) = struct.unpack("<B", _read_exact(f, 1, "kind"))
        m, n, d, seed = struct.unpack("<IIIQ", _read_exact(f, 20, "matrix metadata"))
        scale, noise_level, n_t, t_max = struct.unpack("<ddId", _read_exact(f, 28, "header"))
        values = _read_array(f, "<f8", m * n_t, "values").reshape(m, n_t)
    if kind_code not in _KIND_NAMES:
        raise FileFormatError(f"unknown matrix kind code {kind_code}")
    return CsData(kind=_KIND_NAMES[kind_code], m=m, n=n, d=d, seed=seed, scale=scale,
                  times=TimeGrid(t_max, n_t), values=values, noise_level=noise_level)


# -- PATM ---------------------------------------------------------------


def write_matrix(path, matrix):
    with open(path, "wb") as f:
        f.write(b"PATM")
        f.write(struct.pack("<HB", VERSION, _KIND_CODES[matrix.kind]))
        f.write(struct.pack("<IIIQd", matrix.m, matrix.n, matrix.d, matrix.seed,
                            matrix.scale))
        if matrix.kind == BERNOULLI:
            _write_array(f, matrix.entries, "<i1")
        elif matrix.kind in (HADAMARD, IDENTITY_SUBSET):
            _write_array(f, matrix.rows, "<u4")
        else:
            _write_array(f, matrix.columns, "<u4")


def read_matrix(path):
    with open(path, "rb") as f:
        _check_magic(f, b"PATM")
        (kind_code,) = struct.unpack("<B", _read_exact(f, 1, "kind"))
        m, n, d, seed, scale = struct.unpack("<IIIQd", _read_exact(f, 28, "header"))
        if kind_code not in _KIND_NAMES:
            raise FileFormatError(f"unknown matrix kind code {kind_code}")
        kind = _KIND_NAMES[kind_code]
        if kind == BERNOULLI:
            entries = _read_array(f, "<i1", m * n, "entries").reshape(m, n)
            return MeasurementMatrix(kind=kind, m=m, n=n, d=d, seed=seed, scale=scale,
                                     entries=entries)
        if kind in (HADAMARD, IDENTITY_SUBSET):
            rows = _read_array(f, "<u4", m, "rows")
            return MeasurementMatrix(kind=kind, m=m, n=n, d=d, seed=seed, scale=scale,
                                     rows=rows)
        columns = _read_array(f, "<u4", n * d, "columns").reshape(n, d)
        return MeasurementMatrix(kind=kind, m=m, n=n, d=d, seed=seed, scale=scale,
                                 columns=columns)


# -- PATF (filtered / recovered traces) ----------------------------------


def write_filtered(path, times, values, tag):
    with open(path, "wb") as f:
        f.write(b"PATF")
        f.write(struct.pack("<HB", VERSION, _FILTER_CODES[tag]))
        f.write(struct.pack("<IId", values.shape[0], times.n_t, times.t_max))
        _write_array(f, values, "<f8")


def read_filtered(path):
    with open(path, "rb") as f:
        _check_magic(f, b"PATF")
        (tag_code,) = struct.unpack("<B", _read_exact(f, 1, "filter tag"))
        channels, n_t, t_max = struct.unpack("<IId", _read_exact(f, 16, "header"))
        values = _read_array(f, "<f8", channels * n_t, "values").reshape(channels, n_t)
    if tag_code not in _FILTER_NAMES:
        raise FileFormatError(f"unknown filter tag {tag_code}")
    times = TimeGrid(t_max, n_t)
    return FilteredData(times, values, _FILTER_NAMES[tag_code])


# -- PATI ---------------------------------------------------------------


def write_image(path, image):
    with open(path, "wb") as f:
        f.write(b"PATI")
        f.write(struct.pack("<HIII", VERSION, image.grid.n_x, image.grid.n_y,
                            image.grid.n_z))
        _write_array(f, image.values, "<f8")


def read_image(path, recon_grid=None):
    """Read a PATI file.  With a grid, returns a ReconImage (counts must
    match); without, returns (dims, flat values)."""
    with open(path, "rb") as f:
        _check_magic(f, b"PATI")
        n_x, n_y, n_z = struct.unpack("<III", _read_exact(f, 12, "dims"))
        values = _read_array(f, "<f8", n_x * n_y * n_z, "values")
    if recon_grid is None:
        return (n_x, n_y, n_z), values
    if (recon_grid.n_x, recon_grid.n_y, recon_grid.n_z) != (n_x, n_y, n_z):
        raise FileFormatError("image dimensions do not match the grid")
    return ReconImage(recon_grid, values)


# -- text exports ---------------------------------------------------------


def write_pressure_csv(path, pressure):
    pos = pressure.grid.positions
    t = pressure.times.times
    with open(path, "w") as f:
        f.write("i,x,y,t,p\n")
        for i in range(pressure.grid.n):
            x, y = pos[i, 0], pos[i, 1]
            for k in range(pressure.times.n_t):
                f.write(f"{i},{x:.17g},{y:.17g},{t[k]:.17g},{pressure.values[i, k]:.17g}\n")


def write_image_csv(path, image):
    pos = image.grid.positions
    with open(path, "w") as f:
        f.write("k,x,y,z,value\n")
        for k in range(image.grid.n):
            f.write(f"{k},{pos[k, 0]:.17g},{pos[k, 1]:.17g},{pos[k, 2]:.17g},"
                    f"{image.values[k]:.17g}\n")


def write_objectives_csv(path, objectives):
    with open(path, "w") as f:
        f.write("t_index,objective\n")
        for k, val in enumerate(objectives):
            f.write(f"{k},{val:.17g}\n")


def write_error_report_csv(path, reports):
    with open(path, "w") as f:
        f.write("method,m,n,compression_factor,alpha,value\n")
        for r in reports:
            f.write(f"{r.method},{r.m},{r.n},{r.compression_factor:.17g},"
                    f"{r.alpha},{r.value:.17g}\n")


def write_series_csv(path, rows):
    """rows: iterable of (compression_factor, alpha, error)."""
    with open(path, "w") as f:
        f.write("compression_factor,alpha,error\n")
        for factor, alpha, err in rows:
            f.write(f"{factor:.17g},{alpha},{err:.17g}\n")


def write_histogram_csv(path, counts, edges):
    with open(path, "w") as f:
        f.write("bin_left,bin_right,count\n")
        for i, c in enumerate(counts):
            f.write(f"{edges[i]:.17g},{edges[i + 1]:.17g},{c}\n")


def _to_gray(values):
    lo, hi = float(np.min(values)), float(np.max(values))
    if hi > lo:
        norm = (values - lo) / (hi - lo)
    else:
        norm = np.zeros_like(values)
    return np.round(norm * 255).astype(int)


def write_pgm(path, array2d):
    """8-bit ASCII PGM (P2) after min-max normalization."""
    gray = _to_gray(np.asarray(array2d, dtype=float))
    h, w = gray.shape
    with open(path, "w") as f:
        f.write(f"P2\n{w} {h}\n255\n")
        for row in gray:
            f.write(" ".join(str(v) for v in row) + "\n")


def write_image_pgm(path, image):
    """Vertical-slice preview: rows run from z_max down to z = 0."""
    arr = image.as_array()  # (n_z, n_y, n_x)
    if image.grid.n_y == 1:
        plane = arr[::-1, 0, :]
    else:
        plane = arr.max(axis=1)[::-1]  # project across y
    write_pgm(path, plane)


def write_mips_pgm(prefix, image):
    """Maximum-intensity projections along z, y, x as three PGM files."""
    arr = image.as_array()
    write_pgm(f"{prefix}_mip_z.pgm", arr.max(axis=0))
    write_pgm(f"{prefix}_mip_y.pgm", arr.max(axis=1)[::-1])
    write_pgm(f"{prefix}_mip_x.pgm", arr.max(axis=2)[::-1])
    return [f"{prefix}_mip_{ax}.pgm" for ax in ("z", "y", "x")]
