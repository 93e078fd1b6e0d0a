import os

import numpy as np
import pandas as pd

from errors import ArtifactWriteError, FormatVersionMismatch, RunError
from fields.grid import Grid, GridField, RANKS

HEADER_BYTES = 24


def encode_grid_field(field: GridField) -> bytes:
    """24-byte little-endian int64 header (dim, n, rank code) then float64 data."""
    header = np.array([field.grid.dim, field.grid.n, RANKS.index(field.rank)], dtype='<i8')
    return header.tobytes() + np.ascontiguousarray(field.values, dtype='<f8').tobytes()


def decode_grid_field(payload: bytes) -> GridField:
    if len(payload) < HEADER_BYTES:
        raise FormatVersionMismatch(f'{RunError.FORMAT_VERSION}: truncated header')
    dim, n, code = (int(x) for x in np.frombuffer(payload[:HEADER_BYTES], dtype='<i8'))
    if dim not in (1, 2, 3) or code not in range(len(RANKS)):
        raise FormatVersionMismatch(f'{RunError.FORMAT_VERSION}: bad header {dim, n, code}')
    grid = Grid(dim=dim, n=n)
    rank = RANKS[code]
    shape = grid.components(rank) + grid.shape
    data = np.frombuffer(payload[HEADER_BYTES:], dtype='<f8')
    if data.size != int(np.prod(shape)):
        raise FormatVersionMismatch(f'{RunError.FORMAT_VERSION}: payload size {data.size}')
    return GridField(grid, rank, data.reshape(shape).astype(float))


def write_grid_field(field: GridField, path: str) -> str:
    try:
        with open(path, 'wb') as f:
            f.write(encode_grid_field(field))
    except OSError as e:
        raise ArtifactWriteError(f'{RunError.WRITE_FAILED}: {path}: {e}')
    return path


def read_grid_field(path: str) -> GridField:
    with open(path, 'rb') as f:
        return decode_grid_field(f.read())


def grid_field_frame(field: GridField) -> pd.DataFrame:
    """Cell index columns followed by one column per component."""
    grid = field.grid
    index = np.indices(grid.shape).reshape(grid.dim, -1)
    columns = {f'i{a}': index[a] for a in range(grid.dim)}
    comps = grid.components(field.rank)
    flat = field.values.reshape((-1,) + (grid.cell_count,)) if comps else field.values.reshape(1, -1)
    names = ['value'] if not comps else [
        'c' + ''.join(str(i) for i in idx) for idx in np.ndindex(*comps)]
    for name, column in zip(names, flat):
        columns[name] = column
    return pd.DataFrame(columns)


def export_csv(field: GridField, path: str) -> str:
    os.makedirs(os.path.dirname(path) or '.', exist_ok=True)
    grid_field_frame(field).to_csv(path, index=False, float_format='%.17g')
    return path
