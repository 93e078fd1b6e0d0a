import numpy as np

from errors import ConfigError, RunError


def state_size(dim: int) -> int:
    return dim * dim + dim + 1


def state_to_vector(F, v, eta) -> np.ndarray:
    """Flatten (F row-major, v, eta) along the last axis."""
    F = np.asarray(F, dtype=float)
    v = np.asarray(v, dtype=float)
    eta = np.asarray(eta, dtype=float)
    batch = eta.shape
    return np.concatenate([F.reshape(batch + (-1,)), v.reshape(batch + (-1,)), eta[..., None]], axis=-1)


def vector_to_state(x, dim: int):
    x = np.asarray(x, dtype=float)
    d2 = dim * dim
    F = x[..., :d2].reshape(x.shape[:-1] + (dim, dim))
    v = x[..., d2:d2 + dim]
    return F, v, x[..., d2 + dim]


def split_conserved(W: np.ndarray, dim: int):
    """(F, v, E) views of a component-first conservative array."""
    d2 = dim * dim
    grid_shape = W.shape[1:]
    return W[:d2].reshape((dim, dim) + grid_shape), W[d2:d2 + dim], W[d2 + dim]


def join_conserved(F: np.ndarray, v: np.ndarray, E: np.ndarray) -> np.ndarray:
    dim = v.shape[0]
    return np.concatenate([F.reshape((dim * dim,) + E.shape), v, E[None]], axis=0)


def parse_key_values(lines) -> dict:
    """key=value pairs from config lines or CLI tokens; '#' starts a comment."""
    result = {}
    for raw in lines:
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigError(f'{RunError.BAD_CONFIG}: expected key=value, got {line!r}')
        key, value = line.split('=', 1)
        result[key.strip()] = value.strip()
    return result


def coerce(value, default):
    """Convert a config string to the type of its default."""
    if not isinstance(value, str):
        return value
    try:
        if isinstance(default, bool):
            if value.lower() in ('1', 'true', 'yes', 'on'):
                return True
            if value.lower() in ('0', 'false', 'no', 'off'):
                return False
            raise ValueError(value)
        if isinstance(default, int):
            return int(value)
        if isinstance(default, float):
            return float(value)
        if isinstance(default, (list, tuple)):
            return [coerce(v.strip(), default[0] if default else 0.0) for v in value.split(',') if v.strip()]
    except ValueError:
        raise ConfigError(f'{RunError.BAD_CONFIG}: cannot read {value!r}')
    return value
