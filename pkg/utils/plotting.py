"""SVG line charts for run reports."""
import matplotlib

matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402

from errors import ArtifactWriteError, RunError  # noqa: E402

plt.rcParams['svg.hashsalt'] = 'thermolab'


def _save(fig, path: str) -> str:
    try:
        fig.savefig(path, format='svg', bbox_inches='tight', metadata={'Date': None})
    except OSError as e:
        raise ArtifactWriteError(f'{RunError.WRITE_FAILED}: {path}: {e}')
    finally:
        plt.close(fig)
    return path


def time_series_plot(path: str, series: dict, xlabel: str = 't', ylabel: str = '', logy: bool = False,
                     title: str = '') -> str:
    """One line per label; series maps label -> (x, y)."""
    fig, ax = plt.subplots(figsize=(7, 5))
    for label, (x, y) in series.items():
        ax.plot(x, y, '-', linewidth=1.0, label=label)
    if logy:
        ax.set_yscale('log')
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if len(series) > 1:
        ax.legend(fontsize='small')
    return _save(fig, path)


def convergence_plot(path: str, h, errors, label: str = 'error', reference_order: float = None) -> str:
    """Log-log error against mesh width, with an optional reference slope."""
    fig, ax = plt.subplots(figsize=(7, 5))
    ax.loglog(h, errors, '-o', linewidth=1.0, markersize=3, label=label)
    if reference_order is not None and len(h):
        ref = [errors[0] * (x / h[0]) ** reference_order for x in h]
        ax.loglog(h, ref, '--', color='black', linewidth=0.8, label=f'order {reference_order:g}')
    ax.set_xlabel('h')
    ax.set_ylabel(label)
    ax.legend(fontsize='small')
    return _save(fig, path)
