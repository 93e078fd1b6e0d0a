"""Run directories, artifact files and the run manifest."""
import json
import logging
import os

import pandas as pd

from crypto.checksums import file_digest, sha256_digest, sign_manifest, verify_artifacts, verify_manifest
from crypto.keys import load_signing_key
from errors import ArtifactWriteError, ChecksumMismatch, FormatVersionMismatch, RunError

logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = 'THERMOLAB_OUTPUT_DIR'
DEFAULT_OUTPUT_DIR = 'runs'
MANIFEST_NAME = 'manifest.json'
FORMAT_VERSION = 1


def output_root() -> str:
    return os.environ.get(OUTPUT_DIR_ENV) or DEFAULT_OUTPUT_DIR


def run_directory(output_dir: str, command: str, config: dict = None) -> str:
    """<output_dir>/<command>-<config digest>; identical configs share a directory."""
    tag = sha256_digest(json.dumps(config or {}, sort_keys=True, default=str).encode())[:12]
    path = os.path.join(output_dir or output_root(), f'{command}-{tag}')
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as e:
        raise ArtifactWriteError(f'{RunError.WRITE_FAILED}: {path}: {e}')
    return path


def save_artifact(run_dir: str, name: str, payload) -> str:
    """Write bytes, text or a DataFrame (as CSV) under the run directory."""
    path = os.path.join(run_dir, name)
    try:
        os.makedirs(os.path.dirname(path), exist_ok=True)
        if isinstance(payload, pd.DataFrame):
            payload.to_csv(path, index=False, float_format='%.17g')
        else:
            with open(path, 'wb') as f:
                f.write(payload.encode() if isinstance(payload, str) else payload)
    except OSError as e:
        raise ArtifactWriteError(f'{RunError.WRITE_FAILED}: {path}: {e}')
    return path


def read_artifact(run_dir: str, name: str) -> bytes:
    with open(os.path.join(run_dir, name), 'rb') as f:
        return f.read()


def write_manifest(run_dir: str, command: str, config: dict, artifacts, extra: dict = None) -> str:
    """Echo the resolved config and the artifact digests; signed when a signing key is configured."""
    names = sorted(os.path.relpath(path, run_dir) for path in artifacts)
    manifest = {
        'format_version': FORMAT_VERSION,
        'command': command,
        'config': config,
        'artifacts': {name: file_digest(os.path.join(run_dir, name)) for name in names},
        **(extra or {}),
    }
    key = load_signing_key()
    if key is not None:
        manifest = sign_manifest(manifest, key)
    path = save_artifact(run_dir, MANIFEST_NAME, json.dumps(manifest, indent=2, sort_keys=True, default=str))
    logger.info('manifest written to %s (%d artifacts)', path, len(names))
    return path


def read_manifest(run_dir: str, verify: bool = True) -> dict:
    """Load the manifest, checking its format version and, when verify is set, the artifact digests."""
    try:
        manifest = json.loads(read_artifact(run_dir, MANIFEST_NAME))
    except (OSError, ValueError) as e:
        raise FormatVersionMismatch(f'{RunError.FORMAT_VERSION}: unreadable manifest: {e}')
    if manifest.get('format_version') != FORMAT_VERSION:
        raise FormatVersionMismatch(f'{RunError.FORMAT_VERSION}: {manifest.get("format_version")}')
    if verify:
        verify_artifacts(manifest, run_dir)
        key = load_signing_key()
        if key is not None and 'signature' in manifest and not verify_manifest(manifest, key):
            raise ChecksumMismatch(f'{RunError.CHECKSUM}: manifest signature')
    return manifest
