"""Artifact digests and manifest signatures."""
import json
import os

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives import hashes, hmac

from errors import ChecksumMismatch, RunError

CHUNK_BYTES = 1 << 20


def sha256_digest(data: bytes) -> str:
    digest = hashes.Hash(hashes.SHA256())
    digest.update(data)
    return digest.finalize().hex()


def file_digest(path: str) -> str:
    digest = hashes.Hash(hashes.SHA256())
    with open(path, 'rb') as f:
        for chunk in iter(lambda: f.read(CHUNK_BYTES), b''):
            digest.update(chunk)
    return digest.finalize().hex()


def canonical_text(manifest: dict) -> bytes:
    """Sorted-key JSON of the manifest without its signature."""
    body = {key: value for key, value in manifest.items() if key != 'signature'}
    return json.dumps(body, sort_keys=True, separators=(',', ':')).encode()


def sign_manifest(manifest: dict, key: bytes) -> dict:
    """Copy of the manifest carrying an HMAC-SHA256 signature over its canonical text."""
    mac = hmac.HMAC(key, hashes.SHA256())
    mac.update(canonical_text(manifest))
    return {**manifest, 'signature': mac.finalize().hex()}


def verify_manifest(manifest: dict, key: bytes) -> bool:
    signature = manifest.get('signature')
    if not signature:
        return False
    mac = hmac.HMAC(key, hashes.SHA256())
    mac.update(canonical_text(manifest))
    try:
        mac.verify(bytes.fromhex(signature))
    except (InvalidSignature, ValueError):
        return False
    return True


def verify_artifacts(manifest: dict, run_dir: str) -> None:
    """Raise ChecksumMismatch unless every listed artifact matches its recorded digest."""
    for name, expected in sorted(manifest.get('artifacts', {}).items()):
        path = os.path.join(run_dir, name)
        if not os.path.exists(path):
            raise ChecksumMismatch(f'{RunError.CHECKSUM}: {name} is missing')
        if file_digest(path) != expected:
            raise ChecksumMismatch(f'{RunError.CHECKSUM}: {name}')
