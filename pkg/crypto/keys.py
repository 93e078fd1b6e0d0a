import base64
import os

from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.kdf.pbkdf2 import PBKDF2HMAC

SIGNING_KEY_ENV = 'THERMOLAB_SIGNING_KEY'
DEFAULT_SALT = b'thermolab-manifest'
ITERATIONS = 100000


def derive_signing_key(passphrase: str, salt: bytes = DEFAULT_SALT) -> bytes:
    """Derive the manifest signing key from a passphrase using PBKDF2."""
    kdf = PBKDF2HMAC(
        algorithm=hashes.SHA256(),
        length=32,
        salt=salt,
        iterations=ITERATIONS,
    )
    return base64.urlsafe_b64encode(kdf.derive(passphrase.encode()))


def load_signing_key():
    """Key from THERMOLAB_SIGNING_KEY, or None when manifests go unsigned."""
    passphrase = os.environ.get(SIGNING_KEY_ENV)
    if not passphrase:
        return None
    return derive_signing_key(passphrase)
