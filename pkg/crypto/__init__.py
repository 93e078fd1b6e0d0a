from .checksums import sha256_digest, file_digest, sign_manifest, verify_manifest, verify_artifacts
from .keys import derive_signing_key, load_signing_key
