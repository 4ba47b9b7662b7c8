import hashlib
import json
from pathlib import Path
from typing import Any


def digest_bytes(payload: bytes) -> str:
    """
    Hash a payload with SHA-256.

    Returns:
        str: The hex digest, prefixed with the algorithm name.
    """
    return "sha256:" + hashlib.sha256(payload).hexdigest()


def digest_file(path: Path) -> str:
    return digest_bytes(Path(path).read_bytes())


def digest_json(obj: Any) -> str:
    """
    Hash a JSON-compatible object through its canonical encoding.

    Args:
        obj: Any value accepted by json.dumps.

    Returns:
        str: Digest of the sorted, whitespace-free encoding.
    """
    canonical = json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str)
    return digest_bytes(canonical.encode("utf-8"))
