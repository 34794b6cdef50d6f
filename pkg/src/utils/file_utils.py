"""
File Utilities

Hashing and directory helpers used for report provenance and output layout.
"""

import os
import json
import hashlib
from typing import Any, Dict


_HASH_ALGORITHMS = {
    'md5': hashlib.md5,
    'sha1': hashlib.sha1,
    'sha256': hashlib.sha256,
}


def compute_file_hash(file_path: str, algorithm: str = 'sha256', chunk_size: int = 4096) -> str:
    """
    Compute hash of a file.

    Args:
        file_path: Path to the file
        algorithm: Hash algorithm to use ('md5', 'sha1', 'sha256')
        chunk_size: Size of chunks to read (default 4096 bytes)

    Returns:
        Hexadecimal hash string

    Raises:
        FileNotFoundError: If file doesn't exist
        ValueError: If algorithm is not supported
    """
    if not os.path.exists(file_path):
        raise FileNotFoundError(f"File not found: {file_path}")

    if algorithm not in _HASH_ALGORITHMS:
        raise ValueError(f"Unsupported algorithm: {algorithm}. Use one of {list(_HASH_ALGORITHMS)}")

    hash_obj = _HASH_ALGORITHMS[algorithm]()
    with open(file_path, "rb") as f:
        for chunk in iter(lambda: f.read(chunk_size), b""):
            hash_obj.update(chunk)
    return hash_obj.hexdigest()


def compute_config_hash(config: Dict[str, Any], algorithm: str = 'sha256') -> str:
    """
    Hash a configuration mapping independently of key order.

    Args:
        config: JSON-serializable mapping
        algorithm: Hash algorithm to use

    Returns:
        Hexadecimal hash of the canonical JSON encoding
    """
    if algorithm not in _HASH_ALGORITHMS:
        raise ValueError(f"Unsupported algorithm: {algorithm}. Use one of {list(_HASH_ALGORITHMS)}")
    canonical = json.dumps(config, sort_keys=True, separators=(',', ':'), default=str)
    return _HASH_ALGORITHMS[algorithm](canonical.encode('utf-8')).hexdigest()


def ensure_directory_exists(directory: str) -> None:
    """
    Ensure a directory exists, creating it if necessary.

    Args:
        directory: Path to directory

    Raises:
        OSError: If directory cannot be created
    """
    os.makedirs(directory, exist_ok=True)
