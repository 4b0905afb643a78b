"""
Common utility functions for the simulator
"""

import json
import sys
from pathlib import Path
from typing import Any, Dict, Optional


def get_data_path() -> Path:
    """Get base path for data files (logs, results etc.).
    Returns the project root directory."""
    if getattr(sys, 'frozen', False):
        # Running as a bundled executable - use executable's directory
        return Path(sys.executable).parent
    else:
        # Running as script - use project root (parent of src directory)
        return Path(__file__).parent.parent.parent


def get_results_dir(name: str, base: Optional[Path] = None) -> Path:
    """Directory for the outputs of one named run, created on demand"""
    root = Path(base) if base is not None else get_data_path() / "results"
    out_dir = root / name
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir


def load_json_document(path) -> Dict[str, Any]:
    """Read a single JSON document (config or schedule file)"""
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: expected a JSON object at top level")
    return data


def ceil_div(a: int, b: int) -> int:
    """Integer ceiling of a / b for b > 0"""
    return -(-a // b)
