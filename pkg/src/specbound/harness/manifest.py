"""Result manifests: config echo, versions, timings and file digests.

The manifest itself is line-oriented (same syntax as the config format).
File digests are sha256 over the emitted bytes, so a manifest is enough to
check that a re-run reproduced a study bit for bit.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

from .config import ExperimentConfig

__all__ = ["read_manifest", "sha256_file", "write_manifest"]

MANIFEST_NAME = "manifest.txt"


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(
    outdir,
    cfg: ExperimentConfig,
    *,
    version: str,
    timings: dict,
    files: list,
    exit_status: int,
) -> Path:
    outdir = Path(outdir)
    lines = ["# specbound result manifest", "[meta]"]
    lines.append(f"version = {version}")
    lines.append(f"exit_status = {exit_status}")
    for section, values in cfg.sections():
        lines.append(f"[config.{section}]")
        for key, val in values.items():
            if isinstance(val, list):
                val = ",".join(repr(v) if isinstance(v, float) else str(v) for v in val)
            elif val is None:
                val = ""
            lines.append(f"{key} = {val}")
    lines.append("[timings]")
    for name, seconds in timings.items():
        lines.append(f"{name} = {seconds:.6f}")
    lines.append("[files]")
    for name in sorted(files):
        path = outdir / name
        lines.append(f"{name} = sha256:{sha256_file(path)} bytes:{path.stat().st_size}")
    target = outdir / MANIFEST_NAME
    target.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return target


def read_manifest(path) -> dict:
    """Parse a manifest into {section: {key: value}} with file digests split."""
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST_NAME
    out: dict = {}
    section = None
    for raw in path.read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1]
            out.setdefault(section, {})
            continue
        key, _, value = line.partition("=")
        out[section][key.strip()] = value.strip()
    files = {}
    for name, spec in out.get("files", {}).items():
        parts = dict(tok.split(":", 1) for tok in spec.split())
        files[name] = {"sha256": parts.get("sha256", ""), "bytes": int(parts.get("bytes", 0))}
    out["files"] = files
    out["_dir"] = str(path.parent)
    return out
