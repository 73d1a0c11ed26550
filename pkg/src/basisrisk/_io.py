"""Atomic file output, checksums and run manifests."""
import hashlib
import json
import os
from pathlib import Path
import tempfile

MANIFEST_NAME = "manifest.json"


def atomic_write_bytes(path, data):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def table_bytes(df):
    # repr-precision floats, '\n' line ends and empty cells for NaN keep output byte-stable
    return df.to_csv(index=False, lineterminator="\n", na_rep="").encode("utf-8")


def git_blob_sha1(data):
    h = hashlib.sha1(b"blob %d\0" % len(data))
    h.update(data)
    return h.hexdigest()


def file_entry(path, data):
    return {
        "file": Path(path).name,
        "bytes": len(data),
        "sha256": hashlib.sha256(data).hexdigest(),
        "git_sha1": git_blob_sha1(data),
    }


def write_table(df, path):
    data = table_bytes(df)
    atomic_write_bytes(path, data)
    return file_entry(path, data)


def write_json(obj, path):
    data = (json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n").encode("utf-8")
    atomic_write_bytes(path, data)
    return file_entry(path, data)


def _jsonable(o):
    if hasattr(o, "item"):
        return o.item()
    if isinstance(o, (set, frozenset, tuple)):
        return list(o)
    raise TypeError(f"cannot serialise {type(o).__name__}")


def write_manifest(outdir, command, config, seed, outputs, duration, extra=None):
    """Write ``manifest.json``; the content hash covers the output checksums in order."""
    digest = hashlib.sha256("".join(o["sha256"] for o in outputs).encode()).hexdigest()
    manifest = {
        "command": command,
        "config": config,
        "seed": seed,
        "outputs": outputs,
        "content_hash": digest,
        "duration_s": round(duration, 3),
    }
    if extra:
        manifest.update(extra)
    write_json(manifest, Path(outdir) / MANIFEST_NAME)
    return manifest


def read_config(path):
    """Load a JSON config; a manifest is accepted and its ``config`` entry used."""
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    if not isinstance(obj, dict):
        raise ValueError(f"config {path} must hold a JSON object")
    if "command" in obj and "config" in obj:
        return obj["config"]
    return obj
