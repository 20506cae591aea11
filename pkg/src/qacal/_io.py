import hashlib
import json
import os
import tempfile
from pathlib import Path


def atomic_write_text(path, text: str) -> None:
    """Write via a temporary file in the same directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def config_hash(config) -> str:
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def provenance_comment(provenance) -> str:
    """One ``#``-prefixed CSV line carrying provenance (empty if none)."""
    if not provenance:
        return ""
    return "# provenance " + json.dumps(provenance, sort_keys=True, separators=(",", ":")) + "\n"


def write_csv(path, header, rows, provenance=None) -> None:
    lines = [provenance_comment(provenance), ",".join(header) + "\n"]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row) + "\n")
    atomic_write_text(path, "".join(lines))


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)
