"""Bundled case fixtures and retrieval of benchmark library cases.

Two hand-built toys ship with the package.  The named bench cases
(``case24``/``case30``/``case57``) resolve to bundled synthetic stand-ins that
reproduce the entity counts of the corresponding IEEE systems (24/33/38,
30/6/41 and 57/7/80 buses/generators/branches); ``fetch-cases`` can replace
them with the real benchmark files on machines with network access.
"""

from __future__ import annotations

import hashlib
import json
import urllib.request
from importlib import resources
from pathlib import Path

from ..errors import ConfigError
from ..grid import Grid, parse_case

BUNDLED = {
    "case2": "case2_uncongested.m",
    "case3": "case3_congested.m",
    "case24": "case24_dc.m",
    "case30": "case30_dc.m",
    "case57": "case57_dc.m",
}

#: Upstream benchmark files for fetch_cases.  Checksums are recorded on first
#: fetch and verified on later ones (the files are versioned upstream).
FETCH_SOURCES = {
    "case24": "https://raw.githubusercontent.com/power-grid-lib/pglib-opf/master/pglib_opf_case24_ieee_rts.m",
    "case30": "https://raw.githubusercontent.com/power-grid-lib/pglib-opf/master/pglib_opf_case30_ieee.m",
    "case57": "https://raw.githubusercontent.com/power-grid-lib/pglib-opf/master/pglib_opf_case57_ieee.m",
}


def bundled_case_text(name: str) -> str:
    if name not in BUNDLED:
        raise ConfigError(f"unknown bundled case {name!r}; have {sorted(BUNDLED)}")
    ref = resources.files(__package__).joinpath("data", BUNDLED[name])
    return ref.read_text(encoding="utf-8")


def resolve_case_text(name_or_path: str, search_dir: str | Path | None = None) -> str:
    """Case text from an explicit path, a fetched copy, or the bundled fixture."""
    path = Path(name_or_path)
    if path.suffix == ".m" or path.exists():
        if not path.exists():
            raise ConfigError(f"case file {name_or_path!r} does not exist")
        return path.read_text(encoding="utf-8")
    if search_dir is not None:
        fetched = Path(search_dir) / f"{name_or_path}.m"
        if fetched.exists():
            return fetched.read_text(encoding="utf-8")
    return bundled_case_text(name_or_path)


def load_case(name_or_path: str, search_dir: str | Path | None = None) -> Grid:
    return parse_case(resolve_case_text(name_or_path, search_dir))


def fetch_cases(
    dest_dir: str | Path, names: list[str] | None = None, timeout: float = 30.0
) -> dict[str, str]:
    """Download benchmark cases into ``dest_dir``; returns name -> sha256.

    Checksums are pinned trust-on-first-use in ``dest_dir/checksums.json``:
    recorded when unknown, enforced afterwards.
    """
    dest = Path(dest_dir)
    dest.mkdir(parents=True, exist_ok=True)
    manifest_path = dest / "checksums.json"
    manifest = {}
    if manifest_path.exists():
        manifest = json.loads(manifest_path.read_text())

    names = names or sorted(FETCH_SOURCES)
    fetched: dict[str, str] = {}
    for name in names:
        if name not in FETCH_SOURCES:
            raise ConfigError(f"no fetch source for case {name!r}")
        url = FETCH_SOURCES[name]
        with urllib.request.urlopen(url, timeout=timeout) as resp:
            data = resp.read()
        digest = hashlib.sha256(data).hexdigest()
        if name in manifest and manifest[name] != digest:
            raise ConfigError(
                f"checksum mismatch for {name}: expected {manifest[name]}, got {digest}"
            )
        manifest[name] = digest
        (dest / f"{name}.m").write_bytes(data)
        fetched[name] = digest
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return fetched
