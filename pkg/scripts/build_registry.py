#!/usr/bin/env python3
"""Regenerate src/monah/data/registry.json from the in-code definition."""

import dataclasses
import json
from pathlib import Path

from monah.registry import build_entries


def main() -> None:
    out = Path(__file__).resolve().parents[1] / "src" / "monah" / "data" / "registry.json"
    entries = [dataclasses.asdict(e) for e in build_entries()]
    out.write_text(json.dumps(entries, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {len(entries)} entries to {out}")


if __name__ == "__main__":
    main()
