#!/usr/bin/env python3
"""Regenerate the bundled fixture dataset in place.

The fixtures are deterministic; tests assert the shipped files match what this
script produces, so run it (and commit) after changing sample_data.py.
"""

from pathlib import Path

from light_engine.sample_data import write_fixtures

if __name__ == "__main__":
    target = Path(__file__).resolve().parent.parent / "src" / "light_engine" / "fixtures"
    write_fixtures(target)
    files = sorted(p.relative_to(target) for p in target.rglob("*") if p.is_file())
    print(f"wrote {len(files)} files under {target}")
