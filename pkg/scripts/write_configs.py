"""Regenerate the JSON files under configs/ from the benchmark definitions."""
from __future__ import annotations

import json
from pathlib import Path

from roma import benchmark

OUT = Path(__file__).resolve().parent.parent / "configs"


def dump(name: str, obj) -> None:
    (OUT / name).write_text(json.dumps(obj, indent=2) + "\n")
    print(f"wrote configs/{name}")


def main() -> None:
    OUT.mkdir(exist_ok=True)
    dump("benchmark.json", benchmark.config())
    dump("benchmark_scene.json", benchmark.scenario().to_dict())
    dump("offline_scene.json", benchmark.offline_scenario().to_dict())


if __name__ == "__main__":
    main()
