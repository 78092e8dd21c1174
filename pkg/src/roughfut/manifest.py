"""Run manifests: enough metadata to reproduce any output file.

Every CLI command writes one of these next to its outputs. Re-running the
recorded command with the recorded configuration regenerates the outputs
byte for byte (wall time is informational and excluded from that contract).
"""

import dataclasses
import hashlib
import json
from dataclasses import dataclass

from . import __version__


def sha256_file(path) -> str:
    """Hex SHA-256 digest of a file, streamed in 1 MiB blocks."""
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


@dataclass(frozen=True)
class RunManifest:
    """What was run, with what, and what it read."""

    command: tuple
    config: dict
    seed: int | None
    version: str
    inputs: dict
    wall_time_seconds: float

    @classmethod
    def capture(cls, command, config, seed, input_paths, wall_time_seconds):
        inputs = {str(p): sha256_file(p) for p in input_paths}
        return cls(command=tuple(str(c) for c in command),
                   config=dict(config),
                   seed=None if seed is None else int(seed),
                   version=__version__,
                   inputs=inputs,
                   wall_time_seconds=float(wall_time_seconds))

    def to_json(self) -> str:
        payload = dataclasses.asdict(self)
        payload["command"] = list(self.command)
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_json())

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        raw = json.loads(text)
        return cls(command=tuple(raw["command"]), config=raw["config"],
                   seed=raw["seed"], version=raw["version"],
                   inputs=raw["inputs"],
                   wall_time_seconds=raw["wall_time_seconds"])

    @classmethod
    def load(cls, path) -> "RunManifest":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(fh.read())
