"""Run manifests: what ran, on which inputs, producing which bytes.

Every command that writes an output set drops a manifest.json next to
it with sha256 digests of inputs and outputs, the seed, and the
parameters, so a run can be reproduced or compared byte for byte.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from . import __version__


def file_digest(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass
class RunManifest:
    command: str
    parameters: dict
    seed: int | None = None
    inputs: dict = field(default_factory=dict)  # name -> {path, sha256}
    outputs: dict = field(default_factory=dict)

    def add_input(self, name: str, path: str) -> None:
        self.inputs[name] = {"path": path, "sha256": file_digest(path)}

    def add_output(self, name: str, path: str) -> None:
        self.outputs[name] = {"path": path, "sha256": file_digest(path)}

    def to_json(self) -> str:
        payload = {
            "command": self.command,
            "parameters": self.parameters,
            "seed": self.seed,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "version": __version__,
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    def write(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(self.to_json())


def load_manifest(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as handle:
        return json.load(handle)
