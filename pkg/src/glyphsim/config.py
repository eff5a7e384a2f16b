"""Run configuration: one JSON file drives every CLI command.

All randomness flows from the single seed here (sub-steps derive fixed
offsets from it); reports embed a fingerprint over the semantic inputs so
equal fingerprints imply byte-identical outputs.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

BACKENDS = ("bitmap", "file", "ncd")

# fixed seed offsets per pipeline step, so one config seed reproduces a run
SEED_OFFSET_AUGMENT = 1000  # + index of the augmentation count
SEED_OFFSET_SHEETS = 2000


@dataclass
class RunConfig:
    font_paths: list[str]
    confusables_path: str
    embeddings_path: str | None = None
    backend: str = "bitmap"
    seed: int = 0
    assign_threshold: float = 0.93
    merge_mean_threshold: float = 0.90
    merge_var_threshold: float = 0.01
    alpha: float = 0.93
    n_pairs: int = 2000
    augment_counts: list[int] = field(default_factory=lambda: [1000, 3000])
    output_dir: str = "out"
    block_size: int = 512
    predict_scope: str = "universe"  # universe | all
    sheet_count: int = 4
    render_codepoints: list[str] = field(default_factory=list)

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a JSON object")
        known = set(cls.__dataclass_fields__)
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        # paths in the config resolve relative to the config file
        config = cls(**raw)
        base = path.parent
        config.font_paths = [str((base / p).resolve()) for p in config.font_paths]
        config.confusables_path = str((base / config.confusables_path).resolve())
        if config.embeddings_path is not None:
            config.embeddings_path = str((base / config.embeddings_path).resolve())
        return config

    def validate(self) -> None:
        if not self.font_paths:
            raise ConfigError("font_paths must not be empty")
        for p in self.font_paths:
            if not Path(p).is_file():
                raise ConfigError(f"font path does not exist: {p}")
        if not Path(self.confusables_path).is_file():
            raise ConfigError(f"confusables path does not exist: {self.confusables_path}")
        if self.backend not in BACKENDS:
            raise ConfigError(f"backend must be one of {BACKENDS}, got {self.backend!r}")
        if self.backend == "file":
            if self.embeddings_path is None:
                raise ConfigError("backend 'file' requires embeddings_path")
            if not Path(self.embeddings_path).is_file():
                raise ConfigError(
                    f"embeddings path does not exist: {self.embeddings_path}"
                )
        if not (-1.0 < self.assign_threshold <= 1.0):
            raise ConfigError(f"assign_threshold out of range: {self.assign_threshold}")
        if not (-1.0 < self.merge_mean_threshold <= 1.0):
            raise ConfigError(
                f"merge_mean_threshold out of range: {self.merge_mean_threshold}"
            )
        if self.merge_var_threshold < 0:
            raise ConfigError(
                f"merge_var_threshold must be non-negative: {self.merge_var_threshold}"
            )
        if not (-1.0 < self.alpha < 1.0):
            raise ConfigError(f"alpha out of range: {self.alpha}")
        if self.n_pairs <= 0 or self.n_pairs % 2 != 0:
            raise ConfigError(f"n_pairs must be a positive even number: {self.n_pairs}")
        if any(k < 0 for k in self.augment_counts):
            raise ConfigError(f"augment_counts must be non-negative: {self.augment_counts}")
        if self.block_size < 1:
            raise ConfigError(f"block_size must be positive: {self.block_size}")
        if self.predict_scope not in ("universe", "all"):
            raise ConfigError(f"predict_scope must be universe|all: {self.predict_scope}")

    def semantic_dict(self) -> dict:
        """Fields that affect results (excludes output locations)."""
        return {
            "font_manifest": [
                {
                    "font_id": Path(p).stem,
                    "sha256": _sha256_file(p),
                }
                for p in sorted(self.font_paths, key=lambda p: Path(p).stem)
            ],
            "confusables_sha256": _sha256_file(self.confusables_path),
            "embeddings_sha256": (
                _sha256_file(self.embeddings_path) if self.embeddings_path else None
            ),
            "backend": self.backend,
            "seed": self.seed,
            "assign_threshold": self.assign_threshold,
            "merge_mean_threshold": self.merge_mean_threshold,
            "merge_var_threshold": self.merge_var_threshold,
            "alpha": self.alpha,
            "n_pairs": self.n_pairs,
            "augment_counts": list(self.augment_counts),
            "block_size": self.block_size,
            "predict_scope": self.predict_scope,
            "sheet_count": self.sheet_count,
            "render_codepoints": list(self.render_codepoints),
        }

    def fingerprint(self, command: str) -> str:
        payload = {"command": command, "config": self.semantic_dict()}
        canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
