"""File formats: CSV datasets and predictions, binary models, flat configs.

CSV floats use shortest round-trip decimal formatting, so write-then-read
is the identity; model files are raw little-endian float64 with a byte
checksum, so persistence is bit exact.  All text is UTF-8 with LF line
endings and files are written deterministically.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .datasets import DatasetSpec
from .errors import ChecksumError, DataFormatError, ValidationError
from .mlp import MlpModel
from .simplex import validate_simplex
from .train import EnsembleArtifact, TrainConfig

MODEL_MAGIC = b"CREDRO1"
ENSEMBLE_META = "ensemble.json"


def _fmt(value: float) -> str:
    return repr(float(value))


def _lines_of(path) -> list:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise
    return text.splitlines()


# ---------------------------------------------------------------------------
# labeled feature tables


def write_dataset(path, x: np.ndarray, y: np.ndarray) -> None:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise ValidationError("need (n, d) features and (n,) labels")
    header = ",".join(f"x_{j}" for j in range(x.shape[1])) + ",label"
    rows = [header]
    for i in range(x.shape[0]):
        rows.append(",".join(_fmt(v) for v in x[i]) + f",{int(y[i])}")
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")


def read_dataset(path):
    lines = _lines_of(path)
    if not lines:
        raise DataFormatError(f"{path}: empty dataset file")
    header = lines[0].split(",")
    if header[-1] != "label" or any(
        name != f"x_{j}" for j, name in enumerate(header[:-1])
    ):
        raise DataFormatError(f"{path}:1: malformed header {lines[0]!r}")
    d = len(header) - 1
    if d < 1:
        raise DataFormatError(f"{path}:1: no feature columns")
    xs, ys = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != d + 1:
            raise DataFormatError(
                f"{path}:{lineno}: expected {d + 1} columns, got {len(parts)}"
            )
        try:
            xs.append([float(v) for v in parts[:-1]])
            ys.append(int(parts[-1]))
        except ValueError as exc:
            raise DataFormatError(f"{path}:{lineno}: {exc}") from exc
    if not xs:
        raise DataFormatError(f"{path}: no data rows")
    return np.array(xs, dtype=np.float64), np.array(ys, dtype=np.int64)


# ---------------------------------------------------------------------------
# per-member prediction tables


@dataclass(frozen=True, eq=False)
class Predictions:
    """Member probabilities for a set of instances.

    ``probs`` has shape (n, M, C); ``labels`` uses -1 for unlabeled
    (out-of-distribution) instances.
    """

    instance_ids: np.ndarray
    labels: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        ids = np.asarray(self.instance_ids, dtype=np.int64)
        labels = np.asarray(self.labels, dtype=np.int64)
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.ndim != 3 or ids.shape != labels.shape or ids.shape[0] != probs.shape[0]:
            raise ValidationError("inconsistent prediction array shapes")
        if probs.shape[0] == 0:
            raise ValidationError("prediction set is empty")
        if np.unique(ids).size != ids.size:
            raise ValidationError("instance ids must be unique")
        for arr in (ids, labels, probs):
            arr.setflags(write=False)
        object.__setattr__(self, "instance_ids", ids)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "probs", probs)

    @property
    def n_instances(self) -> int:
        return self.probs.shape[0]

    @property
    def n_members(self) -> int:
        return self.probs.shape[1]

    @property
    def n_classes(self) -> int:
        return self.probs.shape[2]


def write_predictions(path, pred: Predictions) -> None:
    c = pred.n_classes
    header = "instance_id,label,member," + ",".join(f"p_{k}" for k in range(c))
    rows = [header]
    for i in range(pred.n_instances):
        for m in range(pred.n_members):
            probs = ",".join(_fmt(v) for v in pred.probs[i, m])
            rows.append(f"{int(pred.instance_ids[i])},{int(pred.labels[i])},{m},{probs}")
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")


def read_predictions(path) -> Predictions:
    lines = _lines_of(path)
    if not lines:
        raise DataFormatError(f"{path}: empty prediction file")
    header = lines[0].split(",")
    if header[:3] != ["instance_id", "label", "member"] or any(
        name != f"p_{k}" for k, name in enumerate(header[3:])
    ):
        raise DataFormatError(f"{path}:1: malformed header {lines[0]!r}")
    c = len(header) - 3
    if c < 2:
        raise DataFormatError(f"{path}:1: need at least 2 probability columns")
    ids, labels, blocks = [], [], []
    seen = set()
    current_id = None
    current_rows = None

    def close_block(lineno):
        if current_id is None:
            return
        if blocks and len(current_rows) != len(blocks[0]):
            raise DataFormatError(
                f"{path}:{lineno}: instance {current_id} has {len(current_rows)} "
                f"members, expected {len(blocks[0])}"
            )
        blocks.append(current_rows)

    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != c + 3:
            raise DataFormatError(
                f"{path}:{lineno}: expected {c + 3} columns, got {len(parts)}"
            )
        try:
            inst = int(parts[0])
            label = int(parts[1])
            member = int(parts[2])
            values = [float(v) for v in parts[3:]]
        except ValueError as exc:
            raise DataFormatError(f"{path}:{lineno}: {exc}") from exc
        try:
            row = validate_simplex(values, name=f"row for instance {inst}")
        except ValidationError as exc:
            raise DataFormatError(f"{path}:{lineno}: {exc}") from exc
        if inst != current_id:
            if inst in seen:
                raise DataFormatError(
                    f"{path}:{lineno}: instance {inst} rows are not contiguous"
                )
            close_block(lineno)
            current_id = inst
            current_rows = []
            seen.add(inst)
            ids.append(inst)
            labels.append(label)
        elif label != labels[-1]:
            raise DataFormatError(
                f"{path}:{lineno}: instance {inst} label changed from "
                f"{labels[-1]} to {label}"
            )
        if member != len(current_rows):
            raise DataFormatError(
                f"{path}:{lineno}: expected member {len(current_rows)}, got {member}"
            )
        current_rows.append(np.asarray(row))
    close_block(len(lines) + 1)
    if not blocks:
        raise DataFormatError(f"{path}: no data rows")
    probs = np.array(blocks, dtype=np.float64)
    return Predictions(np.array(ids), np.array(labels), probs)


# ---------------------------------------------------------------------------
# binary model files


def _model_payload(model: MlpModel) -> bytes:
    parts = [MODEL_MAGIC, struct.pack("<I", len(model.layer_dims))]
    parts.append(struct.pack(f"<{len(model.layer_dims)}I", *model.layer_dims))
    for w, b in zip(model.weights, model.biases):
        parts.append(np.ascontiguousarray(w, dtype="<f8").tobytes())
        parts.append(np.ascontiguousarray(b, dtype="<f8").tobytes())
    return b"".join(parts)


def _byte_checksum(payload: bytes) -> int:
    return int(np.frombuffer(payload, dtype=np.uint8).sum(dtype=np.uint64))


def write_model(path, model: MlpModel) -> None:
    payload = _model_payload(model)
    Path(path).write_bytes(payload + struct.pack("<Q", _byte_checksum(payload)))


def read_model(path) -> MlpModel:
    blob = Path(path).read_bytes()
    if len(blob) < len(MODEL_MAGIC) + 4 + 8:
        raise DataFormatError(f"{path}: truncated model file ({len(blob)} bytes)")
    payload, (stored,) = blob[:-8], struct.unpack("<Q", blob[-8:])
    if payload[: len(MODEL_MAGIC)] != MODEL_MAGIC:
        raise DataFormatError(f"{path}: bad magic {payload[:7]!r}")
    if _byte_checksum(payload) != stored:
        raise ChecksumError(
            f"{path}: checksum mismatch (stored {stored}, "
            f"computed {_byte_checksum(payload)})"
        )
    offset = len(MODEL_MAGIC)
    (n_dims,) = struct.unpack_from("<I", payload, offset)
    offset += 4
    if n_dims < 2 or len(payload) < offset + 4 * n_dims:
        raise DataFormatError(f"{path}: bad dimension count {n_dims} at offset {offset}")
    dims = struct.unpack_from(f"<{n_dims}I", payload, offset)
    offset += 4 * n_dims
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        need = 8 * (fan_in * fan_out + fan_out)
        if len(payload) < offset + need:
            raise DataFormatError(
                f"{path}: truncated layer data at offset {offset} (need {need} bytes)"
            )
        w = np.frombuffer(payload, dtype="<f8", count=fan_in * fan_out, offset=offset)
        offset += 8 * fan_in * fan_out
        b = np.frombuffer(payload, dtype="<f8", count=fan_out, offset=offset)
        offset += 8 * fan_out
        weights.append(w.reshape(fan_in, fan_out))
        biases.append(b)
    if offset != len(payload):
        raise DataFormatError(f"{path}: {len(payload) - offset} trailing bytes")
    try:
        return MlpModel(dims, tuple(weights), tuple(biases))
    except ValidationError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc


# ---------------------------------------------------------------------------
# ensemble directories


def _config_to_dict(config: TrainConfig) -> dict:
    return {
        "delta_g": config.delta_g,
        "ensemble_size": config.ensemble_size,
        "batch_size": config.batch_size,
        "epochs": config.epochs,
        "learning_rate": config.learning_rate,
        "momentum": config.momentum,
        "seed": config.seed,
        "layer_dims": list(config.layer_dims) if config.layer_dims else None,
        "shuffle": config.shuffle,
    }


def _config_from_dict(data: dict) -> TrainConfig:
    dims = data.get("layer_dims")
    return TrainConfig(
        delta_g=data["delta_g"],
        ensemble_size=data["ensemble_size"],
        batch_size=data["batch_size"],
        epochs=data["epochs"],
        learning_rate=data["learning_rate"],
        momentum=data["momentum"],
        seed=data["seed"],
        layer_dims=tuple(dims) if dims else None,
        shuffle=data["shuffle"],
    )


def write_ensemble(directory, artifact: EnsembleArtifact) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    member_files = []
    for i, model in enumerate(artifact.members):
        name = f"member_{i:03d}.credro"
        write_model(directory / name, model)
        member_files.append(name)
    meta = {
        "format": "credro-ensemble-v1",
        "deltas": list(artifact.deltas),
        "config": _config_to_dict(artifact.config),
        "member_files": member_files,
        "loss_traces": [list(t) for t in artifact.loss_traces],
    }
    (directory / ENSEMBLE_META).write_text(
        json.dumps(meta, indent=1, sort_keys=True) + "\n", encoding="utf-8"
    )


def read_ensemble(directory) -> EnsembleArtifact:
    directory = Path(directory)
    meta_path = directory / ENSEMBLE_META
    try:
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{meta_path}: invalid JSON: {exc}") from exc
    if meta.get("format") != "credro-ensemble-v1":
        raise DataFormatError(f"{meta_path}: unknown format {meta.get('format')!r}")
    members = tuple(read_model(directory / name) for name in meta["member_files"])
    return EnsembleArtifact(
        members=members,
        deltas=tuple(meta["deltas"]),
        config=_config_from_dict(meta["config"]),
        loss_traces=tuple(tuple(t) for t in meta["loss_traces"]),
    )


# ---------------------------------------------------------------------------
# flat key = value config files


def parse_kv_file(path) -> dict:
    out = {}
    for lineno, raw in enumerate(_lines_of(path), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DataFormatError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise DataFormatError(f"{path}:{lineno}: empty key or value")
        if key in out:
            raise DataFormatError(f"{path}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _parse_bool(value: str, key: str, path) -> bool:
    low = value.lower()
    if low in ("true", "false"):
        return low == "true"
    raise DataFormatError(f"{path}: {key} must be true or false, got {value!r}")


_TRAIN_PARSERS = {
    "delta_g": float,
    "ensemble_size": int,
    "batch_size": int,
    "epochs": int,
    "learning_rate": float,
    "momentum": float,
    "seed": int,
    "layer_dims": lambda v: tuple(int(s) for s in v.split(",")),
    "shuffle": None,  # parsed specially
}


def train_config_from_file(path) -> TrainConfig:
    raw = parse_kv_file(path)
    kwargs = {}
    for key, value in raw.items():
        if key not in _TRAIN_PARSERS:
            raise DataFormatError(f"{path}: unknown training key {key!r}")
        try:
            if key == "shuffle":
                kwargs[key] = _parse_bool(value, key, path)
            else:
                kwargs[key] = _TRAIN_PARSERS[key](value)
        except ValueError as exc:
            raise DataFormatError(f"{path}: bad value for {key!r}: {exc}") from exc
    return TrainConfig(**kwargs)


_DATASET_PARSERS = {
    "kind": str,
    "n": int,
    "classes": int,
    "radius": float,
    "sigma": float,
    "seed": int,
}


def dataset_spec_from_file(path) -> DatasetSpec:
    raw = parse_kv_file(path)
    kwargs = {}
    for key, value in raw.items():
        if key not in _DATASET_PARSERS:
            raise DataFormatError(f"{path}: unknown dataset key {key!r}")
        try:
            kwargs[key] = _DATASET_PARSERS[key](value)
        except ValueError as exc:
            raise DataFormatError(f"{path}: bad value for {key!r}: {exc}") from exc
    for required in ("kind", "n"):
        if required not in kwargs:
            raise DataFormatError(f"{path}: missing required dataset key {required!r}")
    return DatasetSpec(**kwargs)


# ---------------------------------------------------------------------------
# metric CSV blocks


def write_uq_csv(path, instance_ids, labels, measure_name: str, values) -> None:
    rows = ["instance_id,label,measure,value"]
    for i, label, v in zip(instance_ids, labels, values):
        rows.append(f"{int(i)},{int(label)},{measure_name},{_fmt(v)}")
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")


def read_uq_csv(path):
    lines = _lines_of(path)
    if not lines or lines[0] != "instance_id,label,measure,value":
        raise DataFormatError(f"{path}:1: malformed uncertainty CSV header")
    ids, labels, values = [], [], []
    measure = None
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise DataFormatError(f"{path}:{lineno}: expected 4 columns")
        try:
            ids.append(int(parts[0]))
            labels.append(int(parts[1]))
            values.append(float(parts[3]))
        except ValueError as exc:
            raise DataFormatError(f"{path}:{lineno}: {exc}") from exc
        if measure is None:
            measure = parts[2]
        elif parts[2] != measure:
            raise DataFormatError(
                f"{path}:{lineno}: mixed measures {measure!r} and {parts[2]!r}"
            )
    if measure is None:
        raise DataFormatError(f"{path}: no data rows")
    return (
        np.array(ids, dtype=np.int64),
        np.array(labels, dtype=np.int64),
        measure,
        np.array(values, dtype=np.float64),
    )


def write_metric_report(path, pairs, curve_rows=None) -> None:
    """metric,value block, optionally followed by a blank line and a curve block."""
    rows = ["metric,value"]
    rows.extend(f"{key},{_fmt(v) if isinstance(v, float) else v}" for key, v in pairs)
    if curve_rows is not None:
        rows.append("")
        rows.extend(curve_rows)
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")
