"""
Checkpoint files.

Layout::

    b"NDSQ1"
    uint64 little-endian header length
    UTF-8 JSON header: config, vocabulary, manifest [{name, shape, dtype}], batch
    arrays in manifest order, little-endian, C order
"""

import json
import os
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
from pydantic import ValidationError

from config.schema import ModelConfig
from controller.parameters import ParameterSet, parameter_shapes
from core.exceptions import CheckpointError
from seqmodel.model import TransductionModel
from seqmodel.vocabulary import Vocabulary
from utils.logger import get_logger

logger = get_logger(__name__)

MAGIC = b"NDSQ1"
_LENGTH = struct.Struct("<Q")
_DTYPES = {"float64": "<f8", "float32": "<f4"}


@dataclass(frozen=True, eq=False)
class Checkpoint:
    model: TransductionModel
    batch: int
    extra: Dict[str, Any]


def save_checkpoint(path: Union[str, Path], model: TransductionModel, batch: int,
                    extra: Optional[Dict[str, Any]] = None) -> Path:
    """Write ``model`` to ``path``; the file is replaced atomically."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    manifest = [{"name": name, "shape": list(array.shape), "dtype": array.dtype.name}
                for name, array in model.params.items()]
    header = {
        "config": model.config.model_dump(mode="json"),
        "vocabulary": model.vocab.to_dict(),
        "manifest": manifest,
        "batch": int(batch),
    }
    if extra:
        header["extra"] = extra
    blob = json.dumps(header, sort_keys=True).encode("utf-8")

    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as f:
        f.write(MAGIC)
        f.write(_LENGTH.pack(len(blob)))
        f.write(blob)
        for entry, (_, array) in zip(manifest, model.params.items()):
            f.write(np.ascontiguousarray(array, dtype=_DTYPES[entry["dtype"]]).tobytes())
    os.replace(tmp, path)
    logger.debug(f"Saved checkpoint {path}", extra={"context": {"batch": batch}})
    return path


def load_checkpoint(path: Union[str, Path]) -> Checkpoint:
    """
    Read a checkpoint written by ``save_checkpoint``.

    Raises:
        CheckpointError: for a missing file, bad magic, a malformed header,
            a manifest that does not match the configuration, or truncation
    """
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise CheckpointError(f"cannot read checkpoint {path}: {e}") from e
    if not data.startswith(MAGIC):
        raise CheckpointError(f"{path} is not an NDSQ checkpoint")
    offset = len(MAGIC)
    if len(data) < offset + _LENGTH.size:
        raise CheckpointError(f"{path} is truncated")
    (length,) = _LENGTH.unpack_from(data, offset)
    offset += _LENGTH.size
    try:
        header = json.loads(data[offset:offset + length].decode("utf-8"))
        config = ModelConfig(**header["config"])
        vocab = Vocabulary.from_dict(header["vocabulary"])
        manifest = header["manifest"]
        batch = int(header["batch"])
    except (ValueError, KeyError, TypeError, ValidationError) as e:
        raise CheckpointError(f"{path} has a malformed header: {e}") from e
    offset += length

    expected = parameter_shapes(config)
    if [m["name"] for m in manifest] != list(expected):
        raise CheckpointError(f"{path} manifest does not match its configuration")

    params = ParameterSet()
    for entry in manifest:
        shape = tuple(entry["shape"])
        if shape != expected[entry["name"]] or entry["dtype"] not in _DTYPES:
            raise CheckpointError(f"{path}: bad manifest entry for {entry['name']}")
        dtype = np.dtype(_DTYPES[entry["dtype"]])
        nbytes = int(np.prod(shape)) * dtype.itemsize
        if offset + nbytes > len(data):
            raise CheckpointError(f"{path} is truncated at {entry['name']}")
        array = np.frombuffer(data, dtype=dtype, count=int(np.prod(shape)), offset=offset)
        params[entry["name"]] = array.reshape(shape).astype(entry["dtype"])
        offset += nbytes
    if offset != len(data):
        raise CheckpointError(f"{path} has {len(data) - offset} trailing bytes")

    return Checkpoint(TransductionModel(config, vocab, params), batch, header.get("extra", {}))
