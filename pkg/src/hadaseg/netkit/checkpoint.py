"""Named-tensor checkpoints: raw little-endian float64 plus a text manifest.

A checkpoint is a directory holding ``tensors.bin`` (the concatenated raw
values) and ``manifest.txt``. The manifest starts with an identifying line,
then ``meta <key> <value>`` lines, then one ``tensor <name> <offset>
<count> <ndim> <dims...>`` line per tensor, offsets in elements.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..errors import FormatError
from .models import (
    Discriminator,
    DiscriminatorConfig,
    Generator,
    GeneratorConfig,
    build_discriminator,
    build_generator,
)

_MANIFEST = "manifest.txt"
_TENSORS = "tensors.bin"
_HEADER = "hadaseg-checkpoint 1"


def _check_token(token: str, what: str) -> str:
    token = str(token)
    if not token or any(ch.isspace() for ch in token):
        raise FormatError(f"{what} {token!r} must be a non-empty whitespace-free token")
    return token


def save_checkpoint(directory, tensors: dict[str, np.ndarray], meta: dict[str, str]) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    lines = [_HEADER]
    for key in sorted(meta):
        lines.append(f"meta {_check_token(key, 'meta key')} {_check_token(meta[key], 'meta value')}")
    offset = 0
    blobs = []
    for name in sorted(tensors):
        array = np.ascontiguousarray(tensors[name], dtype="<f8")
        dims = " ".join(str(d) for d in array.shape)
        lines.append(
            f"tensor {_check_token(name, 'tensor name')} {offset} {array.size} "
            f"{array.ndim} {dims}".rstrip()
        )
        blobs.append(array.tobytes(order="C"))
        offset += array.size
    (directory / _TENSORS).write_bytes(b"".join(blobs))
    (directory / _MANIFEST).write_text("\n".join(lines) + "\n", encoding="ascii")


def load_checkpoint(directory) -> tuple[dict[str, np.ndarray], dict[str, str]]:
    directory = Path(directory)
    manifest = directory / _MANIFEST
    if not manifest.exists():
        raise FormatError(f"{directory}: no {_MANIFEST} found")
    lines = manifest.read_text(encoding="ascii").splitlines()
    if not lines or lines[0] != _HEADER:
        raise FormatError(f"{manifest}: bad header line")
    raw = np.frombuffer((directory / _TENSORS).read_bytes(), dtype="<f8")
    tensors: dict[str, np.ndarray] = {}
    meta: dict[str, str] = {}
    for line in lines[1:]:
        if not line.strip():
            continue
        parts = line.split()
        if parts[0] == "meta" and len(parts) == 3:
            meta[parts[1]] = parts[2]
        elif parts[0] == "tensor" and len(parts) >= 4:
            try:
                name = parts[1]
                offset, count, ndim = int(parts[2]), int(parts[3]), int(parts[4])
                dims = tuple(int(d) for d in parts[5 : 5 + ndim])
            except (ValueError, IndexError) as exc:
                raise FormatError(f"{manifest}: bad tensor line {line!r}") from exc
            if len(dims) != ndim or int(np.prod(dims, dtype=np.int64)) != count:
                raise FormatError(f"{manifest}: inconsistent dims in {line!r}")
            if offset + count > raw.size:
                raise FormatError(f"{manifest}: {name} overruns the tensor blob")
            tensors[name] = raw[offset : offset + count].reshape(dims).copy()
        else:
            raise FormatError(f"{manifest}: unrecognized line {line!r}")
    return tensors, meta


def save_models(directory, gen: Generator, disc: Discriminator, num_classes: int) -> None:
    """Checkpoint both networks with enough metadata to rebuild them."""
    tensors = {f"gen.{n}": p.value for n, p in gen.parameters.items()}
    tensors.update({f"disc.{n}": p.value for n, p in disc.parameters.items()})
    meta = {
        "head": gen.cfg.head,
        "code_bits": str(gen.cfg.code_bits),
        "num_classes": str(num_classes),
        "gen.input_channels": str(gen.cfg.input_channels),
        "gen.depth": str(gen.cfg.depth),
        "gen.base_channels": str(gen.cfg.base_channels),
        "disc.layers": str(disc.cfg.layers),
        "disc.base_channels": str(disc.cfg.base_channels),
        "disc.input_channels": str(disc.input_channels),
    }
    save_checkpoint(directory, tensors, meta)


def _require(meta: dict[str, str], key: str) -> str:
    if key not in meta:
        raise FormatError(f"checkpoint metadata missing {key!r}")
    return meta[key]


def load_models(directory) -> tuple[Generator, Discriminator, dict[str, str]]:
    """Rebuild both networks from a checkpoint written by save_models."""
    tensors, meta = load_checkpoint(directory)
    gen_cfg = GeneratorConfig(
        input_channels=int(_require(meta, "gen.input_channels")),
        depth=int(_require(meta, "gen.depth")),
        base_channels=int(_require(meta, "gen.base_channels")),
        code_bits=int(_require(meta, "code_bits")),
        head=_require(meta, "head"),
    )
    disc_cfg = DiscriminatorConfig(
        layers=int(_require(meta, "disc.layers")),
        base_channels=int(_require(meta, "disc.base_channels")),
    )
    gen = build_generator(gen_cfg, seed=0)
    disc = build_discriminator(
        disc_cfg, input_channels=int(_require(meta, "disc.input_channels")), seed=0
    )
    for prefix, model in (("gen", gen), ("disc", disc)):
        for name, param in model.parameters.items():
            key = f"{prefix}.{name}"
            if key not in tensors:
                raise FormatError(f"checkpoint missing tensor {key!r}")
            stored = tensors[key]
            if stored.shape != param.value.shape:
                raise FormatError(
                    f"{key}: stored shape {stored.shape} != model shape {param.value.shape}"
                )
            param.value[...] = stored
    return gen, disc, meta
