"""UNet-lite generator and PatchGAN-lite discriminator.

The generator is an hourglass: ``depth`` stride-2 conv stages down, the
mirror image up via nearest-neighbor upsampling with skip concatenation,
then a 1x1 projection to the 2^k code channels and a classification head.
Both heads (plain per-pixel softmax, or the code-correlation head) are
parameter-free, so swapping them never changes the trainable parameter
count.

The discriminator is a stack of stride-2 convolutions ending in a 1-channel
sigmoid map; each output cell scores one receptive-field patch of its input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..codes import Codebook, sylvester
from ..errors import ConfigError, ShapeError
from . import autodiff as ad

HEAD_ONE_HOT = "one_hot"
HEAD_HADAMARD = "hadamard"

_KERNEL = 3


@dataclass(frozen=True)
class GeneratorConfig:
    input_channels: int = 3
    depth: int = 3
    base_channels: int = 16
    code_bits: int = 3
    head: str = HEAD_HADAMARD

    def __post_init__(self) -> None:
        if self.depth < 1:
            raise ConfigError(f"generator depth must be >= 1, got {self.depth}")
        if self.base_channels < 1 or self.input_channels < 1:
            raise ConfigError("channel counts must be >= 1")
        if not 0 <= self.code_bits <= 16:
            raise ConfigError(f"code_bits must be in [0, 16], got {self.code_bits}")
        if self.head not in (HEAD_ONE_HOT, HEAD_HADAMARD):
            raise ConfigError(f"unknown head {self.head!r}")

    @property
    def output_channels(self) -> int:
        return 2**self.code_bits


@dataclass(frozen=True)
class DiscriminatorConfig:
    layers: int = 3
    base_channels: int = 16

    def __post_init__(self) -> None:
        if self.layers < 1:
            raise ConfigError(f"discriminator needs >= 1 layers, got {self.layers}")
        if self.base_channels < 1:
            raise ConfigError("base_channels must be >= 1")


@dataclass(frozen=True)
class ReceptiveField:
    """Analytic receptive field of one discriminator output cell.

    Output cell i (per axis) sees input pixels [i*stride - offset,
    i*stride - offset + size - 1], clipped to the image.
    """

    size: int
    stride: int
    offset: int

    def window(self, i: int) -> tuple[int, int]:
        start = i * self.stride - self.offset
        return start, start + self.size - 1


def receptive_field(cfg: DiscriminatorConfig) -> ReceptiveField:
    """Standard recurrence r <- r + (k-1)*jump over the conv stack."""
    size, jump, offset = 1, 1, 0
    pad = _KERNEL // 2
    for stride in [2] * cfg.layers + [1]:  # stride-2 stack plus the 1-channel head
        offset += pad * jump
        size += (_KERNEL - 1) * jump
        jump *= stride
    return ReceptiveField(size=size, stride=jump, offset=offset)


def _init_conv(rng: np.random.Generator, cin: int, cout: int, k: int = _KERNEL):
    # Fan-in-scaled uniform init; biases start at zero.
    bound = 1.0 / np.sqrt(k * k * cin)
    w = rng.uniform(-bound, bound, size=(k, k, cin, cout))
    b = np.zeros(cout)
    return w, b


class Generator:
    """Weights plus a forward pass producing (probability map, code map)."""

    def __init__(self, cfg: GeneratorConfig, seed: int | np.random.SeedSequence = 0):
        self.cfg = cfg
        self.codebook: Codebook = sylvester(cfg.code_bits)
        rng = np.random.default_rng(seed)
        self.parameters: dict[str, ad.Parameter] = {}

        def add(name: str, cin: int, cout: int, k: int = _KERNEL) -> None:
            w, b = _init_conv(rng, cin, cout, k)
            self.parameters[f"{name}.w"] = ad.Parameter(f"{name}.w", w)
            self.parameters[f"{name}.b"] = ad.Parameter(f"{name}.b", b)

        base = cfg.base_channels
        for d in range(cfg.depth):
            cin = cfg.input_channels if d == 0 else base * 2 ** (d - 1)
            add(f"enc{d}", cin, base * 2**d)
        for d in range(cfg.depth):
            up_ch = base * 2 ** (cfg.depth - 1) if d == cfg.depth - 1 else base * 2**d
            skip_ch = cfg.input_channels if d == 0 else base * 2 ** (d - 1)
            out_ch = base if d == 0 else base * 2 ** (d - 1)
            add(f"dec{d}", up_ch + skip_ch, out_ch)
        add("out", base, cfg.output_channels, k=1)

    def parameter_count(self) -> int:
        return sum(p.value.size for p in self.parameters.values())

    def _p(self, name: str) -> ad.Parameter:
        return self.parameters[name]

    def forward(self, x) -> tuple[ad.Node, ad.Node]:
        """Returns (y_hat, y_c): per-pixel probabilities and pre-head codes."""
        x = ad.as_node(x)
        if x.value.ndim != 4 or x.value.shape[3] != self.cfg.input_channels:
            raise ShapeError(
                f"expected [B, H, W, {self.cfg.input_channels}] input, "
                f"got {x.value.shape}"
            )
        height, width = x.value.shape[1], x.value.shape[2]
        factor = 2**self.cfg.depth
        if height % factor or width % factor:
            raise ShapeError(
                f"input {height}x{width} not divisible by 2^depth = {factor}"
            )

        skips = [x]  # skips[d] lives at resolution H / 2^d
        h = x
        for d in range(self.cfg.depth):
            h = ad.leaky_relu(ad.conv2d(h, self._p(f"enc{d}.w"), self._p(f"enc{d}.b"), stride=2))
            if d < self.cfg.depth - 1:
                skips.append(h)
        for d in reversed(range(self.cfg.depth)):
            h = ad.nearest_upsample_2x(h)
            h = ad.channel_concat(h, skips[d])
            h = ad.relu(ad.conv2d(h, self._p(f"dec{d}.w"), self._p(f"dec{d}.b"), stride=1))
        y_c = ad.conv2d(h, self._p("out.w"), self._p("out.b"), stride=1)
        if self.cfg.head == HEAD_HADAMARD:
            y_hat = ad.hadamard_head(y_c, self.codebook)
        else:
            y_hat = ad.per_pixel_softmax(y_c)
        return y_hat, y_c


class Discriminator:
    """Conditional patch discriminator over channel-concatenated pairs."""

    def __init__(
        self,
        cfg: DiscriminatorConfig,
        input_channels: int,
        seed: int | np.random.SeedSequence = 0,
    ):
        if input_channels < 1:
            raise ConfigError("discriminator input_channels must be >= 1")
        self.cfg = cfg
        self.input_channels = input_channels
        self.rf = receptive_field(cfg)
        rng = np.random.default_rng(seed)
        self.parameters: dict[str, ad.Parameter] = {}

        def add(name: str, cin: int, cout: int) -> None:
            w, b = _init_conv(rng, cin, cout)
            self.parameters[f"{name}.w"] = ad.Parameter(f"{name}.w", w)
            self.parameters[f"{name}.b"] = ad.Parameter(f"{name}.b", b)

        for layer in range(cfg.layers):
            cin = input_channels if layer == 0 else cfg.base_channels * 2 ** (layer - 1)
            add(f"d{layer}", cin, cfg.base_channels * 2**layer)
        add("out", cfg.base_channels * 2 ** (cfg.layers - 1), 1)

    def parameter_count(self) -> int:
        return sum(p.value.size for p in self.parameters.values())

    def forward(self, xy) -> ad.Node:
        """Patch probability map alpha, shape [B, h, w, 1], entries in (0, 1)."""
        h = ad.as_node(xy)
        if h.value.ndim != 4 or h.value.shape[3] != self.input_channels:
            raise ShapeError(
                f"expected [B, H, W, {self.input_channels}] input, got {h.value.shape}"
            )
        size = min(h.value.shape[1], h.value.shape[2])
        if self.rf.size > size:
            raise ConfigError(
                f"receptive field {self.rf.size} exceeds input size {size}"
            )
        for layer in range(self.cfg.layers):
            h = ad.leaky_relu(
                ad.conv2d(h, self.parameters[f"d{layer}.w"], self.parameters[f"d{layer}.b"], stride=2)
            )
        logits = ad.conv2d(h, self.parameters["out.w"], self.parameters["out.b"], stride=1)
        return ad.sigmoid(logits)


def build_generator(cfg: GeneratorConfig, seed: int | np.random.SeedSequence = 0) -> Generator:
    return Generator(cfg, seed=seed)


def build_discriminator(
    cfg: DiscriminatorConfig,
    input_channels: int,
    seed: int | np.random.SeedSequence = 0,
    input_size: int | None = None,
) -> Discriminator:
    """Build the patch discriminator; reject configs whose receptive field
    cannot fit ``input_size`` when the caller knows it up front."""
    if input_size is not None:
        rf = receptive_field(cfg)
        min_spatial = 2**cfg.layers
        if rf.size > input_size:
            raise ConfigError(
                f"receptive field {rf.size} exceeds input size {input_size}"
            )
        if input_size % min_spatial:
            raise ConfigError(
                f"input size {input_size} not divisible by 2^layers = {min_spatial}"
            )
    return Discriminator(cfg, input_channels=input_channels, seed=seed)
