"""Layer stacks for the generators, discriminators and feature extractor.

Architecture (desk-scale stand-in for the Johnson-style networks):

* generator: ``[conv k4 s2 -> IN -> relu] x 2`` (8, 16 ch), two residual
  blocks, ``[conv_transpose k4 s2 -> IN -> relu] x 2``, ``1x1 conv`` and
  a sigmoid so outputs land in ``[0, 1]``.
* discriminator: ``[conv k4 s2 -> leaky_relu(0.2)] x 3`` (8, 16, 32 ch),
  a ``1x1 conv`` to one channel and a global mean.  The hinge variant
  stops there; the nsgan variant appends a sigmoid.  The three leaky-relu
  outputs are the feature-matching taps.
* feature extractor: three frozen random ``conv -> relu`` stages whose relu
  outputs feed the perceptual and style losses.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .layers import (
    Conv2d,
    ConvTranspose2d,
    GlobalMean,
    InstanceNorm,
    Layer,
    LeakyReLU,
    ReLU,
    ResidualBlock,
    Sigmoid,
    StaleCacheError,
)

ROLES = ("edge_generator", "completion_generator", "discriminator", "feature_extractor")


def _walk(layers):
    for layer in layers:
        yield layer
        yield from _walk(layer.sublayers())


@dataclass
class ToyNetwork:
    layers: list[Layer]
    role: str
    arch: dict = field(default_factory=dict)
    taps: tuple[int, ...] = ()
    frozen: bool = False

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"unknown role {self.role!r}")
        self._outputs: list[np.ndarray] | None = None

    # -- evaluation -----------------------------------------------------------
    def forward(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        in_ch = self.arch.get("in_ch")
        if in_ch is not None and (x.ndim != 4 or x.shape[1] != in_ch):
            raise ValueError(f"{self.role} expects (N, {in_ch}, H, W) input, got {x.shape}")
        outs = []
        for layer in self.layers:
            x = layer.forward(x)
            outs.append(x)
        self._outputs = outs
        return x

    __call__ = forward

    def features(self) -> list[np.ndarray]:
        """Outputs of the tap layers from the latest forward pass."""
        if self._outputs is None:
            raise StaleCacheError("no forward pass recorded")
        return [self._outputs[i] for i in self.taps]

    def backward(self, output_grad, tap_grads=None, param_grads: bool | None = None) -> np.ndarray:
        """Reverse-mode pass; returns the gradient with respect to the input.

        *tap_grads* optionally injects extra gradients at the tap outputs (in
        tap order).  Parameter gradients are accumulated unless the network
        is frozen or *param_grads* is False.
        """
        if self._outputs is None:
            raise StaleCacheError(f"{self.role}: backward without a fresh forward")
        if param_grads is None:
            param_grads = not self.frozen
        extra = {}
        if tap_grads is not None:
            if len(tap_grads) != len(self.taps):
                raise ValueError("one gradient per tap expected")
            extra = {i: g for i, g in zip(self.taps, tap_grads) if g is not None}
        g = np.zeros_like(self._outputs[-1]) if output_grad is None else np.asarray(output_grad, dtype=np.float64)
        for i in range(len(self.layers) - 1, -1, -1):
            if i in extra:
                g = g + extra[i]
            g = self.layers[i].backward(g, param_grads)
        self._outputs = None
        return g

    # -- parameters -----------------------------------------------------------
    def parameters(self):
        """``(name, value, grad)`` triples in a fixed order."""
        out = []
        for li, layer in enumerate(_walk(self.layers)):
            for key in sorted(layer.params):
                out.append((f"{li}.{layer.kind}.{key}", layer.params[key], layer.grads[key]))
        return out

    def zero_grad(self) -> None:
        for layer in _walk(self.layers):
            layer.zero_grad()

    def num_params(self) -> int:
        return int(sum(p.size for _, p, _ in self.parameters()))

    def get_flat(self) -> np.ndarray:
        ps = [p.ravel() for _, p, _ in self.parameters()]
        return np.concatenate(ps) if ps else np.zeros(0)

    def set_flat(self, flat: np.ndarray) -> None:
        pos = 0
        for _, p, _ in self.parameters():
            n = p.size
            p[...] = np.asarray(flat[pos:pos + n], dtype=np.float64).reshape(p.shape)
            pos += n
        if pos != len(flat):
            raise ValueError(f"expected {pos} parameters, got {len(flat)}")

    def is_all_zero(self) -> bool:
        return all(not np.any(p) for _, p, _ in self.parameters())


# -- factories -----------------------------------------------------------------

def make_generator(in_ch: int, out_ch: int, widths=(8, 16), n_res: int = 2,
                   rng: np.random.Generator | None = None, role: str = "edge_generator",
                   init_std: float = 0.02) -> ToyNetwork:
    rng = rng if rng is not None else np.random.default_rng(0)
    w1, w2 = widths
    layers: list[Layer] = [
        Conv2d(in_ch, w1, 4, 2, 1, rng=rng, init_std=init_std), InstanceNorm(), ReLU(),
        Conv2d(w1, w2, 4, 2, 1, rng=rng, init_std=init_std), InstanceNorm(), ReLU(),
    ]
    layers += [ResidualBlock(w2, rng=rng, init_std=init_std) for _ in range(n_res)]
    layers += [
        ConvTranspose2d(w2, w1, 4, 2, 1, rng=rng, init_std=init_std), InstanceNorm(), ReLU(),
        ConvTranspose2d(w1, w1, 4, 2, 1, rng=rng, init_std=init_std), InstanceNorm(), ReLU(),
        Conv2d(w1, out_ch, 1, 1, 0, rng=rng, init_std=init_std),
        Sigmoid(),
    ]
    arch = {"kind": "generator", "in_ch": in_ch, "out_ch": out_ch, "widths": list(widths),
            "n_res": n_res, "role": role}
    return ToyNetwork(layers, role, arch)


def make_discriminator(in_ch: int, widths=(8, 16, 32), output: str = "linear",
                       rng: np.random.Generator | None = None,
                       init_std: float = 0.02) -> ToyNetwork:
    if output not in ("linear", "sigmoid"):
        raise ValueError("output must be 'linear' or 'sigmoid'")
    rng = rng if rng is not None else np.random.default_rng(0)
    layers: list[Layer] = []
    taps = []
    c = in_ch
    for w in widths:
        layers += [Conv2d(c, w, 4, 2, 1, rng=rng, init_std=init_std), LeakyReLU(0.2)]
        taps.append(len(layers) - 1)
        c = w
    layers += [Conv2d(c, 1, 1, 1, 0, rng=rng, init_std=init_std), GlobalMean()]
    if output == "sigmoid":
        layers.append(Sigmoid())
    arch = {"kind": "discriminator", "in_ch": in_ch, "widths": list(widths), "output": output,
            "role": "discriminator"}
    return ToyNetwork(layers, "discriminator", arch, taps=tuple(taps))


def make_feature_extractor(in_ch: int = 3, widths=(8, 16, 16), seed: int = 1234) -> ToyNetwork:
    """Frozen random conv stack; He-scaled so activations keep unit scale."""
    rng = np.random.default_rng(seed)
    strides = (1, 2, 2)
    layers: list[Layer] = []
    taps = []
    c = in_ch
    for w, s in zip(widths, strides):
        k = 3 if s == 1 else 4
        std = float(np.sqrt(2.0 / (c * k * k)))
        layers += [Conv2d(c, w, k, s, 1, rng=rng, init_std=std), ReLU()]
        taps.append(len(layers) - 1)
        c = w
    arch = {"kind": "feature_extractor", "in_ch": in_ch, "widths": list(widths), "seed": seed,
            "role": "feature_extractor"}
    return ToyNetwork(layers, "feature_extractor", arch, taps=tuple(taps), frozen=True)


def build_from_arch(arch: dict) -> ToyNetwork:
    """Rebuild an (untrained) network from its ``arch`` record."""
    kind = arch["kind"]
    if kind == "generator":
        return make_generator(arch["in_ch"], arch["out_ch"], tuple(arch["widths"]), arch["n_res"],
                              role=arch["role"])
    if kind == "discriminator":
        return make_discriminator(arch["in_ch"], tuple(arch["widths"]), arch["output"])
    if kind == "feature_extractor":
        return make_feature_extractor(arch["in_ch"], tuple(arch["widths"]), arch["seed"])
    raise ValueError(f"unknown architecture kind {kind!r}")


def check_shape_algebra(net: ToyNetwork, h: int, w: int) -> tuple[int, int]:
    """Walk spatial shapes through *net*; raise if a stage does not fit."""
    for layer in net.layers:
        if isinstance(layer, (Conv2d, ConvTranspose2d)):
            nh, nw = layer.out_shape(h, w)
            if nh < 1 or nw < 1:
                raise ValueError(f"{layer.kind} collapses {h}x{w}")
            h, w = nh, nw
    return h, w
