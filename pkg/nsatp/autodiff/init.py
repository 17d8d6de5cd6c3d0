"""
Reproducible parameter creation: every parameter gets its own random stream derived from the
model seed and the parameter's name, so models that share a backbone share its weights.
"""
import math
import zlib

import torch
import torch.nn as nn

from nsatp.autodiff.ops import DTYPE


def make_parameter(*shape: int, fan_in: int = None, init: str = "uniform") -> nn.Parameter:
    """
    Args:
        shape: parameter shape
        fan_in: inputs feeding one output; defaults to the product of all but the last axis
        init: "uniform" (+-1/sqrt(fan_in)), "zeros" or "ones"
    """
    if fan_in is None:
        fan_in = math.prod(shape[:-1]) if len(shape) > 1 else shape[0]
    fan_in = max(1, fan_in)
    if init == "zeros":
        data = torch.zeros(*shape, dtype=DTYPE)
    elif init == "ones":
        data = torch.ones(*shape, dtype=DTYPE)
    else:
        bound = 1.0 / math.sqrt(fan_in)
        data = torch.empty(*shape, dtype=DTYPE).uniform_(-bound, bound)
    param = nn.Parameter(data)
    param.fan_in = fan_in
    param.init = init
    return param


def parameter_generator(seed: int, name: str) -> torch.Generator:
    generator = torch.Generator()
    generator.manual_seed((int(seed) * 1000003 + zlib.crc32(name.encode())) % (2 ** 63))
    return generator


def seeded_init_(module: nn.Module, seed: int, respect_init: bool = True) -> nn.Module:
    """
    Initialises every parameter of ``module`` from its (seed, name) stream. With
    respect_init=False zero/one initialisations are replaced by random draws as well.
    """
    with torch.no_grad():
        for name, param in module.named_parameters():
            init = getattr(param, "init", "uniform") if respect_init else "uniform"
            if init == "zeros":
                param.zero_()
            elif init == "ones":
                param.fill_(1.0)
            else:
                bound = 1.0 / math.sqrt(getattr(param, "fan_in", param.shape[0]))
                param.uniform_(-bound, bound, generator=parameter_generator(seed, name))
    return module
