"""
JSON checkpoints: parameter name -> {shape, values}, plus the config that built the model
"""
import json
import os

import torch
import torch.nn as nn

from nsatp.autodiff.ops import DTYPE
from nsatp.exceptions import CheckpointError

CHECKPOINT_SCHEMA = "nsatp-ckpt/1"


def save_checkpoint(model: nn.Module, filename: str, config: dict, extra: dict = None) -> None:
    parameters = {name: {"shape": list(tensor.shape), "values": tensor.detach().reshape(-1).tolist()}
                  for name, tensor in model.state_dict().items()}
    json_data = {"schema": CHECKPOINT_SCHEMA, "config": config, "parameters": parameters}
    if extra:
        json_data["extra"] = extra
    with open(filename, "w") as f:
        json.dump(json_data, f)


def load_checkpoint(filename: str):
    """
    Returns:
        config: the config dict stored with the parameters
        state_dict: parameter name -> float64 tensor
        extra: any additional metadata stored with the checkpoint
    """
    if not os.path.exists(filename):
        raise FileNotFoundError(f"Checkpoint {filename} does not exist")
    with open(filename, "r") as f:
        try:
            json_data = json.load(f)
        except json.JSONDecodeError as ex:
            raise CheckpointError(f"{filename} is not valid JSON: {ex}") from ex
    if json_data.get("schema") != CHECKPOINT_SCHEMA:
        raise CheckpointError(f"{filename} has schema {json_data.get('schema')!r}, expected {CHECKPOINT_SCHEMA!r}")
    state_dict = {}
    for name, entry in json_data["parameters"].items():
        values = torch.tensor(entry["values"], dtype=DTYPE)
        if values.numel() != torch.Size(entry["shape"]).numel():
            raise CheckpointError(f"parameter {name} has {values.numel()} values for shape {entry['shape']}")
        state_dict[name] = values.reshape(entry["shape"])
    return json_data["config"], state_dict, json_data.get("extra", {})
