import json
import logging
import os

from nsatp.harness.config import load_config
from nsatp.harness.data import simulate_dataset
from nsatp.harness.diagnostics import compare_compensation

logging.basicConfig(level=logging.INFO)

out_dir = "runs/compensation_benefit"
os.makedirs(out_dir, exist_ok=True)
for config_file in ("devtools/configs/cnn.toml", "devtools/configs/swin.toml"):
    config = load_config(config_file)
    for n_future in (5, 10):
        config = config.with_overrides(n_future=n_future)
        comparison = compare_compensation(config, simulate_dataset(config), seeds=range(5))
        print(comparison)
        with open(os.path.join(out_dir, f"{comparison.backbone}_{n_future}.json"), "w") as f:
            json.dump(comparison.to_json(), f, indent=2)
