"""
Non-learned reference predictors
"""
import torch

from nsatp.networks.predictor import Predictor, as_batch
from nsatp.transit.sample import DELAY_CHANNEL


class PersistenceBaseline(Predictor):
    """
    Repeats the last observed delay at every future stop
    """

    def forward(self, batch: dict) -> dict:
        batch, single = as_batch(batch)
        schedule = batch["future_schedule"]
        delay = batch["past_features"][..., -1, DELAY_CHANNEL, None].expand_as(schedule).clone()
        out = {"delay": delay, "arrival": schedule + delay}
        return {name: value[0] for name, value in out.items()} if single else out


class ScheduleOnlyBaseline(Predictor):
    """
    Predicts the published schedule, i.e. zero delay everywhere
    """

    def forward(self, batch: dict) -> dict:
        batch, single = as_batch(batch)
        schedule = batch["future_schedule"]
        delay = torch.zeros_like(schedule)
        out = {"delay": delay, "arrival": schedule + delay}
        return {name: value[0] for name, value in out.items()} if single else out
