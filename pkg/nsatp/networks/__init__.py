from .predictor import BackboneConfig, ArrivalPredictor, Predictor
from .compensation import CompensationFactors, SwinCompensation
from .cnn import CnnModelConfig, CnnArrivalModel, Cnn2dBlock
from .swin import SwinModelConfig, SwinArrivalModel, destationary_attention, window_partition, window_combine
from .revin import RevIN, revin_variant
from .baselines import PersistenceBaseline, ScheduleOnlyBaseline
