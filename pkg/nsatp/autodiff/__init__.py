from .ops import (DTYPE, check_finite, linear, conv1d, conv2d, relu, softmax_rows, layer_norm, mlp_forward, mse_loss,
                  backward)
from .init import make_parameter, seeded_init_
from .checkpoint import save_checkpoint, load_checkpoint
