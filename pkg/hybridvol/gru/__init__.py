from .cell import LayerWeights, cell_backward, cell_forward, cell_step
from .network import (GruConfig, GruWeights, backward_batch, forward_batch,
                      init_weights, network_forward, predict)
from .serialization import load_weights, save_weights
from .training import (Adam, TrainingHistory, TrainingSet, loss,
                       loss_and_gradients, train)
