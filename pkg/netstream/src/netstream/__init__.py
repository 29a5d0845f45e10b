"""Toy-scale double-stream convolutional network for person-pair inputs.

Two independent five-stage conv streams (one per person crop) feed shared
dense layers; the last hidden activation is exportable as a pair feature
block in the core pipeline's TSV format.
"""

__version__ = "0.1.0"

from .data import bright_side_dataset, load_pair_images, save_pair_images
from .errors import NetstreamError, ShapeError, TrainError
from .export import export_fc7
from .gradcheck import parameter_group_errors
from .net import DoubleStreamNet, NetSpec
from .train import accuracy, train_toy
