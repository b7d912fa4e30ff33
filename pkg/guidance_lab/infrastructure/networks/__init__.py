from .base import BufferSpec, Network, ParamSpec
from .cnn import ConvNetwork
from .fcn import FullyConnectedNetwork
from .rnn import RecurrentStack
from .transformer import TransformerNetwork
from .vit import PatchViT
from .zoo import (
    NETWORK_CLASSES,
    NetworkState,
    build_network,
    count_params,
    forward_with_taps,
    init_params,
    network_class,
    restore_network,
)

__all__ = [
    "BufferSpec",
    "Network",
    "ParamSpec",
    "ConvNetwork",
    "FullyConnectedNetwork",
    "RecurrentStack",
    "TransformerNetwork",
    "PatchViT",
    "NETWORK_CLASSES",
    "NetworkState",
    "build_network",
    "count_params",
    "forward_with_taps",
    "init_params",
    "network_class",
    "restore_network",
]
