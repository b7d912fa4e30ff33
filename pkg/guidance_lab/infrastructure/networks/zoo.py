"""
Network zoo: spec -> parameters -> network.
"""
from __future__ import annotations

from typing import Any, Dict, Mapping, Optional, Type

import numpy as np

from guidance_lab.domain.exceptions import SpecError
from guidance_lab.domain.value_objects import NetworkFamily
from guidance_lab.infrastructure.config.schemas import NetworkSpec
from guidance_lab.infrastructure.networks.base import Network
from guidance_lab.infrastructure.networks.cnn import ConvNetwork
from guidance_lab.infrastructure.networks.fcn import FullyConnectedNetwork
from guidance_lab.infrastructure.networks.rnn import RecurrentStack
from guidance_lab.infrastructure.networks.transformer import TransformerNetwork
from guidance_lab.infrastructure.networks.vit import PatchViT
from guidance_lab.shared.core import RngState, Tensor, get_default_dtype
from guidance_lab.shared.helpers.logging_utils import get_logger

logger = get_logger(__name__)

NETWORK_CLASSES: Dict[NetworkFamily, Type[Network]] = {
    NetworkFamily.FCN: FullyConnectedNetwork,
    NetworkFamily.PLAIN_CNN: ConvNetwork,
    NetworkFamily.RES_CNN: ConvNetwork,
    NetworkFamily.RNN_STACK: RecurrentStack,
    NetworkFamily.TRANSFORMER_ENCODER: TransformerNetwork,
    NetworkFamily.TRANSFORMER_DECODER: TransformerNetwork,
    NetworkFamily.PATCH_VIT: PatchViT,
}


def network_class(spec: NetworkSpec) -> Type[Network]:
    try:
        return NETWORK_CLASSES[spec.family]
    except KeyError as exc:
        raise SpecError(f"no network for family {spec.family}") from exc


def init_params(spec: NetworkSpec, rng: RngState, dtype: Any = None) -> Dict[str, Tensor]:
    """Fresh parameters in declaration order; draws come only from ``rng``."""
    dtype = np.dtype(dtype or get_default_dtype())
    return {
        ps.name: Tensor(ps.initialize(rng, dtype), requires_grad=True, dtype=dtype, name=ps.name)
        for ps in network_class(spec).param_specs(spec)
    }


def build_network(spec: NetworkSpec, rng: RngState, dtype: Any = None) -> Network:
    net = network_class(spec)(spec, init_params(spec, rng, dtype))
    logger.debug(f"built {net!r} with taps {net.tap_list}")
    return net


def restore_network(
    spec: NetworkSpec,
    arrays: Mapping[str, np.ndarray],
    buffers: Optional[Mapping[str, np.ndarray]] = None,
    dtype: Any = None,
) -> Network:
    """Rebuild a network from stored parameter arrays (checkpoint load)."""
    dtype = np.dtype(dtype or get_default_dtype())
    params = {
        name: Tensor(np.asarray(value, dtype=dtype), requires_grad=True, dtype=dtype, name=name)
        for name, value in arrays.items()
    }
    return network_class(spec)(spec, params, buffers)


def count_params(net: Network) -> int:
    return net.count_params()


def forward_with_taps(net: Network, batch: Any, batch_id: Optional[int] = None):
    """Forward a ``Batch`` (or raw inputs) and capture the tap activations."""
    inputs = getattr(batch, "inputs", batch)
    pad_mask = getattr(batch, "pad_mask", None)
    return net.forward_with_taps(inputs, pad_mask, batch_id=batch_id)


# network instances carry the whole NetworkState (spec, params, taps, mode)
NetworkState = Network
