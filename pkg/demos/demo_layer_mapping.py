# demo_layer_mapping.py
"""Which target tap each guide tap is compared against."""
from guidance_lab.application.services.guidance_service import compute_layer_mapping
from guidance_lab.infrastructure.config import NetworkSpec
from guidance_lab.infrastructure.networks import build_network
from guidance_lab.shared.core import RngState

for t, l in ((4, 2), (5, 3), (7, 1), (9, 5)):
    print(f"t={t} l={l}: {compute_layer_mapping(t, l).pairs}")

target = build_network(NetworkSpec(family="fcn", depth=8, width=64, classes=10, input_shape=[3, 16, 16]), RngState(0))
guide = build_network(NetworkSpec(family="res_cnn", depth=4, width=16, classes=10, input_shape=[3, 16, 16]), RngState(1))
mapping = compute_layer_mapping(len(target.tap_list), len(guide.tap_list))
for j, i in mapping.pairs:
    print(f"  guide {guide.tap_list[j]:>10} -> target {target.tap_list[i]}")
