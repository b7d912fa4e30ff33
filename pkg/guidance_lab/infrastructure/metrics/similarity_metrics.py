"""
Metric adapters implementing ``DissimilarityMetric`` for the guidance loss.
"""
from __future__ import annotations

from guidance_lab.application.interfaces.metric_interface import DissimilarityMetric
from guidance_lab.domain.value_objects import MetricName
from guidance_lab.infrastructure.metrics.cka import cka_dissimilarity, linear_cka
from guidance_lab.infrastructure.metrics.representations import ActivationMatrix
from guidance_lab.infrastructure.metrics.rsa import rsa_dissimilarity, rsa_similarity
from guidance_lab.shared.core import Tensor


class CkaMetric(DissimilarityMetric):
    name = MetricName.CKA
    bounded_unit_interval = True

    def similarity(self, r: ActivationMatrix, r_prime: ActivationMatrix) -> Tensor:
        return linear_cka(r, r_prime)

    def dissimilarity(self, r: ActivationMatrix, r_prime: ActivationMatrix) -> Tensor:
        return cka_dissimilarity(r, r_prime)


class RsaMetric(DissimilarityMetric):
    name = MetricName.RSA
    bounded_unit_interval = False

    def similarity(self, r: ActivationMatrix, r_prime: ActivationMatrix) -> Tensor:
        return rsa_similarity(r, r_prime)

    def dissimilarity(self, r: ActivationMatrix, r_prime: ActivationMatrix) -> Tensor:
        return rsa_dissimilarity(r, r_prime)


_METRICS = {MetricName.CKA: CkaMetric, MetricName.RSA: RsaMetric}


def get_metric(name: MetricName | str) -> DissimilarityMetric:
    return _METRICS[MetricName(name)]()
