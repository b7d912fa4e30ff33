from .representations import ActivationMatrix, GramMatrix, RDMatrix, as_activation
from .cka import gram, center_gram, hsic, linear_cka, cka_dissimilarity
from .rsa import rdm_cosine, rsa_similarity, rsa_dissimilarity
from .similarity_metrics import CkaMetric, RsaMetric, get_metric

__all__ = [
    "ActivationMatrix",
    "GramMatrix",
    "RDMatrix",
    "as_activation",
    "gram",
    "center_gram",
    "hsic",
    "linear_cka",
    "cka_dissimilarity",
    "rdm_cosine",
    "rsa_similarity",
    "rsa_dissimilarity",
    "CkaMetric",
    "RsaMetric",
    "get_metric",
]
