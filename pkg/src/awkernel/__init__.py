"""Anonymous-walk and random-walk graph kernels with Nystrom feature maps.

Typical use::

    from awkernel import EmbedConfig, GSKN, load_tu_dataset
    coll = load_tu_dataset("data/MUTAG")
    model = GSKN(EmbedConfig()).fit(coll.graphs)
    x = model.embed_graphs(coll.graphs)
"""

from .classify import EvalReport, FoldPlan, cross_validate, fit_linear, node_classification_eval, \
    stratified_folds
from .featuremaps import GSKN, EmbedConfig, EmbeddingMatrix, LandmarkSet, inv_sqrt_psd, project
from .graph import DatasetError, Graph, GraphCollection, degree_attributes, load_tu_dataset, \
    validate, with_degree_attributes, write_tu_dataset
from .landmarks import KMeansResult, kmeans
from .oracle import exact_awgk, exact_path_kernel, exact_rwgk, wl_equivalent, wl_refine
from .synth import gen_basic, gen_regular_dataset, gen_ring_pair, gen_structure_dataset
from .walks import anonymize, aw_universe, encode_aw, encode_walk, enumerate_walks, sample_walks

__version__ = "0.1.0"

__all__ = [
    "DatasetError", "EmbedConfig", "EmbeddingMatrix", "EvalReport", "FoldPlan", "GSKN", "Graph",
    "GraphCollection", "KMeansResult", "LandmarkSet", "anonymize", "aw_universe",
    "cross_validate", "degree_attributes", "encode_aw", "encode_walk", "enumerate_walks",
    "exact_awgk", "exact_path_kernel", "exact_rwgk", "fit_linear", "gen_basic",
    "gen_regular_dataset", "gen_ring_pair", "gen_structure_dataset", "inv_sqrt_psd", "kmeans",
    "load_tu_dataset", "node_classification_eval", "project", "sample_walks",
    "stratified_folds", "validate", "wl_equivalent", "wl_refine", "with_degree_attributes",
    "write_tu_dataset",
]
