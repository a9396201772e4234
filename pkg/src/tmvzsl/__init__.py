"""Transductive multi-class and multi-label zero-shot learning on
precomputed feature matrices."""

from .dataset import (
    FeatureMatrix,
    LabelVocabulary,
    PrototypeSet,
    SynthBenchmark,
    WordVectorTable,
    load_labels,
    load_matrix,
    load_prototypes,
    load_word_vectors,
    mean_pairwise_distance,
    prototype_spacing,
    synth_benchmark,
    write_matrix,
)
from .embedding import CcaModel, embed, embed_prototypes, fit_mvcca
from .graph import (
    AffinityGraph,
    Hypergraph,
    PropagationOperator,
    hypergraph_heterogeneous,
    hypergraph_homogeneous,
    knn_graph,
    propagation_operator,
)
from .metrics import (
    MulticlassReport,
    MultilabelReport,
    multiclass_accuracy,
    multilabel_losses,
)
from .multilabel import (
    LabelPowerSet,
    dmp_predict,
    power_set_prototypes,
    prototype_scores,
    self_train_adapt,
    synth_prototype,
    tramp_predict,
)
from .projection import ProjectionModel, apply, fit_ridge
from .propagation import (
    LabelScores,
    SeedMatrix,
    bma_combine,
    propagate,
    seed_matrix,
    tmv_hlp,
)

__version__ = "0.1.0"
