"""Multi-label classification with statistical label-co-occurrence graphs,
GCN-learned label embeddings, and low-rank bilinear GroupSum fusion."""

__version__ = "0.1.0"

from .data import (FeatureRecord, LabeledSample, LabelVocabulary, UncertainPolicy,
                   load_features, parse_columnar_labels, parse_pipe_labels,
                   split_dataset, write_pipe_labels)
from .embeddings import (LabelEmbeddingMatrix, WordEmbeddingTable, embed_labels,
                         load_word_vectors, synthetic_embeddings)
from .graph import (CooccurrenceStats, CorrelationGraph, binarize,
                    build_correlation_graph, conditional_matrix,
                    count_cooccurrence, normalize, reweight)
from .gcn import GcnLayer, GcnStack, dims_for_depth, gcn_backward, gcn_forward
from .fusion import (FusionParameters, bridge_all, bridge_one, fusion_backward,
                     fusion_forward_batch, fusion_backward_batch, group_sum)
from .backbone import (FeatureProvider, SyntheticSpec, ToyMlp,
                       generate_synthetic_dataset)
from .metrics import (EvaluationReport, auc_score, build_report, overall_prf,
                      roc_curve, roc_points, sigmoid, top_k_table)
from .model import Network
from .training import (Checkpoint, DataBundle, OptimizerState, TrainConfig,
                       TrainResult, load_checkpoint, make_optimizer,
                       multilabel_loss, multilabel_loss_batch,
                       network_from_checkpoint, save_checkpoint, sgd_step, train)
