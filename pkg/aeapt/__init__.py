from .data import (
    BooleanDataset,
    generate_synthetic,
    ingest_dense_csv,
    ingest_sparse,
    LabelSet,
    merge_views,
    split_normal,
    SyntheticSpec,
)
from .enums import Architectures, JobTypes, Views
from .ensemble import run_ensemble, run_suite, score_distribution
from .evaluation import avf_scores, dcg, ndcg, rank_processes
from .models import anomaly_score, fit, ModelConfig, score_all, TrainedModel
from .storage import load_model, save_model

__version__ = '0.1.0'

__all__ = [
    'Architectures',
    'BooleanDataset',
    'JobTypes',
    'LabelSet',
    'ModelConfig',
    'SyntheticSpec',
    'TrainedModel',
    'Views',
    'anomaly_score',
    'avf_scores',
    'dcg',
    'fit',
    'generate_synthetic',
    'ingest_dense_csv',
    'ingest_sparse',
    'load_model',
    'merge_views',
    'ndcg',
    'rank_processes',
    'run_ensemble',
    'run_suite',
    'save_model',
    'score_all',
    'score_distribution',
    'split_normal',
]
