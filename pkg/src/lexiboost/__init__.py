"""Boosting with lexicographic LP weighting for imbalanced classification."""

from .data import Dataset, SyntheticSpec, generate_gaussian, load_csv, stratified_split
from .dual_lexiboost import train_dual_lexiboost
from .ensemble import Ensemble, margin_matrix, train_adaboost
from .lexiboost import train_lexiboost
from .metrics import evaluate
from .weak import LearnerConfig

__version__ = "0.1.0"
