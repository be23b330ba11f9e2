"""bincall-neural: name-prediction models over augmented call-site datasets."""

from .data import load_corpus
from .model import NameModel, featurize
from .train import Hyperparameters, TrainError, train_model
from .vocab import Vocab, build_vocab

__version__ = "0.1.0"

__all__ = [
    "load_corpus",
    "NameModel",
    "featurize",
    "Hyperparameters",
    "TrainError",
    "train_model",
    "Vocab",
    "build_vocab",
    "__version__",
]
