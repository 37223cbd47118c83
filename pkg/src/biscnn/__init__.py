"""Bi-directional sequential CNN for slot filling."""
from .corpus import Corpus, LabelSet, Sentence, Vocab, build_vocab, load_conll, make_windows
from .eval import ChunkF1Report, extract_chunks, f1_score
from .kernels import BACKEND
from .model import HyperParams, SeqCNN, Variant, predict
from .trainer import TrainConfig, TrainReport, cross_validate, lr_at, train, train_final

__version__ = "0.1.0"
