"""Corpora, vocabularies, subword segmentation, transliteration and batching."""
from .batching import Batch, make_batch, make_source
from .bpe import END_OF_WORD, MergeFileError, MergeTable, apply_bpe, detokenize, learn_bpe
from .corpus import (
    MAX_SOURCE_CHARS, MAX_SOURCE_SUBWORDS, ParallelCorpus, filter_pairs, read_lines, read_parallel,
    trim_for_multilingual_bpe, write_lines,
)
from .iso9 import iso9_inverse, iso9_transliterate
from .schedule import Minibatch, ScheduleError, ScheduleSpec, balanced_minibatch, shuffled_minibatches
from .vocab import BOS_ID, EOS_ID, PAD_ID, UNK_ID, Vocabulary, build_char_vocab, build_subword_vocab

__all__ = [
    "BOS_ID", "Batch", "END_OF_WORD", "EOS_ID", "MAX_SOURCE_CHARS", "MAX_SOURCE_SUBWORDS", "MergeFileError",
    "MergeTable", "Minibatch", "PAD_ID", "ParallelCorpus", "ScheduleError", "ScheduleSpec", "UNK_ID",
    "Vocabulary", "apply_bpe", "balanced_minibatch", "build_char_vocab", "build_subword_vocab", "detokenize",
    "filter_pairs", "iso9_inverse", "iso9_transliterate", "learn_bpe", "make_batch", "make_source",
    "read_lines", "read_parallel", "shuffled_minibatches", "trim_for_multilingual_bpe", "write_lines",
]
