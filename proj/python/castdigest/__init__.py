"""Podcast summarization: segmentation, selection, stitching and ROUGE.

Documents are corpus-record dicts as written by ``castdigest segment``.
Errors raise :class:`Error` with ``args == (message, code, index)``.
"""

import json as _json

from . import _castdigest as _core
from ._castdigest import (
    Error,
    MAX_SUMMARY_SECONDS,
    MIN_SUMMARY_SECONDS,
    kfold_split,
    merge_and_clean,
    read_wav,
    rouge_l,
    rouge_n,
    score_texts,
    select_top_k,
    stitch,
    tokenize,
    write_wav,
)

__all__ = [
    "Error",
    "MAX_SUMMARY_SECONDS",
    "MIN_SUMMARY_SECONDS",
    "augment",
    "kfold_split",
    "lead_n",
    "load_corpus",
    "merge_and_clean",
    "mine_repeats",
    "parse_transcript",
    "read_wav",
    "reference_scores",
    "rouge_l",
    "rouge_n",
    "run_cli",
    "score_texts",
    "segment",
    "select_top_k",
    "selection_spans",
    "stitch",
    "summarize",
    "summary_validity_reason",
    "tokenize",
    "write_wav",
]


def _dump(obj):
    return obj if isinstance(obj, str) else _json.dumps(obj)


def parse_transcript(raw, episode_id="", audio_ref=""):
    """ASR result (dict or JSON text) -> normalised transcript dict."""
    return _json.loads(_core.parse_transcript(_dump(raw), episode_id, audio_ref))


def segment(transcript, pause_threshold_s=2.0):
    """Transcript dict -> corpus-record dict with sentences."""
    text = _dump(transcript)
    meta = _json.loads(text)
    return _json.loads(
        _core.segment(
            text,
            pause_threshold_s,
            meta.get("episode_id", ""),
            meta.get("audio_ref", ""),
        )
    )


def lead_n(record, n):
    return _core.lead_n(_dump(record), n)


def reference_scores(record, repetitive_runs=()):
    return _core.reference_scores(_dump(record), list(repetitive_runs))


def summarize(record, scorer="reference", k=12, max_tokens=512, repetitive_runs=()):
    """Selected sentence indices, ascending."""
    return _core.summarize(_dump(record), scorer, k, max_tokens, list(repetitive_runs))


def mine_repeats(records):
    """{episode_id: [(first, last), ...]} of runs shared with other episodes."""
    return _core.mine_repeats([_dump(r) for r in records])


def selection_spans(record, indices):
    return _core.selection_spans(_dump(record), list(indices))


def summary_validity_reason(record, indices):
    """'' when the selection could be committed as an annotation."""
    return _core.summary_validity_reason(_dump(record), list(indices))


def load_corpus(path):
    with open(path, encoding="utf-8") as f:
        return [_json.loads(line) for line in f if line.strip()]


def augment(records, factor=20, seed=0, workers=1):
    """Originals plus `factor` augmented copies of each annotated record."""
    jsonl = "".join(_dump(r) + "\n" for r in records)
    out = _core.build_augmented_dataset(jsonl, factor, seed, workers)
    return [_json.loads(line) for line in out.splitlines() if line]


def run_cli(*args):
    """Runs the command-line tool in process: (exit_code, stdout, stderr)."""
    return _core.run_cli([str(a) for a in args])
