"""Utterance-level omission labeling, metrics, and analyses for dialogue
summarization corpora."""

__version__ = "0.1.0"
