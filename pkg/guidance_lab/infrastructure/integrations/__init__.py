"""
File integrations: checkpoints, run logs and curve output.
"""
from .checkpoint_store import Checkpoint, decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint
from .run_logger import LOG_FILE, SUMMARY_FILE, CsvRunLogger, read_summary, write_summary

__all__ = [
    "Checkpoint",
    "decode_checkpoint",
    "encode_checkpoint",
    "load_checkpoint",
    "save_checkpoint",
    "LOG_FILE",
    "SUMMARY_FILE",
    "CsvRunLogger",
    "read_summary",
    "write_summary",
]
