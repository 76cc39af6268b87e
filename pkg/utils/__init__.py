"""Utility modules for the vacuum-QKD toolkit."""
from .logger import setup_logger, set_log_level
from .output import atomic_write_text, emit, frame_to_csv, frame_to_json

__all__ = [
    'setup_logger',
    'set_log_level',
    'atomic_write_text',
    'emit',
    'frame_to_csv',
    'frame_to_json',
]
