"""Dataset CSV storage."""

from .csv_io import dump_dataset, load_dataset, to_frame

__all__ = ["dump_dataset", "load_dataset", "to_frame"]
