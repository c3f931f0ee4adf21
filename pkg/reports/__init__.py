"""
Output sinks for SEQMEM
"""

from .writer import ReportWriter, dumps_json, to_plain, write_csv

__all__ = [
    "ReportWriter",
    "dumps_json",
    "to_plain",
    "write_csv",
]
