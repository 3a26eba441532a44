"""Capture files, observation logs and pcap export."""

from .records import (
    FLAG_DECRYPTED,
    CaptureFormatError,
    CaptureRecord,
    UnorderedRecords,
    decode_capture,
    encode_capture,
    export_pcap,
    read_capture,
    read_observations,
    read_pcap,
    write_capture,
    write_observations,
)

__all__ = [
    "FLAG_DECRYPTED",
    "CaptureFormatError",
    "CaptureRecord",
    "UnorderedRecords",
    "decode_capture",
    "encode_capture",
    "export_pcap",
    "read_capture",
    "read_observations",
    "read_pcap",
    "write_capture",
    "write_observations",
]
