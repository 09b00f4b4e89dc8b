"""Molecular data storage: codec, nanopore simulator, trace reader, chip planner."""

from ._molstore import (
    MolstoreError,
    capture_rate,
    decode_direct,
    decode_runlength,
    encode_direct,
    encode_runlength,
    load_trace,
    mean_duration,
    open_current,
    plan,
    pore_state_census,
    read,
    save_trace,
    simulate,
    station_rate,
    transit_time,
)

__all__ = [
    "MolstoreError",
    "capture_rate",
    "decode_direct",
    "decode_runlength",
    "encode_direct",
    "encode_runlength",
    "load_trace",
    "mean_duration",
    "open_current",
    "plan",
    "pore_state_census",
    "read",
    "save_trace",
    "simulate",
    "station_rate",
    "transit_time",
]
