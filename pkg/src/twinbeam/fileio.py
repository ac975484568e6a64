"""On-disk formats: the binary trace file, the spectrum CSV, and atomic writes.

Trace file layout (all little-endian):
    magic "TWBM" | version u32 | sample_rate f64 | channel_count u32 |
    sample_count u64 | channel name table (u32 byte length + UTF-8, repeated) |
    payload: channels sequential, samples as f32.
"""

import csv
import io
import json
import math
import os
import struct
import tempfile

import numpy as np

from .errors import TraceFormatError

TRACE_MAGIC = b"TWBM"
TRACE_VERSION = 1


def atomic_write_bytes(path, data):
    """Write via a sibling temp file and rename, so readers never see partial output."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".twinbeam-")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text):
    atomic_write_bytes(path, text.encode("utf-8"))


# ---------------------------------------------------------------------------
# binary trace format

def encode_trace(sample_rate, channels):
    """Serialize an ordered {name: series} mapping to trace-file bytes."""
    names = list(channels)
    lengths = {len(channels[name]) for name in names}
    if len(lengths) != 1:
        raise TraceFormatError(f"channels have mixed lengths {sorted(lengths)}")
    (num_samples,) = lengths
    buf = io.BytesIO()
    buf.write(TRACE_MAGIC)
    buf.write(struct.pack("<IdIQ", TRACE_VERSION, sample_rate, len(names), num_samples))
    for name in names:
        raw = name.encode("utf-8")
        buf.write(struct.pack("<I", len(raw)))
        buf.write(raw)
    for name in names:
        buf.write(np.asarray(channels[name], dtype="<f4").tobytes())
    return buf.getvalue()


def write_trace(path, sample_rate, channels):
    atomic_write_bytes(path, encode_trace(sample_rate, channels))


def _take(data, offset, count, what):
    if offset + count > len(data):
        raise TraceFormatError(
            f"trace truncated while reading {what}: need {count} bytes at offset {offset}, "
            f"file has {len(data)}", byte_offset=offset)
    return data[offset:offset + count], offset + count


def decode_trace(data):
    """Parse trace-file bytes into (sample_rate, {name: float32 series})."""
    chunk, offset = _take(data, 0, 4, "magic")
    if chunk != TRACE_MAGIC:
        raise TraceFormatError(f"bad magic {chunk!r} at offset 0", byte_offset=0)
    chunk, offset = _take(data, offset, struct.calcsize("<IdIQ"), "header")
    version, sample_rate, channel_count, num_samples = struct.unpack("<IdIQ", chunk)
    if version != TRACE_VERSION:
        raise TraceFormatError(f"unsupported trace version {version}", byte_offset=4)
    if not (sample_rate > 0 and math.isfinite(sample_rate)):
        raise TraceFormatError(f"invalid sample rate {sample_rate}", byte_offset=8)
    names = []
    for i in range(channel_count):
        chunk, offset = _take(data, offset, 4, f"name length of channel {i}")
        (name_len,) = struct.unpack("<I", chunk)
        start = offset
        chunk, offset = _take(data, offset, name_len, f"name of channel {i}")
        try:
            names.append(chunk.decode("utf-8"))
        except UnicodeDecodeError as exc:
            raise TraceFormatError(
                f"channel {i} name is not valid UTF-8 at offset {start}",
                byte_offset=start) from exc
    channels = {}
    for name in names:
        start = offset
        chunk, offset = _take(data, offset, 4 * num_samples, f"samples of channel {name!r}")
        channels[name] = np.frombuffer(chunk, dtype="<f4").astype(float)
    if offset != len(data):
        raise TraceFormatError(
            f"{len(data) - offset} trailing bytes after payload", byte_offset=offset)
    return sample_rate, channels


def read_trace(path):
    with open(path, "rb") as handle:
        return decode_trace(handle.read())


# ---------------------------------------------------------------------------
# spectrum CSV

SPECTRUM_COLUMNS = ("f_hz", "s_i", "s_p", "s_i_db", "s_p_db")


def _fmt(value):
    return "" if value is None else format(float(value), ".17g")


def write_spectrum_csv(path, frequencies, amplitude=None, phase=None):
    """Write the shared spectrum CSV; either channel column may be absent."""
    rows = [",".join(SPECTRUM_COLUMNS)]
    n = len(frequencies)
    for i in range(n):
        s_i = None if amplitude is None else amplitude[i]
        s_p = None if phase is None else phase[i]
        rows.append(",".join([
            _fmt(frequencies[i]), _fmt(s_i), _fmt(s_p),
            _fmt(None if s_i is None else 10.0 * math.log10(s_i)),
            _fmt(None if s_p is None else 10.0 * math.log10(s_p)),
        ]))
    atomic_write_text(path, "\n".join(rows) + "\n")


def read_spectrum_csv(path):
    """Read the spectrum CSV back into (frequencies, amplitude|None, phase|None)."""
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        missing = set(SPECTRUM_COLUMNS[:3]) - set(reader.fieldnames or ())
        if missing:
            raise TraceFormatError(f"spectrum CSV missing columns {sorted(missing)}")
        freqs, s_i, s_p = [], [], []
        for row in reader:
            freqs.append(float(row["f_hz"]))
            s_i.append(float(row["s_i"]) if row["s_i"] else None)
            s_p.append(float(row["s_p"]) if row["s_p"] else None)
    def collapse(col):
        if all(v is None for v in col):
            return None
        if any(v is None for v in col):
            raise TraceFormatError("spectrum CSV has a partially filled channel column")
        return np.array(col, dtype=float)
    return np.array(freqs, dtype=float), collapse(s_i), collapse(s_p)


def write_json(path, payload):
    atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")
