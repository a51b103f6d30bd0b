"""
On-disk formats: binary sample frames, CSV tables, the campaign manifest and atomic writes.

Binary frame: header (n: u32, r: f64, sample index: u64) then (n+1)*3 little-endian f64.
Every frame in one chain file has the same n, so frames are read at a fixed stride.
"""
import csv
import hashlib
import io
import logging
import os
import re
import struct
import tempfile
from pathlib import Path
from typing import Iterable, Iterator, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from sentry_sdk import logger as sentry_logger

from thickwalk.exceptions import OutputPathError, PreconditionViolation, SampleDataError
from thickwalk.geom import Walk

logger = logging.getLogger(__name__)

FRAME_HEADER = struct.Struct("<IdQ")
COORDINATE_DTYPE = np.dtype("<f8")

SAMPLES_DIR = "samples"
MANIFEST_FILE = "manifest.json"

_CELL_DIR = re.compile(r"^n(?P<n>\d+)_r(?P<r>[0-9.eE+-]+)$")
_CHAIN_FILE = re.compile(r"^chain(?P<index>\d+)\.bin$")

# Frames claiming more edges than this are treated as garbage headers
MAX_FRAME_EDGES = 10_000_000


class Frame(NamedTuple):
    walk: Walk
    r: float
    index: int


def frame_size(n: int) -> int:
    return FRAME_HEADER.size + (n + 1) * 3 * COORDINATE_DTYPE.itemsize


def encode_frame(walk: Walk, r: float, index: int) -> bytes:
    header = FRAME_HEADER.pack(walk.n, float(r), index)
    return header + walk.vertices.astype(COORDINATE_DTYPE, copy=False).tobytes()


def decode_frame(buffer: bytes) -> Frame:
    """Decode one frame, validating the walk it carries"""
    if len(buffer) < FRAME_HEADER.size:
        raise PreconditionViolation("decode_frame", "truncated header", size=len(buffer))
    n, r, index = FRAME_HEADER.unpack_from(buffer)
    if len(buffer) != frame_size(n):
        raise PreconditionViolation("decode_frame", "frame length does not match its header",
                                    n=n, size=len(buffer))
    coords = np.frombuffer(buffer, dtype=COORDINATE_DTYPE, offset=FRAME_HEADER.size).reshape(n + 1, 3)
    return Frame(Walk(coords), r, index)


class FrameReader:
    """
    Iterates the valid frames of a chain file.

    Undecodable frames and a trailing partial frame are skipped and counted in ``corrupt``.
    """

    def __init__(self, path: Path):
        self.path = Path(path)
        self.corrupt = 0
        self.frames = 0

    def __iter__(self) -> Iterator[Frame]:
        with open(self.path, "rb") as handle:
            header = handle.read(FRAME_HEADER.size)
            if len(header) < FRAME_HEADER.size:
                if header:
                    self.corrupt += 1
                return
            n = FRAME_HEADER.unpack_from(header)[0]
            if not 2 <= n <= MAX_FRAME_EDGES:
                self.corrupt += 1
                return
            size = frame_size(n)
            buffer = header + handle.read(size - len(header))
            while buffer:
                if len(buffer) < size:
                    self.corrupt += 1
                    return
                try:
                    frame = decode_frame(buffer)
                except PreconditionViolation:
                    self.corrupt += 1
                else:
                    self.frames += 1
                    yield frame
                buffer = handle.read(size)


def iter_frames(path: Path) -> Iterator[Frame]:
    return iter(FrameReader(path))


def cell_dir_name(n: int, r: float) -> str:
    return f"n{n}_r{format(float(r), '.6g')}"


def chain_file(output_dir: Path, n: int, r: float, chain_index: int) -> Path:
    return Path(output_dir) / SAMPLES_DIR / cell_dir_name(n, r) / f"chain{chain_index}.bin"


class SampleCell(NamedTuple):
    n: int
    r: float
    files: List[Path]


def list_sample_cells(sample_dir: Path) -> List[SampleCell]:
    """Sample cells under ``sample_dir`` ordered by (n, r), chain files by chain index"""
    root = Path(sample_dir)
    samples = root / SAMPLES_DIR if (root / SAMPLES_DIR).is_dir() else root
    if not samples.is_dir():
        raise SampleDataError(str(sample_dir), "directory does not exist")
    cells = []
    for cell in samples.iterdir():
        match = _CELL_DIR.match(cell.name)
        if not (cell.is_dir() and match):
            continue
        chains = sorted(
            (int(m.group("index")), path)
            for path in cell.iterdir()
            if (m := _CHAIN_FILE.match(path.name))
        )
        if chains:
            cells.append(SampleCell(int(match.group("n")), float(match.group("r")), [p for _, p in chains]))
    if not cells:
        raise SampleDataError(str(sample_dir), "no sample files found")
    return sorted(cells, key=lambda c: (c.n, c.r))


def read_cell(cell: SampleCell) -> Tuple[List[Walk], int]:
    """All walks of a cell in chain order, plus the number of corrupt frames skipped"""
    walks, corrupt = [], 0
    for path in cell.files:
        reader = FrameReader(path)
        walks.extend(frame.walk for frame in reader)
        corrupt += reader.corrupt
    if corrupt:
        logger.warning("skipped %d corrupt frames in cell n=%d r=%s", corrupt, cell.n, cell.r)
        sentry_logger.warning(
            'Corrupt sample frames skipped',
            attributes={'cell.n': cell.n, 'cell.r': cell.r, 'frames.corrupt': corrupt}
        )
    return walks, corrupt


def ensure_dir(path: Path) -> Path:
    path = Path(path)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OutputPathError(str(path), str(e))
    if not os.access(path, os.W_OK):
        raise OutputPathError(str(path), "directory is not writable")
    return path


def atomic_write_bytes(path: Path, payload: bytes) -> Path:
    """Write to a temporary sibling and rename it into place"""
    path = Path(path)
    ensure_dir(path.parent)
    try:
        with tempfile.NamedTemporaryFile(
            mode="wb",
            dir=path.parent,
            prefix=f".{path.name}.",
            suffix=".tmp",
            delete=False
        ) as temp_file:
            temp_path = temp_file.name
            temp_file.write(payload)
        os.replace(temp_path, path)
    except OSError as e:
        raise OutputPathError(str(path), str(e))
    return path


def atomic_write_text(path: Path, text: str) -> Path:
    return atomic_write_bytes(path, text.encode("utf-8"))


class ChainFileWriter:
    """Streams frames into a temporary file that replaces ``path`` only on a clean close"""

    def __init__(self, path: Path):
        self.path = Path(path)
        self._handle = None
        self._temp_path: Optional[str] = None
        self.frames = 0

    def __enter__(self) -> "ChainFileWriter":
        ensure_dir(self.path.parent)
        try:
            self._handle = tempfile.NamedTemporaryFile(
                mode="wb", dir=self.path.parent, prefix=f".{self.path.name}.", suffix=".tmp", delete=False
            )
        except OSError as e:
            raise OutputPathError(str(self.path), str(e))
        self._temp_path = self._handle.name
        return self

    def write(self, walk: Walk, r: float, index: int) -> None:
        self._handle.write(encode_frame(walk, r, index))
        self.frames += 1

    def __exit__(self, exc_type, exc, tb):
        self._handle.close()
        if exc_type is None:
            os.replace(self._temp_path, self.path)
        else:
            os.unlink(self._temp_path)
        return False


def render_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    return atomic_write_text(path, render_csv(header, rows))


def read_csv(path: Path) -> List[dict]:
    with open(path, newline="") as handle:
        return list(csv.DictReader(handle))


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()
