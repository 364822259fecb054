"""Readers for matrix, cube-sequence and sampled-field files."""

import logging
from pathlib import Path

import numpy as np

from ..covers.grids import SpatialGrid
from ..cubes.models import CubeSequence, DilatedCube
from ..exceptions import FieldFormatError
from ..linalg.expansive import certify_expansive
from ..linalg.models import ExpansiveMatrix
from ..tlnorm.fields import SampledField, field_from_samples

logger = logging.getLogger(__name__)

FIELD_HEADER = np.dtype([("dim", "<i8"), ("half_width", "<f8"), ("n_per_axis", "<i8")])
FIELD_SAMPLE = np.dtype("<c16")


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0].strip()


class MatrixParser:
    """Parser for whitespace-separated matrix rows; ``#`` starts a comment."""

    def parse_matrix_text(self, content: str, source_path: str = "<text>") -> np.ndarray:
        """Parse matrix rows.

        Args:
            content: File content
            source_path: Path used in messages

        Returns:
            Square float array

        Raises:
            FieldFormatError: If a value is not a number or the rows do not form a square matrix
        """
        rows = []
        for number, raw in enumerate(content.splitlines(), start=1):
            line = _strip_comment(raw)
            if not line:
                continue
            try:
                rows.append([float(token) for token in line.split()])
            except ValueError as e:
                raise FieldFormatError(f"{source_path}:{number}: {e}") from e
        if not rows:
            raise FieldFormatError(f"{source_path}: no matrix rows")
        if any(len(row) != len(rows) for row in rows):
            raise FieldFormatError(f"{source_path}: expected a square matrix, got row lengths {[len(r) for r in rows]}")
        logger.debug(f"Parsed {len(rows)}x{len(rows)} matrix from {source_path}")
        return np.array(rows)

    def parse_matrix_file(self, path: str | Path) -> ExpansiveMatrix:
        """Read and certify the matrix stored at ``path``."""
        text = Path(path).read_text()
        return certify_expansive(self.parse_matrix_text(text, str(path)))


class SequenceParser:
    """Parser for cube sequences: one line ``i k1 … kd re im`` per cube."""

    def parse_sequence_text(self, content: str, A: ExpansiveMatrix, source_path: str = "<text>") -> CubeSequence:
        """Parse sequence lines for the matrix A.

        Lines with the wrong number of fields or non-numeric values are skipped with a warning;
        a cube listed twice keeps the sum of its coefficients.
        """
        expected = A.dim + 3
        coefficients: dict[DilatedCube, complex] = {}
        skipped = 0
        for number, raw in enumerate(content.splitlines(), start=1):
            line = _strip_comment(raw)
            if not line:
                continue
            tokens = line.split()
            if len(tokens) != expected:
                logger.warning(f"{source_path}:{number}: expected {expected} fields, got {len(tokens)}; skipped")
                skipped += 1
                continue
            try:
                scale = int(tokens[0])
                offset = tuple(int(token) for token in tokens[1 : A.dim + 1])
                value = complex(float(tokens[-2]), float(tokens[-1]))
            except ValueError as e:
                logger.warning(f"{source_path}:{number}: {e}; skipped")
                skipped += 1
                continue
            cube = DilatedCube(scale, offset)
            coefficients[cube] = coefficients.get(cube, 0.0) + value

        sequence = CubeSequence(A, coefficients)
        logger.info(f"Parsed {len(sequence)} cubes from {source_path} ({skipped} lines skipped)")
        return sequence

    def parse_sequence_file(self, path: str | Path, A: ExpansiveMatrix) -> CubeSequence:
        return self.parse_sequence_text(Path(path).read_text(), A, str(path))


class FieldParser:
    """Parser for binary sampled fields.

    Layout (little endian): int64 d, float64 X, int64 n_per_axis, then n^d complex samples as
    interleaved float64 (re, im) in row-major order over the grid [-X, X)^d.
    """

    def parse_field_bytes(self, content: bytes, source_path: str = "<bytes>") -> SampledField:
        if len(content) < FIELD_HEADER.itemsize:
            raise FieldFormatError(f"{source_path}: {len(content)} bytes is shorter than the header")
        header = np.frombuffer(content, dtype=FIELD_HEADER, count=1)[0]
        dim, half_width, n = int(header["dim"]), float(header["half_width"]), int(header["n_per_axis"])
        if dim < 1 or n < 1:
            raise FieldFormatError(f"{source_path}: invalid header d={dim}, n_per_axis={n}")
        expected = FIELD_HEADER.itemsize + n**dim * FIELD_SAMPLE.itemsize
        if len(content) != expected:
            raise FieldFormatError(f"{source_path}: expected {expected} bytes for d={dim}, n={n}, got {len(content)}")
        try:
            grid = SpatialGrid(dim, half_width, n)
        except ValueError as e:
            raise FieldFormatError(f"{source_path}: {e}") from e
        samples = np.frombuffer(content, dtype=FIELD_SAMPLE, offset=FIELD_HEADER.itemsize).reshape(grid.shape)
        logger.debug(f"Parsed field d={dim}, X={half_width}, n={n} from {source_path}")
        return field_from_samples(grid, samples.astype(complex))

    def parse_field_file(self, path: str | Path) -> SampledField:
        return self.parse_field_bytes(Path(path).read_bytes(), str(path))


def encode_field(grid: SpatialGrid, samples: np.ndarray) -> bytes:
    """Bytes in the layout :class:`FieldParser` reads."""
    values = np.asarray(samples, dtype=complex)
    if values.shape != grid.shape:
        raise ValueError(f"samples have shape {values.shape}, grid expects {grid.shape}")
    header = np.array([(grid.dim, grid.half_width, grid.n_per_axis)], dtype=FIELD_HEADER)
    return header.tobytes() + values.astype(FIELD_SAMPLE).tobytes()
