"""Input file parsing module."""

from .readers import FieldParser, MatrixParser, SequenceParser, encode_field

__all__ = ["FieldParser", "MatrixParser", "SequenceParser", "encode_field"]
