"""
Tests for atomic writer - temp write → fsync → rename.
Simulated interruption tests to verify atomicity.
"""

import os
from pathlib import Path
from unittest.mock import patch

import pytest

from storage.atomic_writer import (
    AtomicWriteError,
    write_bytes_atomic,
    write_pair_atomic,
    write_text_atomic,
)


class TestAtomicWriter:
    """Tests for atomic file writing."""

    def test_write_bytes_atomic_success(self, tmp_path):
        """Test successful atomic write."""
        output_path = tmp_path / 'array.roms'

        result = write_bytes_atomic(b'ROMS\x01\x00', output_path)

        assert result['status'] == 'completed'
        assert result['bytes_written'] == 6
        assert output_path.read_bytes() == b'ROMS\x01\x00'

    def test_write_creates_directory(self, tmp_path):
        """Test that atomic write creates parent directories."""
        output_path = tmp_path / 'bundle' / 'cae' / 'weights.roms'

        result = write_text_atomic('x=1\n', output_path)

        assert result['status'] == 'completed'
        assert output_path.exists()

    def test_write_overwrites_existing(self, tmp_path):
        """Test atomic write overwrites existing file."""
        output_path = tmp_path / 'labels.csv'
        output_path.write_text('old')

        write_text_atomic('new', output_path)

        assert output_path.read_text() == 'new'

    def test_no_temp_files_left(self, tmp_path):
        """Only the final file remains after a write."""
        write_text_atomic('content', tmp_path / 'a.txt')

        assert sorted(os.listdir(tmp_path)) == ['a.txt']

    def test_interrupted_rename_leaves_nothing(self, tmp_path):
        """A failure during rename reports failure and cleans the temp file."""
        output_path = tmp_path / 'a.roms'

        with patch('storage.atomic_writer.os.replace', side_effect=OSError('disk full')):
            result = write_bytes_atomic(b'data', output_path)

        assert result['status'] == 'failed'
        assert 'disk full' in result['error']
        assert not output_path.exists()
        assert os.listdir(tmp_path) == []


class TestWritePair:
    """Tests for data + sidecar writes."""

    def test_pair_written(self, tmp_path):
        data_path = tmp_path / 's.roms'
        meta_path = tmp_path / 's.roms.meta'

        result = write_pair_atomic(b'abc', 'k=v\n', data_path, meta_path)

        assert result['status'] == 'completed'
        assert data_path.read_bytes() == b'abc'
        assert meta_path.read_text() == 'k=v\n'

    def test_sidecar_failure_removes_data(self, tmp_path):
        """Data file is removed when its sidecar cannot be written."""
        data_path = tmp_path / 's.roms'
        meta_path = tmp_path / 's.roms.meta'

        real_write = write_bytes_atomic

        def failing(content, path):
            if Path(path) == meta_path:
                return {'status': 'failed', 'error': 'boom', 'bytes_written': 0}
            return real_write(content, path)

        with patch('storage.atomic_writer.write_bytes_atomic', side_effect=failing):
            with pytest.raises(AtomicWriteError, match='Sidecar write failed'):
                write_pair_atomic(b'abc', 'k=v\n', data_path, meta_path)

        assert not data_path.exists()
