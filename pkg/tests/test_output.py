"""Tests for CSV/JSON rendering and atomic writes."""
import json
import math
import os

import pandas as pd
import pytest

from utils.output import atomic_write_text, emit, frame_to_csv, frame_to_json


@pytest.fixture
def frame():
    return pd.DataFrame({'name': ['blue', 'red'], 'value': [0.5, math.nan], 'count': [1, 2]})


class TestRendering:

    def test_csv_uses_fixed_significant_digits(self, frame):
        assert frame_to_csv(frame, 3) == 'name,value,count\nblue,5.00e-01,1\nred,,2\n'

    def test_json_records(self, frame):
        records = json.loads(frame_to_json(frame))
        assert records[0] == {'name': 'blue', 'value': 0.5, 'count': 1}
        assert records[1]['value'] is None


class TestAtomicWrite:

    def test_creates_parent_directories(self, tmp_path):
        target = tmp_path / 'a' / 'b' / 'out.txt'
        assert atomic_write_text(target, 'hello\n') == target
        assert target.read_text() == 'hello\n'

    def test_replaces_existing_file_without_leftovers(self, tmp_path):
        target = tmp_path / 'out.txt'
        target.write_text('old')
        atomic_write_text(target, 'new')
        assert target.read_text() == 'new'
        assert os.listdir(tmp_path) == ['out.txt']

    def test_failed_write_keeps_old_content(self, tmp_path, monkeypatch):
        target = tmp_path / 'out.txt'
        target.write_text('old')

        def broken_replace(src, dst):
            raise OSError('disk full')

        monkeypatch.setattr(os, 'replace', broken_replace)
        with pytest.raises(OSError):
            atomic_write_text(target, 'new')
        assert target.read_text() == 'old'
        assert os.listdir(tmp_path) == ['out.txt']


class TestEmit:

    @pytest.mark.parametrize('output', [None, '-'])
    def test_stdout(self, capsys, output):
        emit('x\n', output)
        assert capsys.readouterr().out == 'x\n'

    def test_file(self, capsys, tmp_path):
        emit('x\n', str(tmp_path / 'out.csv'))
        assert capsys.readouterr().out == ''
        assert (tmp_path / 'out.csv').read_text() == 'x\n'
