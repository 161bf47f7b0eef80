import json

from modules.reports import render_csv, render_json, with_schema, write_output


def test_schema_wrapper():
    report = with_schema('gate-bench', {'rows': []})
    assert report == {'schema_version': 1, 'command': 'gate-bench', 'rows': []}


def test_json_is_sorted_and_terminated():
    text = render_json({'b': 1, 'a': [1.5, 2]})
    assert text.endswith('\n')
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {'a': [1.5, 2], 'b': 1}


def test_csv_keeps_column_order_and_float_precision():
    text = render_csv([{'y': 0.1 + 0.2, 'x': 3, 'ignored': 'z'}], ['x', 'y'])
    assert text == 'x,y\n3,0.30000000000000004\n'


def test_write_output(tmp_path):
    assert write_output('abc') == 'abc'
    target = tmp_path / 'nested' / 'report.json'
    assert write_output('abc', target) is None
    assert target.read_text(encoding='utf-8') == 'abc'
