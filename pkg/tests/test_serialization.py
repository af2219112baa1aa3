import json

import pytest

from tokevolve import load, save, validate
from tokevolve.core import same_structure
from tokevolve.serialization import TokenizerFormatError


def test_round_trip(tmp_path, t_new):
    save(t_new, tmp_path / "tok")
    back = load(tmp_path / "tok")
    assert same_structure(back, t_new)
    assert validate(back) == []


def test_files_follow_interchange_format(tmp_path, t_old):
    save(t_old, tmp_path)
    vocab = json.loads((tmp_path / "vocab.json").read_text(encoding="utf-8"))
    assert vocab == t_old.vocab
    lines = (tmp_path / "merges.txt").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "#version: 0.2"
    assert lines[1:] == [f"{r.left} {r.right}" for r in t_old.merges]


def test_save_is_byte_identical(tmp_path, t_old):
    save(t_old, tmp_path / "x")
    save(t_old, tmp_path / "y")
    for name in ("vocab.json", "merges.txt", "special_tokens.json"):
        assert (tmp_path / "x" / name).read_bytes() == (tmp_path / "y" / name).read_bytes()


def _write(tmp_path, vocab, merges_text):
    (tmp_path / "vocab.json").write_text(json.dumps(vocab, ensure_ascii=False), encoding="utf-8")
    (tmp_path / "merges.txt").write_text(merges_text, encoding="utf-8")


def _base_vocab(extra):
    from tokevolve import Tokenizer

    vocab = dict(Tokenizer.from_merges([]).vocab)
    for tok in extra:
        vocab[tok] = len(vocab)
    return vocab


def test_load_accepts_cor_on_rule(tmp_path):
    _write(tmp_path, _base_vocab(["Co", "Cor", "on", "Coron"]), "#version: 0.2\nC o\nCo r\no n\nCor on\n")
    tok = load(tmp_path)
    assert tok.merges[-1].result == "Coron"
    assert tok.encode("Coron") == [tok.vocab["Coron"]]


def test_load_without_specials_file_uses_defaults(tmp_path):
    _write(tmp_path, _base_vocab(["ab"]), "#version: 0.2\na b\n")
    assert load(tmp_path).specials.mask == ("<mask>", 4)


def test_load_rejects_unknown_token(tmp_path):
    _write(tmp_path, _base_vocab(["Co"]), "#version: 0.2\nC o\nCo r\n")
    with pytest.raises(TokenizerFormatError, match=r"merges.txt:3.*'Co'|merges.txt:3"):
        load(tmp_path)


def test_load_reports_malformed_line(tmp_path):
    _write(tmp_path, _base_vocab(["ab"]), "#version: 0.2\na  b\n")
    with pytest.raises(TokenizerFormatError, match="merges.txt:2"):
        load(tmp_path)


def test_load_reports_bad_json_position(tmp_path):
    (tmp_path / "vocab.json").write_text('{"a": 1,\n "b": }', encoding="utf-8")
    (tmp_path / "merges.txt").write_text("#version: 0.2\n", encoding="utf-8")
    with pytest.raises(TokenizerFormatError, match="line 2"):
        load(tmp_path)


def test_load_missing_file(tmp_path):
    with pytest.raises(TokenizerFormatError, match="vocab.json"):
        load(tmp_path)
