import pytest

from hevolve.errors import SourceParseError
from hevolve.normalize import (
    normalize,
    normalize_degraded,
    normalize_or_degrade,
    significant_tokens,
)

# the trivial bin-priority design used to seed runs, docstring included
SEED_WITH_DOCSTRING = '''def priority_v1(item: float, bins_remain_cap: np.ndarray) -> np.ndarray:
    """Returns priority with which we want to add item to each bin.

    Args:
        item: Size of item to be added to the bin.
        bins_remain_cap: Array of capacities for each bin.

    Return:
        Array of same size as bins_remain_cap with priority score of each bin.
    """
    ratios = item / bins_remain_cap
    log_ratios = np.log(ratios)
    priorities = -log_ratios
    return priorities
'''

CORPUS = [
    SEED_WITH_DOCSTRING,
    "def f(x):\n    # a comment\n    return x + 1\n",
    "import numpy as np\n\n\ndef g(a, b=2, *args, **kw):\n    return np.dot(a, a) - b\n",
    "def h(m):\n    s = m[1:3, :]\n    d = {'k': 1}\n    return [i ** 2 for i in s if i != 0]\n",
    "x = 1; y = 2\nz = x + y\n",
    "def outer():\n    def inner(q):\n        return -q\n    return inner\n",
    "@deco\ndef k():\n    'doc'\n    return lambda c: c.val\n",
    "def only_doc():\n    \"\"\"nothing else\"\"\"\n",
    "result = (a if a > 0\n          else -a)\n",
]


def test_comment_lines_removed():
    out = normalize("def f():\n    # gone\n    return 1  # also gone\n")
    assert "#" not in out.text
    assert "gone" not in out.text


def test_docstring_removed_from_seed():
    out = normalize(SEED_WITH_DOCSTRING)
    assert '"""' not in out.text
    assert "priority score of each bin" not in out.text
    # behavior-relevant statements intact
    for fragment in ("ratios = item / bins_remain_cap", "return priorities"):
        assert fragment in out.text


def test_already_canonical_is_fixed_point():
    canonical = normalize(SEED_WITH_DOCSTRING).text
    assert normalize(canonical).text == canonical


@pytest.mark.parametrize("src", CORPUS)
def test_idempotent(src):
    once = normalize(src).text
    assert normalize(once).text == once


@pytest.mark.parametrize("src", CORPUS)
def test_token_stream_preserved(src):
    before = [s for _, s in significant_tokens(src)]
    after = [s for _, s in significant_tokens(normalize(src).text)]
    if src == "def only_doc():\n    \"\"\"nothing else\"\"\"\n":
        # the one sanctioned exception: a lone-docstring body gains a pass
        assert after == before + ["pass"]
    else:
        assert after == before


def test_comment_insensitivity():
    bare = "def f(x):\n    return x * 2\n"
    commented = "def f(x):  # doubles\n    # the input\n    return x * 2\n"
    with_doc = 'def f(x):\n    """Doubles."""\n    return x * 2\n'
    assert normalize(bare).text == normalize(commented).text
    assert normalize(bare).text == normalize(with_doc).text


def test_lone_docstring_body_gets_pass():
    out = normalize("def only_doc():\n    \"\"\"nothing else\"\"\"\n")
    assert "pass" in out.text
    normalize(out.text)  # still parses


def test_unparsable_raises_parse_error():
    with pytest.raises(SourceParseError):
        normalize("def broken(:\n    return 1\n")


def test_degraded_strips_blank_lines_and_trailing_space():
    raw = "here is prose   \n\nnot code  \n\n\nat all\n"
    out = normalize_degraded(raw)
    assert out.text == "here is prose\nnot code\nat all\n"
    assert out.degraded
    # degraded cleanup is idempotent too
    assert normalize_degraded(out.text).text == out.text


def test_normalize_or_degrade_dispatch():
    assert not normalize_or_degrade("x = 1\n").degraded
    assert normalize_or_degrade("not python ))\n").degraded


def test_semicolons_split_into_statements():
    out = normalize("a = 1; b = 2\n")
    assert out.text == "a = 1\nb = 2\n"


def test_statement_mid_body_string_kept():
    # only leading statement-position literals count as docstrings
    src = "def f():\n    x = 1\n    'kept'\n    return x\n"
    assert "'kept'" in normalize(src).text


def test_single_line_compound_suites_not_split():
    # splitting at the semicolon would pull y() out of the try suite
    src = "try: x(); y()\nexcept ValueError: pass\nif c: a = 1; b = 2\n"
    out = normalize(src)
    assert out.text == src
    assert normalize(out.text).text == out.text


def test_leading_docstring_run_fully_stripped():
    # a stack of bare leading strings must all go at once, otherwise the
    # second pass would see a fresh docstring
    src = '"""first"""\n"""second"""\nx = 1\n'
    out = normalize(src)
    assert out.text == "x = 1\n"
    assert normalize(out.text).text == out.text
    fn = 'def f():\n    """one"""\n    "two"\n    return 3\n'
    out_fn = normalize(fn)
    assert "two" not in out_fn.text
    assert normalize(out_fn.text).text == out_fn.text
