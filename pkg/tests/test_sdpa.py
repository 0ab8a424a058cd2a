from __future__ import annotations

import numpy as np
import pytest

from ramanadual.duals import build_classical_dual, build_ramana_dual, build_strong_dual
from ramanadual.fixtures import example_1_1, example_4_1, planted_face, slater_instance
from ramanadual.sdpa import (SdpaParseError, is_program_file, load_instance, parse_sdpa,
                             parse_sdpa_program, read_sdpa, write_sdpa)

from conftest import FIXTURES, random_conic_program


def data_lines(text: str) -> list[str]:
    return [ln for ln in text.splitlines() if ln and ln[0] not in '"*']


def instances():
    out = [example_1_1(), example_4_1(), slater_instance(), slater_instance(2, 1)]
    rng = np.random.default_rng(4)
    for n in (2, 3, 4, 5):
        for r in (0, n // 2, n):
            out.append(planted_face(rng, n, r).instance)
    return out


def programs():
    rng = np.random.default_rng(6)
    out = [random_conic_program(rng) for _ in range(8)]
    out += [build_ramana_dual(example_1_1()), build_strong_dual(example_4_1(), 2),
            build_classical_dual(example_4_1())]
    return out


@pytest.mark.parametrize("inst", instances(), ids=lambda i: i.name)
def test_instance_round_trip_is_exact(inst):
    back = parse_sdpa(write_sdpa(inst))
    assert back.name == inst.name
    assert np.array_equal(back.B, inst.B)
    assert np.array_equal(back.c, inst.c)
    assert all(np.array_equal(a, b) for a, b in zip(back.A, inst.A))


@pytest.mark.parametrize("prog", programs(), ids=lambda p: p.name)
def test_program_round_trip_is_exact(prog):
    text = write_sdpa(prog)
    assert is_program_file(text)
    back = parse_sdpa_program(text)
    assert (back.psd_orders, back.n_nonneg, back.n_free) == (prog.psd_orders, prog.n_nonneg, prog.n_free)
    assert np.array_equal(back.A, prog.A)
    assert np.array_equal(back.b, prog.b)
    assert np.array_equal(back.c, prog.c)


def test_fixture_files_match_constructors():
    for path, make in (("example1.dat-s", example_1_1), ("example4.dat-s", example_4_1)):
        inst = load_instance(FIXTURES / path)
        assert inst.allclose(make(), atol=0.0, rtol=0.0)


def test_load_names_after_file(tmp_path):
    text = "\n".join(data_lines(write_sdpa(example_1_1()))) + "\n"
    p = tmp_path / "plain.dat-s"
    p.write_text(text)
    assert load_instance(p).name == "plain"


def test_sign_convention():
    f = read_sdpa(write_sdpa(example_1_1()))
    assert np.array_equal(f.c, [-2.0])
    assert np.array_equal(f.matrix(0), -np.diag([1.0, 0.0]))


def test_ramana_file_of_example_1_1():
    prog = build_ramana_dual(example_1_1())
    lines = data_lines(write_sdpa(prog))
    assert lines[0] == "25"
    assert lines[2] == "2 2 2 4 4 -20"
    assert prog.num_vars == 39


def test_diagonal_instance_uses_diagonal_block():
    lines = data_lines(write_sdpa(slater_instance()))
    assert lines[2] == "-3"


def test_header_annotations_and_punctuation():
    text = '"c"\n1 =mdim\n1 =nblocks\n{2}\n(-2.0)\n0,1,1,1,-1.0\n1 1 1 2 -1.0\n'
    assert parse_sdpa(text).allclose(example_1_1(), atol=0.0, rtol=0.0)


@pytest.mark.parametrize("text,line,msg", [
    ("1\n1\n2 2\n1.0\n0 1 1 1 1.0 2\n", 5, "5 fields"),
    ("1\n1\n2\n1.0\n0 1 1 x 1.0\n", 5, "column index"),
    ("1\n1\n2\n1.0\n0 1 3 1 1.0\n", 5, "out of range"),
    ("1\n1\n2\n1.0\n0 2 1 1 1.0\n", 5, "block number"),
    ("1\n1\n2\n1.0\n2 1 1 1 1.0\n", 5, "matrix number"),
    ("1\n1\n2\n1.0\n0 1 1 1\n", 5, "5 fields"),
    ("1\n1\n2\n1.0\n0 1 1 2 1.0\n0 1 2 1 2.0\n", 6, "duplicate"),
    ("1\n1\n-2\n1.0\n0 1 1 2 1.0\n", 5, "diagonal block"),
    ("1\n1\n0\n1.0\n", 3, "block size 0"),
    ("-1\n1\n2\n", 1, "nonnegative"),
    ("1\n0\n", 2, "at least one block"),
    ("1\n1\n2\n", 3, "end of file"),
    ("", 1, "end of file"),
    ("this is not\nan SDPA file\n", 1, "integer"),
])
def test_parse_errors_carry_line_numbers(text, line, msg):
    with pytest.raises(SdpaParseError) as exc:
        parse_sdpa(text)
    assert exc.value.line == line
    assert msg in str(exc.value)


def test_negative_size_reads_as_diagonal():
    inst = parse_sdpa("1\n1\n-2\n1.0\n0 1 1 1 -1.0\n1 1 2 2 -1.0\n")
    assert np.array_equal(inst.A[0], np.diag([0.0, 1.0]))


def test_no_constraint_matrices():
    with pytest.raises(SdpaParseError, match="m = 0"):
        parse_sdpa("0\n1\n2\n0 1 1 1 1.0\n")
    assert read_sdpa("0\n1\n2\n0 1 1 1 1.0\n").m == 0


def test_program_file_rejected_as_instance():
    with pytest.raises(SdpaParseError, match="conic program"):
        parse_sdpa(write_sdpa(build_classical_dual(example_1_1())))


def test_garbage_fixture():
    with pytest.raises(SdpaParseError):
        load_instance(FIXTURES / "garbage.dat-s")


def test_write_rejects_other_objects():
    with pytest.raises(TypeError):
        write_sdpa(np.eye(2))
