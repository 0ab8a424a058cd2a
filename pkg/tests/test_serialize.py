from __future__ import annotations

import json

import numpy as np
import pytest

from ramanadual.duals import gap_analysis, verify_ramana
from ramanadual.facial import facial_reduction, verify_certificate
from ramanadual.fixtures import example_1_1, example_4_1, slater_instance
from ramanadual.sdpa import load_instance
from ramanadual.serialize import (AnalysisReport, SchemaError, analysis_report_from_json,
                                  analysis_report_to_json, certificate_from_json,
                                  certificate_to_json, instance_digest, ramana_solution_from_json,
                                  ramana_solution_to_json, validate)

from conftest import FIXTURES


class TestDigest:
    def test_ignores_name(self):
        a = example_1_1()
        b = load_instance(FIXTURES / "example1.dat-s")
        assert a.name != b.name
        assert instance_digest(a) == instance_digest(b)

    def test_distinguishes_instances(self):
        assert instance_digest(example_1_1()) != instance_digest(example_4_1())


class TestCertificate:
    @pytest.mark.parametrize("make", [example_1_1, example_4_1, slater_instance])
    def test_round_trip(self, make):
        inst = make()
        cert = facial_reduction(inst).certificate
        back = certificate_from_json(certificate_to_json(cert, inst), inst)
        assert back.block_sizes == cert.block_sizes and back.face_rank == cert.face_rank
        assert all(np.array_equal(a, b) for a, b in zip(back.Ys, cert.Ys))
        assert np.array_equal(back.accumulated_T.T, cert.accumulated_T.T)
        assert verify_certificate(inst, back, 1e-6)

    def test_digest_mismatch(self):
        inst = example_1_1()
        text = certificate_to_json(facial_reduction(inst).certificate, inst)
        with pytest.raises(SchemaError, match="digest"):
            certificate_from_json(text, example_4_1())

    def test_no_digest_accepts_any(self):
        text = certificate_to_json(facial_reduction(example_1_1()).certificate)
        assert certificate_from_json(text, example_4_1()).n == 2

    def test_kind_checked(self):
        text = (FIXTURES / "ex1.json").read_text()
        with pytest.raises(SchemaError, match="certificate"):
            certificate_from_json(text)

    def test_schema_violation(self):
        doc = json.loads(certificate_to_json(facial_reduction(example_1_1()).certificate))
        doc["face_rank"] = -1
        with pytest.raises(SchemaError):
            certificate_from_json(json.dumps(doc))

    def test_not_json(self):
        with pytest.raises(SchemaError):
            certificate_from_json("{not json")


class TestRamanaSolution:
    @pytest.mark.parametrize("name,make", [("ex1.json", example_1_1), ("ex4.json", example_4_1)])
    def test_fixture_files(self, name, make):
        inst = make()
        sol = ramana_solution_from_json((FIXTURES / name).read_text(), inst)
        assert verify_ramana(inst, sol, 1e-9)
        again = ramana_solution_from_json(ramana_solution_to_json(sol, inst), inst)
        for a, b in zip(again.U + again.V, sol.U + sol.V):
            assert np.array_equal(a, b)
        assert [w.beta for w in again.witnesses] == [w.beta for w in sol.witnesses]

    def test_digest_mismatch(self):
        with pytest.raises(SchemaError, match="digest"):
            ramana_solution_from_json((FIXTURES / "ex1.json").read_text(), example_4_1())

    def test_missing_level(self):
        doc = json.loads((FIXTURES / "ex1.json").read_text())
        doc["levels"] = doc["levels"][:-1]
        with pytest.raises(SchemaError, match="levels"):
            ramana_solution_from_json(json.dumps(doc))

    def test_shape_mismatch(self):
        doc = json.loads((FIXTURES / "ex1.json").read_text())
        doc["levels"][0]["U"] = [[0.0]]
        with pytest.raises(SchemaError):
            ramana_solution_from_json(json.dumps(doc))

    def test_floats_survive_bit_for_bit(self):
        doc = json.loads((FIXTURES / "ex1.json").read_text())
        doc["instance_digest"] = None
        v = 0.1 + 0.2
        doc["levels"][0]["beta"] = v
        sol = ramana_solution_from_json(json.dumps(doc))
        assert sol.witnesses[0].beta == v


class TestAnalysisReport:
    @pytest.mark.parametrize("make", [example_1_1, example_4_1, slater_instance])
    def test_schema_and_round_trip(self, make):
        inst = make()
        rep = gap_analysis(inst, solve_ramana=False)
        text = analysis_report_to_json(rep, inst)
        validate(json.loads(text), "analysis-report")
        back = analysis_report_from_json(text)
        assert back.to_dict() == AnalysisReport.from_gap_report(rep, inst).to_dict()
        assert back.face_rank == rep.face_rank

    def test_non_finite_values(self):
        inst = slater_instance()
        rep = gap_analysis(inst, solve_ramana=False)
        back = analysis_report_from_json(analysis_report_to_json(rep, inst))
        assert np.isnan(back.value("ramana_solver"))
        assert back.values["ramana_solver"] == "NaN"

    def test_gap_report_needs_instance(self):
        with pytest.raises(ValueError):
            analysis_report_to_json(gap_analysis(slater_instance(), solve_ramana=False))
