"""Acceptance gate: one test per externally guaranteed behavior.

Every test prints a single "criterion N: PASS ..." line once its checks
hold, so `pytest -s tests/test_acceptance.py` reads as a checklist. The
randomized suites (5 to 10) run at least the advertised number of cases
and stay inside a shared 30 second budget, enforced by the final test.
"""

from __future__ import annotations

import json
import tempfile
import time
from decimal import ROUND_HALF_UP, Decimal, localcontext
from fractions import Fraction
from pathlib import Path

import pytest
from fastapi.testclient import TestClient
from hypothesis import given, settings
from hypothesis import strategies as st

import dot_grammar
import helpers
import ws_strategies as wss
from conftest import BUNDLED_WORKSPACE, GOLDEN_DIR
from ragrisk.catalog import SchemaError, load_workspace, save_workspace
from ragrisk.cli import main
from ragrisk.engine import (
    apply_controls,
    assess,
    display_round,
    impact_score,
    likelihood_score,
    severity_label,
    severity_score,
)
from ragrisk.flows import actor_path, build_surface_graph, export_dot
from ragrisk.model import ActorClass, Control, PyramidLayer
from ragrisk.pyramid import coverage_matrix, prioritize
from ragrisk.service import create_app

ELAPSED: dict[str, float] = {}

RANDOMIZED = settings(max_examples=200, deadline=None)


@pytest.fixture(autouse=True)
def _clock(request):
    start = time.perf_counter()
    yield
    ELAPSED[request.node.name] = time.perf_counter() - start


def _golden_case(threat_index: int, with_controls: bool):
    start = time.perf_counter()
    ws = load_workspace(BUNDLED_WORKSPACE)
    enabled = list(ws.controls) if with_controls else []
    result = assess(ws.threats[threat_index], enabled)
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0, f"golden case took {elapsed:.3f}s"
    return result


def test_criterion_01_info_disclosure_inherent():
    a = _golden_case(0, with_controls=False)
    assert a.threat_id == "info_disclosure"
    assert display_round(a.likelihood_score) == "6.50"
    assert display_round(a.impact_score) == "3.00"
    assert display_round(a.severity_score) == "19.50"
    assert a.severity_score == Fraction(39, 2)
    assert a.severity_label.value == "High"
    print("criterion 1: PASS info_disclosure inherent 6.50/3.00/19.50 High")


def test_criterion_02_info_disclosure_residual():
    a = _golden_case(0, with_controls=True)
    assert display_round(a.likelihood_score) == "4.63"
    assert display_round(a.impact_score) == "2.25"
    assert display_round(a.severity_score) == "10.41"
    assert a.severity_score == Fraction(333, 32)
    assert a.severity_label.value == "Low"
    print("criterion 2: PASS info_disclosure residual 4.63/2.25/10.41 Low")


def test_criterion_03_poisoning_inherent():
    a = _golden_case(1, with_controls=False)
    assert a.threat_id == "rag_poisoning"
    assert display_round(a.likelihood_score) == "6.63"
    assert display_round(a.impact_score) == "3.00"
    assert display_round(a.severity_score) == "19.88"
    assert a.severity_score == Fraction(159, 8)
    assert a.severity_label.value == "High"
    print("criterion 3: PASS rag_poisoning inherent 6.63/3.00/19.88 High")


def test_criterion_04_poisoning_residual():
    a = _golden_case(1, with_controls=True)
    assert display_round(a.likelihood_score) == "4.63"
    assert display_round(a.impact_score) == "1.50"
    assert display_round(a.severity_score) == "6.94"
    assert a.severity_score == Fraction(111, 16)
    assert a.severity_label.value == "Low"
    print("criterion 4: PASS rag_poisoning residual 4.63/1.50/6.94 Low")


def test_criterion_05_mitigation_monotonicity():
    @given(
        wss.likelihood_vectors(),
        wss.impact_vectors(),
        st.lists(wss.controls(), max_size=4),
        wss.mitigating_controls(),
    )
    @RANDOMIZED
    def run(lv, iv, baseline, extra):
        before_l, before_i = apply_controls(lv, iv, baseline)
        after_l, after_i = apply_controls(lv, iv, baseline + [extra])
        l0, l1 = likelihood_score(before_l), likelihood_score(after_l)
        i0, i1 = impact_score(before_i), impact_score(after_i)
        assert l1 <= l0
        assert i1 <= i0
        assert severity_score(l1, i1) <= severity_score(l0, i0)

    run()
    print("criterion 5: PASS nonpositive-delta controls never raise a score (200+ cases)")


def test_criterion_06_residual_factor_clamping():
    @given(
        wss.likelihood_vectors(),
        wss.impact_vectors(),
        st.lists(
            wss.adjustment_lists(min_delta=-20, max_delta=20), min_size=1, max_size=3
        ),
    )
    @RANDOMIZED
    def run(lv, iv, adjustment_groups):
        extreme = [
            Control(
                id=f"x{position}",
                name="extreme",
                description="synthetic",
                layers=(PyramidLayer.TTPS,),
                adjustments=group,
            )
            for position, group in enumerate(adjustment_groups)
        ]
        residual_l, residual_i = apply_controls(lv, iv, extreme)
        for value in residual_l.as_dict().values():
            assert 0 <= value <= 9
        for value in residual_i.as_dict().values():
            assert 0 <= value <= 9

    run()
    print("criterion 6: PASS residual factors clamp to [0, 9] under deltas in [-20, 20] (200+ cases)")


def test_criterion_07_control_order_independence():
    @given(
        wss.likelihood_vectors(),
        wss.impact_vectors(),
        st.lists(wss.controls(), max_size=5),
        st.randoms(use_true_random=False),
    )
    @RANDOMIZED
    def run(lv, iv, control_list, rng):
        shuffled = list(control_list)
        rng.shuffle(shuffled)
        assert apply_controls(lv, iv, control_list) == apply_controls(
            lv, iv, shuffled
        )

    run()
    print("criterion 7: PASS apply_controls is permutation-invariant (200+ cases)")


def _decimal_display(value: Fraction) -> str:
    with localcontext() as ctx:
        ctx.prec = 50
        quotient = Decimal(value.numerator) / Decimal(value.denominator)
        return str(quotient.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def test_criterion_08_exact_rationals_and_rounding():
    assert display_round(Fraction(53, 8)) == "6.63"  # 6.625 rounds half-up

    @given(wss.likelihood_vectors(), wss.impact_vectors())
    @RANDOMIZED
    def run(lv, iv):
        likelihood = likelihood_score(lv)
        impact = impact_score(iv)
        severity = severity_score(likelihood, impact)
        assert likelihood == Fraction(lv.total(), 8)
        assert impact == Fraction(iv.total(), 8)
        assert 8 % likelihood.denominator == 0
        assert 8 % impact.denominator == 0
        assert 64 % severity.denominator == 0
        for value in (likelihood, impact, severity):
            assert display_round(value) == _decimal_display(value)

    run()
    print("criterion 8: PASS scores are exact eighths/sixty-fourths; display is half-up 2-dp (200+ cases)")


BAND_EDGES = [
    Fraction(0),
    Fraction(2999, 1000),
    Fraction(3),
    Fraction(5999, 1000),
    Fraction(6),
    Fraction(9),
]

LABEL_TABLE = {
    ("LOW", "LOW"): "Note",
    ("LOW", "MEDIUM"): "Low",
    ("LOW", "HIGH"): "Medium",
    ("MEDIUM", "LOW"): "Low",
    ("MEDIUM", "MEDIUM"): "Medium",
    ("MEDIUM", "HIGH"): "High",
    ("HIGH", "LOW"): "Medium",
    ("HIGH", "MEDIUM"): "High",
    ("HIGH", "HIGH"): "Critical",
}


def _band(score: Fraction) -> str:
    if score < 3:
        return "LOW"
    if score < 6:
        return "MEDIUM"
    return "HIGH"


def test_criterion_09_label_matrix():
    for likelihood in BAND_EDGES:
        for impact in BAND_EDGES:
            expected = LABEL_TABLE[(_band(likelihood), _band(impact))]
            assert severity_label(likelihood, impact).value == expected, (
                f"label mismatch at likelihood={likelihood}, impact={impact}"
            )

    @given(
        st.fractions(min_value=0, max_value=9, max_denominator=1000),
        st.fractions(min_value=0, max_value=9, max_denominator=1000),
    )
    @RANDOMIZED
    def run(likelihood, impact):
        expected = LABEL_TABLE[(_band(likelihood), _band(impact))]
        assert severity_label(likelihood, impact).value == expected

    run()
    print("criterion 9: PASS 36-point boundary sweep and 200+ random pairs match the 3x3 label table")


def test_criterion_10_round_trip_and_strict_schema():
    @given(wss.workspaces(), st.sampled_from(["yaml", "json"]))
    @settings(max_examples=100, deadline=None)
    def run(generated, fmt):
        with tempfile.TemporaryDirectory() as tmp:
            root = Path(tmp) / "ws"
            save_workspace(generated, root, fmt=fmt)
            assert load_workspace(root) == generated

    run()

    with tempfile.TemporaryDirectory() as tmp:
        model = helpers.model_doc()
        model["surprise"] = True
        helpers.write_docs(Path(tmp) / "unknown_key", model=model)
        with pytest.raises(SchemaError):
            load_workspace(Path(tmp) / "unknown_key")

    with tempfile.TemporaryDirectory() as tmp:
        threats = helpers.threats_doc()
        threats["threats"][0]["inherent_likelihood"]["skill_level"] = 12
        helpers.write_docs(Path(tmp) / "bad_factor", threats=threats)
        with pytest.raises(SchemaError):
            load_workspace(Path(tmp) / "bad_factor")

    print("criterion 10: PASS 100 random workspaces round-trip; unknown keys and factor 12 rejected")


def test_criterion_11_insider_entry_points():
    ws = load_workspace(BUNDLED_WORKSPACE)
    _, flow = ws.find_flow("poison_flow")
    insider = actor_path(flow, ActorClass.INSIDER)
    assert insider.entry_index == 6
    assert insider.skipped_count == 5
    external = actor_path(flow, ActorClass.EXTERNAL)
    assert external.entry_index == 1
    assert external.skipped_count == 0
    print("criterion 11: PASS poisoning flow: insider enters at 6 (5 skipped), external at 1 (0 skipped)")


EXPECTED_COVERAGE = {
    PyramidLayer.TTPS: ["adversarial_training", "crispml_phase3"],
    PyramidLayer.DATA_PROVENANCE: [
        "data_governance",
        "lifecycle_mlops",
        "crispml_phase2",
    ],
    PyramidLayer.ADVERSARIAL_INPUTS: [
        "input_validation",
        "crispml_phase1",
        "crispml_phase3",
    ],
    PyramidLayer.ADVERSARIAL_TOOLS: [
        "monitoring",
        "red_teaming_tools",
        "crispml_phase4",
    ],
    PyramidLayer.AI_SYSTEM_PERFORMANCE: [
        "monitoring",
        "lifecycle_mlops",
        "crispml_phase4",
        "crispml_phase5",
        "crispml_phase6",
    ],
    PyramidLayer.DATA_INTEGRITY: ["incident_response"],
}


def test_criterion_12_prioritization_and_coverage():
    ws = load_workspace(BUNDLED_WORKSPACE)
    ranked = prioritize(list(ws.controls), list(ws.threats))
    first = ranked[0]
    assert first.control_id == "adversarial_training"
    assert first.top_layer is PyramidLayer.TTPS
    assert first.top_layer_rank == 6
    assert coverage_matrix(list(ws.controls)) == EXPECTED_COVERAGE
    print("criterion 12: PASS a TTPs-layer control ranks first; layer coverage matches the catalog exactly")


def test_criterion_13_dot_export_golden():
    ws = load_workspace(BUNDLED_WORKSPACE)
    text = export_dot(build_surface_graph(ws))
    document = dot_grammar.parse_dot(text)
    assert document.graph_name == "attack_surface"
    golden = (GOLDEN_DIR / "surface_graph.dot").read_text(encoding="utf-8")
    assert text == golden
    print("criterion 13: PASS DOT export parses and matches the committed snapshot")


def test_criterion_14_cli_api_equivalence(capsys):
    code = main(["assess", str(BUNDLED_WORKSPACE), "--format", "json", "--controls", "all"])
    assert code == 0
    cli_doc = json.loads(capsys.readouterr().out)

    ws = load_workspace(BUNDLED_WORKSPACE)
    with TestClient(create_app(ws)) as client:
        response = client.post(
            "/api/v1/assess", json={"controls": list(ws.control_ids())}
        )
        assert response.status_code == 200
        api_doc = response.json()

    cli_bytes = json.dumps(cli_doc["assessments"], sort_keys=True)
    api_bytes = json.dumps(api_doc, sort_keys=True)
    assert cli_bytes == api_bytes
    print("criterion 14: PASS CLI assessments and POST /assess agree byte-for-byte after key sorting")


def test_randomized_suites_within_budget():
    randomized = [
        name
        for name in ELAPSED
        if any(f"criterion_{number:02d}" in name for number in range(5, 11))
    ]
    total = sum(ELAPSED[name] for name in randomized)
    assert total < 30.0, f"randomized suites took {total:.1f}s"
    print(f"randomized suites: {total:.1f}s across {len(randomized)} tests (budget 30s)")
