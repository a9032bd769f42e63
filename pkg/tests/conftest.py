import pytest

from llgraph.ingest import DesignCaseDoc, ProjectElement
from llgraph.kgraph import BuildConfig, build_graph
from llgraph.textmine import GazetteerEntry, analyze_corpus


@pytest.fixture
def tiny_counts():
    # Three pre-tokenized docs small enough to check TFIDF by hand.
    return [
        ("d1", {"clock": 1, "skew": 1, "error": 1}),
        ("d2", {"clock": 1, "gating": 1, "error": 1}),
        ("d3", {"power": 1, "drop": 1}),
    ]


@pytest.fixture
def corpus_docs():
    return [
        DesignCaseDoc(
            id="d-clk1",
            title="Clock skew on ASIC core",
            failure_description="Excessive clock skew caused setup violations in the ASIC core.",
            cause="Unbalanced clock tree insertion delay.",
            solution="Rebalanced the clock tree buffers.",
            project_path=["P1", "M1", "E1"],
        ),
        DesignCaseDoc(
            id="d-clk2",
            title="Clock gating glitch",
            failure_description="Clock gating glitches caused excessive clock skew and setup violations in the ASIC core clocks.",
            cause="Gating cell enable raced the clock edge.",
            solution="Added latch based gating cells.",
            project_path=["P1", "M1"],
        ),
        DesignCaseDoc(
            id="d-pwr1",
            title="Supply droop at turbo load",
            failure_description="Supply voltage droop during turbo load crashed the regulator output.",
            cause="Bandgap reference drifted with temperature.",
            solution="Compensated the bandgap reference and resized the decap array.",
            project_path=["P1", "M2"],
        ),
        DesignCaseDoc(
            id="d-pwr2",
            title="Regulator oscillation",
            failure_description="The LDO regulator oscillated with small output capacitors.",
            cause="Phase margin too low in the feedback loop.",
            solution="Increased the compensation capacitor.",
            project_path=["P2"],
        ),
        DesignCaseDoc(
            id="d-mech1",
            title="Connector fretting",
            failure_description="Board connector developed fretting corrosion in vibration testing.",
            cause="Micromotion at the contact interface.",
            solution="Switched to gold plated contacts.",
            project_path=["P2"],
        ),
        DesignCaseDoc(
            id="d-sw1",
            title="Watchdog reset loop",
            failure_description="Firmware watchdog reset loop after brownout events.",
            cause="Uninitialized RAM flag left set after brownout.",
            solution="Cleared the flag during early boot.",
            project_path=["P1", "M2"],
        ),
    ]


@pytest.fixture
def corpus_forest():
    return {
        "P1": ProjectElement(id="P1", name="Platform X", kind="project"),
        "M1": ProjectElement(id="M1", name="Clocking", kind="module", parent_id="P1"),
        "M2": ProjectElement(id="M2", name="Power", kind="module", parent_id="P1"),
        "E1": ProjectElement(id="E1", name="Clock tree", kind="element", parent_id="M1"),
        "P2": ProjectElement(id="P2", name="Platform Y", kind="project"),
    }


@pytest.fixture
def corpus_gazetteer():
    return [
        GazetteerEntry(
            category="circuit",
            canonical="bandgap reference",
            surface_forms=("bandgap",),
            weight=0.9,
        ),
        GazetteerEntry(
            category="component",
            canonical="LDO",
            surface_forms=("low dropout regulator",),
            weight=0.85,
        ),
    ]


@pytest.fixture
def corpus_analysis(corpus_docs, corpus_gazetteer):
    return analyze_corpus(corpus_docs, gazetteer=corpus_gazetteer)


@pytest.fixture
def snapshot(corpus_docs, corpus_forest, corpus_analysis):
    return build_graph(corpus_docs, corpus_forest, corpus_analysis, BuildConfig())
