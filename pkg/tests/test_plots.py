import xml.etree.ElementTree as ET

from fedclus.cli import main, read_report, write_report
from fedclus.plots import write_plots
from fedclus.report import ExperimentReport, FinalEval, RoundRecord, RunReport, summarize

SVG = "{http://www.w3.org/2000/svg}"


def fake_run(algorithm, seed, perfect=False):
    roc = [[0.0, 0.0], [0.0, 1.0], [1.0, 1.0]] if perfect else [[0.0, 0.0], [0.2, 0.6], [1.0, 1.0]]
    ks = 1.0 if perfect else 0.4
    kp = [0.0, 1.0, 0.7] if perfect else [0.2, 0.6, 0.5]
    rounds = [RoundRecord(r, 0.6 - 0.1 * r, 0.8 + 0.05 * r, 0.7, 0.6, 0.65) for r in range(3)]
    return RunReport(
        algorithm, seed, "inverse", "two_tier", rounds,
        FinalEval(roc, 1.0 if perfect else 0.7, ks, kp, {"tp": 1, "fp": 0, "fn": 0, "tn": 1}, 0.5),
        {"messages": 4, "bytes": 100, "central_messages": 4, "per_link": {"access": 4}},
        {"wifi": 1.5, "5g": 0.15},
    )


def make_report(perfect=False):
    runs = [fake_run(a, s, perfect) for s in (1, 2) for a in ("fedavg", "fedclusavg")]
    summary, deltas = summarize(runs)
    return ExperimentReport({"rounds": 2}, runs, summary, deltas, "2026-01-01T00:00:00+00:00")


def test_file_set_and_viewbox(tmp_path):
    paths = write_plots(make_report(), tmp_path)
    assert sorted(p.name for p in paths) == [
        "accuracy_vs_round.svg", "latency_bars.svg", "roc_fedavg.svg", "roc_fedclusavg.svg",
    ]
    for p in paths:
        root = ET.parse(p).getroot()
        assert root.tag == SVG + "svg"
        assert root.get("viewBox") == "0 0 800 600" and root.get("version") == "1.1"


def test_perfect_classifier_annotation(tmp_path):
    write_plots(make_report(perfect=True), tmp_path)
    root = ET.parse(tmp_path / "roc_fedavg.svg").getroot()
    label = [t.text for t in root.iter(SVG + "text") if (t.get("class") or "") == "ks-label"]
    assert label and "KS=1.000" in label[0]
    # plot area is x in [80, 760], y in [50, 530]; ROC point (0, 1) maps to (80, 50)
    lines = [p.get("points") for p in root.iter(SVG + "polyline") if "roc" in (p.get("class") or "")]
    assert all("80.00,50.00" in pts.split() for pts in lines)


def test_plot_command_is_deterministic(tmp_path):
    write_report(make_report(), tmp_path / "report.json")
    assert main(["plot", "--report", str(tmp_path / "report.json"), "--out", str(tmp_path / "a")]) == 0
    assert main(["plot", "--report", str(tmp_path / "report.json"), "--out", str(tmp_path / "b")]) == 0
    for name in ("roc_fedavg.svg", "roc_fedclusavg.svg", "accuracy_vs_round.svg", "latency_bars.svg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert read_report(tmp_path / "report.json").to_dict() == make_report().to_dict()


def test_bad_report_exit_code(tmp_path):
    (tmp_path / "r.json").write_text("{not json")
    assert main(["plot", "--report", str(tmp_path / "r.json"), "--out", str(tmp_path)]) == 2
