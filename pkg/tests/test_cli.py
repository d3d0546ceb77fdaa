import csv
import io
import subprocess
import sys
from pathlib import Path

import pytest

from rmtshop.cli import main
from rmtshop.engine import decode, schedule_from_csv, schedule_to_csv
from rmtshop.instance_io import parse_instance
from rmtshop.lp_export import schedule_to_solution

SAMPLE = Path(__file__).parent / "fixtures" / "sample.instance"
FAST = ["--pop-size", "8", "--generations", "3"]


def test_gen_presets(tmp_path, capsys):
    assert main(["gen", "--preset", "E01", "e02", "--seed", "4", "--out-dir", str(tmp_path)]) == 0
    inst = parse_instance((tmp_path / "E01.instance").read_text())
    assert inst.num_jobs == 5 and inst.num_machines == 6
    assert (tmp_path / "E02.instance").exists()
    assert "E01.instance" in capsys.readouterr().out


def test_gen_custom(tmp_path):
    assert main(["gen", "--jobs", "3", "--machines", "2", "--workers", "2", "--name", "x",
                 "--out-dir", str(tmp_path)]) == 0
    assert parse_instance((tmp_path / "x.instance").read_text()).num_workers == 2


def test_solve_then_check_and_gantt(tmp_path):
    out = tmp_path / "run"
    assert main(["solve", str(SAMPLE), *FAST, "--out-dir", str(out)]) == 0
    for name in ("schedule.csv", "history.csv", "gantt.svg"):
        assert (out / name).stat().st_size > 0
    hist = list(csv.reader(io.StringIO((out / "history.csv").read_text())))
    assert hist[0] == ["generation", "best_te"] and len(hist) == 1 + 4  # generation 0 plus three
    assert main(["check", str(SAMPLE), "--schedule", str(out / "schedule.csv")]) == 0
    assert main(["gantt", str(SAMPLE), "--schedule", str(out / "schedule.csv"), "-o", str(tmp_path / "g.svg")]) == 0
    assert (tmp_path / "g.svg").read_text().count('id="op-') == 7


def test_check_reports_violations(tmp_path, capsys, sample, sample_chromosome):
    sched = decode(sample, sample_chromosome)
    bad = schedule_to_csv(sched).replace("\n0,0,0,0,1,0,4\n", "\n0,0,0,0,1,0,5\n")
    assert bad != schedule_to_csv(sched)
    path = tmp_path / "bad.csv"
    path.write_text(bad)
    assert main(["check", str(SAMPLE), "--schedule", str(path)]) == 1
    assert "completion-arithmetic" in capsys.readouterr().out


def test_check_lp_solution(tmp_path, capsys, sample, sample_chromosome):
    path = tmp_path / "sol.txt"
    path.write_text(schedule_to_solution(sample, decode(sample, sample_chromosome)))
    assert main(["check", str(SAMPLE), "--lp-solution", str(path)]) == 0
    assert capsys.readouterr().out == "OK: no violations\n"


def test_export_lp(tmp_path):
    assert main(["export-lp", "--preset", "E01", "--out-dir", str(tmp_path)]) == 0
    text = (tmp_path / "model.lp").read_text()
    assert "Minimize" in text and text.rstrip().endswith("End")


def test_bench_outputs(tmp_path):
    assert main(["bench", str(SAMPLE), "--preset", "E01", "--replications", "2", *FAST,
                 "--out-dir", str(tmp_path)]) == 0
    rows = list(csv.DictReader(io.StringIO((tmp_path / "report.csv").read_text())))
    assert {r["instance"] for r in rows} == {"sample", "E01"}
    assert (tmp_path / "boxplot.svg").read_text().startswith("<?xml")


def test_errors_exit_two(tmp_path, capsys):
    broken = tmp_path / "broken.instance"
    broken.write_text("rmtshop-instance v1\njobs 0\n")
    assert main(["solve", str(broken)]) == 2
    assert "error:" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        main(["solve", "--preset", "E99"])


def _cli(args, cwd):
    subprocess.run([sys.executable, "-m", "rmtshop", *args], cwd=cwd, check=True, capture_output=True)


def _strip_times(report: str) -> str:
    return "\n".join(",".join(line.split(",")[:10]) for line in report.splitlines())


@pytest.mark.slow
def test_reruns_are_byte_identical(tmp_path):
    outputs = []
    for n in range(2):
        d = tmp_path / f"r{n}"
        d.mkdir()
        _cli(["bench", str(SAMPLE), "--preset", "E02", "--replications", "2", *FAST, "--seed", "11"], d)
        _cli(["solve", str(SAMPLE), *FAST, "--seed", "3", "--out-dir", "s"], d)
        _cli(["export-lp", str(SAMPLE)], d)
        outputs.append({
            "report": _strip_times((d / "report.csv").read_text()),
            "reps": (d / "rpd_reps.csv").read_text(),
            "box": (d / "boxplot.svg").read_bytes(),
            "sched": (d / "s" / "schedule.csv").read_text(),
            "gantt": (d / "s" / "gantt.svg").read_bytes(),
            "lp": (d / "model.lp").read_bytes(),
        })
    assert outputs[0] == outputs[1]
