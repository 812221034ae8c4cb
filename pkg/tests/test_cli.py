import json

import pytest

from app.main import main

TWO_JOBS = "2 2\n3 2\n1 4\n"
TRIANGLE = "3\n0 1 2\n2 0 1\n1 2 0\n"
BROKEN = "3\n0 5 1\n1 0 1\n1 1 0\n"


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_solve_nwfs_exact(capsys, write_file):
    code, out = run(capsys, "solve-nwfs", "--exact", write_file("jobs.txt", TWO_JOBS))
    assert code == 0
    assert out == "order: 2 1\nmakespan: 7\n"


def test_solve_nwfs_approx_writes_trace(capsys, write_file, tmp_path):
    trace = tmp_path / "run.json"
    code, out = run(capsys, "solve-nwfs", write_file("jobs.txt", TWO_JOBS), "--trace", str(trace))
    assert code == 0
    makespan = int(out.splitlines()[1].split(":")[1])
    assert 7 <= makespan <= 14
    document = json.loads(trace.read_text())
    assert document["kind"] == "approx-run"
    assert document["approx_run"]["guarantee"] == 2


def test_trace_with_exact_is_a_usage_error(capsys, write_file):
    code, _ = run(capsys, "solve-nwfs", "--exact", "--trace", "t.json", write_file("jobs.txt", TWO_JOBS))
    assert code == 1


@pytest.mark.parametrize("method", ["--exact", "--fgm"])
def test_solve_atsp(capsys, write_file, method):
    code, out = run(capsys, "solve-atsp", method, write_file("g.txt", TRIANGLE))
    assert code == 0
    assert out == "tour: 1 2 3\ncost: 3\n"


def test_solve_atsp_path_instance(capsys, write_file):
    path_file = write_file("p.txt", "ATSPP 3 1\n" + TRIANGLE)
    code, out = run(capsys, "solve-atsp", "--exact", path_file)
    assert code == 0
    assert out == "path: 3 2 1\ncost: 4\n"
    assert run(capsys, "solve-atsp", "--fgm", path_file)[0] == 1


def test_solve_atsp_via_flowshop(capsys, write_file):
    graph = write_file("g.txt", TRIANGLE)
    assert run(capsys, "solve-atsp", "--via-flowshop", graph)[0] == 1
    assert run(capsys, "solve-atsp", "--epsilon", "1", graph)[0] == 1
    code, out = run(
        capsys, "solve-atsp", "--via-flowshop", "--epsilon", "1",
        "--replication-copies", "1", "--copies", "1", graph,
    )
    assert code == 0
    assert out.startswith("tour: ")


def test_verify(capsys, write_file):
    assert run(capsys, "verify", write_file("g.txt", TRIANGLE)) == (0, "ok: atsp semimetric on 3 vertices\n")
    assert run(capsys, "verify", write_file("b.txt", BROKEN)) == (3, "violation: triangle at vertices 1 3 2\n")
    code, out = run(capsys, "verify", write_file("jobs.txt", TWO_JOBS))
    assert code == 0
    assert out == "ok: flowshop instance with 2 jobs on 2 machines\nlower bound: 6\n"


def test_parse_errors_exit_2(capsys, write_file):
    code = main(["solve-nwfs", write_file("short.txt", "2 2\n3 2\n")])
    assert code == 2
    assert "line 2" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [[], ["solve-nwfs"], ["solve-nwfs", "--exact", "--approx", "x"], ["gen", "atsp"], ["reduce"], ["bench", "--suite", "all"]],
)
def test_usage_errors_exit_1(capsys, argv):
    assert main(argv) == 1


def test_version(capsys):
    assert main(["--version"]) == 0


def test_flowshop_to_atsp_and_back(capsys, write_file, tmp_path):
    trace = str(tmp_path / "trace.json")
    code, out = run(capsys, "reduce", "nwfs-to-atsp", write_file("jobs.txt", TWO_JOBS), "--trace", trace)
    assert code == 0
    assert out == "3\n0 0 0\n5 0 4\n5 2 0\n"
    code, out = run(capsys, "backmap", trace, write_file("tour.txt", "tour: 1 3 2\n"))
    assert (code, out) == (0, "order: 2 1\nmakespan: 7\n")


def test_atsp_to_flowshop_round_trip(capsys, write_file, tmp_path):
    trace, jobs, schedule = (str(tmp_path / name) for name in ("trace.json", "jobs.txt", "schedule.txt"))
    code, _ = run(
        capsys, "reduce", "atsp-to-nwfs", write_file("g.txt", TRIANGLE), "--epsilon", "1",
        "--replication-copies", "2", "--copies", "2", "--trace", trace, "-o", jobs,
    )
    assert code == 0
    assert run(capsys, "solve-nwfs", "--exact", jobs, "-o", schedule)[0] == 0
    assert "makespan: 497" in open(schedule).read()
    assert run(capsys, "backmap", trace, schedule) == (0, "tour: 1 2 3\ncost: 3\n")


def test_atsp_to_flowshop_rejects_non_semimetric(capsys, write_file):
    assert main(["reduce", "atsp-to-nwfs", write_file("b.txt", BROKEN), "--epsilon", "1"]) == 3


def test_backmap_needs_a_reduction_trace(capsys, write_file, tmp_path):
    trace = str(tmp_path / "run.json")
    run(capsys, "solve-nwfs", write_file("jobs.txt", TWO_JOBS), "--trace", trace)
    assert main(["backmap", trace, write_file("s.txt", "order: 1 2\n")]) == 1


def test_gen_is_deterministic_and_valid(capsys, write_file):
    first = run(capsys, "gen", "atsp", "--n", "4", "--seed", "3")[1]
    second = run(capsys, "gen", "atsp", "--n", "4", "--seed", "3")[1]
    assert first == second
    assert run(capsys, "verify", write_file("g.txt", first))[0] == 0
    jobs = run(capsys, "gen", "nwfs", "--n", "3", "--m", "2", "--seed", "3")[1]
    assert jobs.splitlines()[0] == "3 2"


def test_embed(capsys, write_file):
    code, out = run(capsys, "embed", write_file("g.txt", "2\n0 2\n1 0\n"))
    assert code == 0
    assert out == "2 12\n0 0 0 1 1 1 0 1 1 1 0 0\n0 0 1 1 1 0 0 0 0 1 1 1\n"


def test_bench_writes_tsv(capsys, tmp_path):
    report = tmp_path / "fgm.tsv"
    assert main(["bench", "--suite", "fgm", "--scale", "0.01", "-o", str(report)]) == 0
    assert report.read_text().startswith("criterion\tinstance_id\t")
