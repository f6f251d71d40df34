import numpy as np
import pytest
from click.testing import CliRunner

from echosim import metrics
from echosim.cli import main
from echosim.graph import Graph
from echosim.io import load_density_map, load_edge_list, save_edge_list, save_opinions


@pytest.fixture
def runner():
    return CliRunner()


def _invoke(runner, args):
    return runner.invoke(main, args, catch_exceptions=False)


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------


def test_generate_er(runner, tmp_path):
    res = _invoke(runner, ["generate", "--kind", "er", "--n", "200", "--avg-k", "8",
                           "--seed", "7", "--outdir", str(tmp_path)])
    assert res.exit_code == 0
    loaded = load_edge_list(tmp_path / "edges.txt")
    assert loaded.graph.node_count == 200
    manifest = (tmp_path / "manifest.txt").read_text()
    assert "seed 7" in manifest


def test_generate_lattice(runner, tmp_path):
    res = _invoke(runner, ["generate", "--kind", "lattice2d", "--side", "32",
                           "--outdir", str(tmp_path)])
    assert res.exit_code == 0
    assert load_edge_list(tmp_path / "edges.txt").graph.node_count == 1024


def test_generate_missing_kind_usage_error(runner, tmp_path):
    res = runner.invoke(main, ["generate", "--n", "100", "--outdir", str(tmp_path)])
    assert res.exit_code == 2


def test_bad_flag_usage_error(runner):
    res = runner.invoke(main, ["run", "--transmission", "bogus"])
    assert res.exit_code == 2


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------


def test_run_inline_generator(runner, tmp_path):
    res = _invoke(runner, [
        "run", "--kind", "er", "--n", "100", "--avg-k", "6",
        "--transmission", "uni", "--distribution", "d2", "--phi", "1.47",
        "--rewiring", "--iterations", "30000", "--checkpoint-interval", "10000",
        "--seed", "1", "--keep-states", "--outdir", str(tmp_path),
    ])
    assert res.exit_code == 0
    assert "bc " in res.output and "outcome " in res.output
    assert (tmp_path / "results.csv").exists()
    assert (tmp_path / "checkpoints.csv").exists()
    assert (tmp_path / "density.txt").exists()
    assert (tmp_path / "final_edges.txt").exists()
    assert (tmp_path / "final_opinions.txt").exists()


def test_run_zero_iterations_initial_metrics(runner, tmp_path):
    res = _invoke(runner, [
        "run", "--kind", "er", "--n", "100", "--avg-k", "6",
        "--transmission", "pol", "--distribution", "d1", "--iterations", "0",
        "--seed", "5", "--outdir", str(tmp_path),
    ])
    assert res.exit_code == 0
    bc = float(res.output.split("bc ")[1].splitlines()[0])
    assert 0.3 < bc < 0.8  # uniform-ish initial opinions


def test_run_deterministic_outputs(runner, tmp_path):
    args = [
        "run", "--kind", "er", "--n", "80", "--avg-k", "6",
        "--transmission", "uni", "--distribution", "d2", "--phi", "1.0",
        "--iterations", "20000", "--checkpoint-interval", "5000", "--seed", "3",
    ]
    out1, out2 = tmp_path / "a", tmp_path / "b"
    r1 = _invoke(runner, args + ["--outdir", str(out1)])
    r2 = _invoke(runner, args + ["--outdir", str(out2)])
    assert r1.output == r2.output
    for name in ("results.csv", "checkpoints.csv", "density.txt"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_run_from_graph_file(runner, tmp_path):
    gen = _invoke(runner, ["generate", "--kind", "er", "--n", "60", "--avg-k", "4",
                           "--seed", "2", "--outdir", str(tmp_path)])
    assert gen.exit_code == 0
    res = _invoke(runner, [
        "run", "--graph", str(tmp_path / "edges.txt"),
        "--transmission", "sim", "--distribution", "d3",
        "--iterations", "10000", "--seed", "4", "--outdir", str(tmp_path / "out"),
    ])
    assert res.exit_code == 0


# ---------------------------------------------------------------------------
# sweep / preset
# ---------------------------------------------------------------------------


def _sweep_args(outdir, parallelism):
    return [
        "sweep", "--kind", "er", "--n", "60", "--avg-k", "4",
        "--transmission", "uni", "--distribution", "d2",
        "--phi-count", "2", "--phi-min", "0.5", "--phi-max", "1.5",
        "--replicates", "2", "--seed-base", "11",
        "--max-iterations", "20000", "--min-iterations", "10000",
        "--checkpoint-interval", "5000", "--rewiring",
        "--parallelism", str(parallelism), "--outdir", str(outdir),
    ]


def test_sweep_parallelism_byte_identical(runner, tmp_path):
    r1 = _invoke(runner, _sweep_args(tmp_path / "p1", 1))
    r8 = _invoke(runner, _sweep_args(tmp_path / "p8", 8))
    assert r1.exit_code == 0 and r8.exit_code == 0
    assert (tmp_path / "p1/results.csv").read_bytes() == (tmp_path / "p8/results.csv").read_bytes()
    assert (tmp_path / "p1/checkpoints.csv").read_bytes() == (tmp_path / "p8/checkpoints.csv").read_bytes()


def test_preset_list_and_unknown(runner, tmp_path):
    listing = _invoke(runner, ["preset", "list"])
    assert listing.exit_code == 0
    assert "sbm-bistable" in listing.output
    bad = runner.invoke(main, ["preset", "definitely-not-a-preset",
                               "--outdir", str(tmp_path)])
    assert bad.exit_code == 2
    assert "sbm-bistable" in bad.output  # available presets are listed


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------


def _two_clique_fixture(tmp_path):
    g = Graph(20)
    for base in (0, 10):
        for i in range(10):
            for j in range(i + 1, 10):
                g.add_edge(base + i, base + j)
    save_edge_list(g, tmp_path / "edges.txt")
    save_opinions(np.array([-0.8] * 10 + [0.8] * 10), tmp_path / "op.txt")


def test_analyze_two_cliques(runner, tmp_path):
    _two_clique_fixture(tmp_path)
    res = _invoke(runner, ["analyze", "--graph", str(tmp_path / "edges.txt"),
                           "--opinions", str(tmp_path / "op.txt"),
                           "--outdir", str(tmp_path / "out")])
    assert res.exit_code == 0
    assert "outcome echo_chamber" in res.output
    grid = load_density_map(tmp_path / "out" / "density.txt")
    assert grid.total == 20


def test_analyze_uniform_er_bc_matches_oracle(runner, tmp_path):
    rng = np.random.default_rng(9)
    from echosim.graph import generate_er

    g = generate_er(400, 8, seed=3)
    op = rng.uniform(-1, 1, 400)
    save_edge_list(g, tmp_path / "edges.txt")
    save_opinions(op, tmp_path / "op.txt")
    res = _invoke(runner, ["analyze", "--graph", str(tmp_path / "edges.txt"),
                           "--opinions", str(tmp_path / "op.txt"),
                           "--outdir", str(tmp_path / "out")])
    assert res.exit_code == 0
    printed = float(res.output.split("bc ")[1].splitlines()[0])
    assert printed == pytest.approx(metrics.bimodality_coefficient(op), rel=1e-5)


def test_analyze_missing_file_usage_error(runner, tmp_path):
    res = runner.invoke(main, ["analyze", "--graph", str(tmp_path / "nope.txt"),
                               "--opinions", str(tmp_path / "nope2.txt")])
    assert res.exit_code == 2


def test_analyze_bad_content_runtime_failure(runner, tmp_path):
    (tmp_path / "edges.txt").write_text("0 1\n")
    (tmp_path / "op.txt").write_text("0 5.0\n1 0.0\n")  # opinion out of range
    res = runner.invoke(main, ["analyze", "--graph", str(tmp_path / "edges.txt"),
                               "--opinions", str(tmp_path / "op.txt"),
                               "--outdir", str(tmp_path / "out")])
    assert res.exit_code == 1


def test_outdir_from_environment(runner, tmp_path):
    res = runner.invoke(main, ["generate", "--kind", "er", "--n", "50",
                               "--avg-k", "4", "--seed", "1"],
                        env={"ECHOSIM_OUTDIR": str(tmp_path / "envout")},
                        catch_exceptions=False)
    assert res.exit_code == 0
    assert (tmp_path / "envout" / "edges.txt").exists()


def test_run_bc_recomputable_from_archived_state(runner, tmp_path):
    res = _invoke(runner, [
        "run", "--kind", "er", "--n", "100", "--avg-k", "6",
        "--transmission", "uni", "--distribution", "d2", "--phi", "1.2",
        "--rewiring", "--iterations", "40000", "--checkpoint-interval", "20000",
        "--seed", "9", "--keep-states", "--outdir", str(tmp_path),
    ])
    assert res.exit_code == 0
    from echosim.harness import read_results_csv
    from echosim.io import load_opinions

    row = read_results_csv(tmp_path / "results.csv")[0]
    opinions = load_opinions(tmp_path / "final_opinions.txt", n=100)
    recomputed = metrics.bimodality_coefficient(opinions)
    assert float(row["bc"]) == pytest.approx(recomputed, abs=1e-6)
