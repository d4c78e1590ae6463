import os

import numpy as np
import pytest
import scipy.io
import scipy.sparse as sp

from memwave import (
    Grid1D,
    InitialField1D,
    MemoryOrder,
    assemble_1d,
    build_basis,
    coupling_matrix,
    solve_1d,
    source_weights,
)
from memwave.cli import ConfigError, RunConfig, main, run


def read_csv(path):
    meta, rows = [], []
    header = None
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                meta.append(line)
            elif header is None:
                header = line
            else:
                rows.append(line.split(","))
    return meta, header, rows


def solve1d_args(tmp_path, **extra):
    args = [
        "solve1d", "--alpha", "1.5", "--T", "2.0", "--n", "3",
        "--xmin", "-10", "--xmax", "10", "--m", "21",
        "--output", str(tmp_path / "out.csv"),
    ]
    for k, v in extra.items():
        args += [f"--{k}", str(v)]
    return args


class TestExitCodes:
    def test_success(self, tmp_path, capsys):
        assert main(solve1d_args(tmp_path)) == 0
        assert (tmp_path / "out.csv").exists()
        assert "solve1d: wrote" in capsys.readouterr().out

    def test_invalid_alpha(self, tmp_path, capsys):
        assert main(solve1d_args(tmp_path, alpha=2.5)) == 1
        assert "invalid configuration" in capsys.readouterr().err

    def test_unknown_subcommand(self, capsys):
        assert main(["shred"]) == 1
        assert main([]) == 1

    def test_malformed_config_file(self, tmp_path, capsys):
        bad = tmp_path / "bad.cfg"
        bad.write_text("alpha 1.5\n")
        assert main(["solve1d", "--config", str(bad)]) == 1
        bad.write_text("bogus_key=3\n")
        assert main(["solve1d", "--config", str(bad)]) == 1
        bad.write_text("alpha=not-a-number\n")
        assert main(["solve1d", "--config", str(bad)]) == 1

    def test_missing_config_file(self, tmp_path, capsys):
        assert main(["solve1d", "--config", str(tmp_path / "absent.cfg")]) == 1

    def test_solver_failure(self, tmp_path, capsys):
        code = main(solve1d_args(tmp_path, method="bicg", **{"max-iter": 1}))
        assert code == 2
        assert "solver failed" in capsys.readouterr().err

    def test_io_failure(self, tmp_path, capsys):
        blocker = tmp_path / "blocker"
        blocker.write_text("")
        args = solve1d_args(tmp_path)
        args[-1] = str(blocker / "out.csv")
        assert main(args) == 3
        assert "I/O failure" in capsys.readouterr().err


class TestOutputs:
    def test_repeat_runs_byte_identical(self, tmp_path, capsys, monkeypatch):
        # same config into two directories, so the echoed config matches too
        d1, d2 = tmp_path / "one", tmp_path / "two"
        d1.mkdir(), d2.mkdir()
        args = solve1d_args(tmp_path)
        args[-1] = "run.csv"
        monkeypatch.setenv("MEMWAVE_OUTDIR", str(d1))
        assert main(args) == 0
        monkeypatch.setenv("MEMWAVE_OUTDIR", str(d2))
        assert main(args) == 0
        assert (d1 / "run.csv").read_bytes() == (d2 / "run.csv").read_bytes()

    def test_values_round_trip_exactly(self, tmp_path, capsys):
        out = tmp_path / "out.csv"
        assert main(solve1d_args(tmp_path, times="0.0,2.0")) == 0
        meta, header, rows = read_csv(out)
        assert header == "t,x,f"
        grid = Grid1D(-10.0, 10.0, 21)
        field = solve_1d(MemoryOrder(1.5), 2.0, 3, grid, InitialField1D.gaussian(1.0))
        expected = np.concatenate([field.reconstruct(0.0), field.reconstruct(2.0)])
        parsed = np.array([float(r[2]) for r in rows])
        assert np.array_equal(parsed, expected)

    def test_metadata_echoes_config(self, tmp_path, capsys):
        out = tmp_path / "out.csv"
        assert main(solve1d_args(tmp_path)) == 0
        meta, _, _ = read_csv(out)
        assert meta[0] == "# memwave solve1d"
        assert "# alpha=1.5" in meta
        assert "# m=21" in meta
        assert any(line.startswith("# report: method=") for line in meta)

    def test_outdir_env_applies_to_relative_paths(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("MEMWAVE_OUTDIR", str(tmp_path))
        args = solve1d_args(tmp_path)
        args[-1] = "rel.csv"
        assert main(args) == 0
        assert (tmp_path / "rel.csv").exists()

    def test_dump_matrix_round_trips(self, tmp_path, capsys):
        mtx = tmp_path / "system.mtx"
        assert main(solve1d_args(tmp_path, **{"dump-matrix": str(mtx)})) == 0
        first = mtx.read_text().splitlines()[0]
        assert first == "%%MatrixMarket matrix coordinate real general"
        loaded = sp.csr_matrix(scipy.io.mmread(mtx))
        basis = build_basis(2.0, 3)
        coupling = coupling_matrix(basis, MemoryOrder(1.5))
        system = assemble_1d(coupling, source_weights(basis),
                             InitialField1D.gaussian(1.0), Grid1D(-10.0, 10.0, 21))
        diff = (loaded - system.matrix.csr).tocsr()
        diff.eliminate_zeros()
        assert diff.nnz == 0


class TestConfigHandling:
    def test_to_from_text_round_trip(self):
        config = RunConfig(subcommand="solve2d", alpha=1.75, m=41, n=6,
                           times=(0.0, 1.5), precond=False, output="x.csv")
        assert RunConfig.from_text(config.to_text()) == config

    def test_flags_override_config_file(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        base = RunConfig(alpha=1.25, m=31, n=3, T=2.0, x_min=-10.0, x_max=10.0)
        cfg.write_text(base.to_text())
        out = tmp_path / "out.csv"
        assert main(["solve1d", "--config", str(cfg), "--m", "41",
                     "--output", str(out)]) == 0
        meta, _, _ = read_csv(out)
        assert "# m=41" in meta
        assert "# alpha=1.25" in meta

    def test_config_comments_and_blanks_ignored(self):
        config = RunConfig.from_text("# a comment\n\nalpha=1.5\nm=31\n")
        assert config.alpha == 1.5 and config.m == 31

    def test_run_rejects_unknown_subcommand(self):
        with pytest.raises(ConfigError):
            run(RunConfig(subcommand="mystery"))


class TestSubcommands:
    def test_solve2d_writes_field_and_section(self, tmp_path, capsys):
        out = tmp_path / "field.csv"
        assert main(["solve2d", "--alpha", "1.5", "--T", "1.0", "--n", "2",
                     "--xmin", "-10", "--xmax", "10", "--m", "15",
                     "--output", str(out)]) == 0
        assert out.exists()
        meta, header, rows = read_csv(tmp_path / "field_section.csv")
        assert header == "x,f"
        assert len(rows) == 15

    def test_solve2d_anisotropic(self, tmp_path, capsys):
        out = tmp_path / "aniso.csv"
        assert main(["solve2d", "--alpha", "1.5", "--T", "1.0", "--n", "2",
                     "--xmin", "-12", "--xmax", "12", "--m", "15",
                     "--sigma1", "3.0", "--sigma2", "1.5",
                     "--output", str(out)]) == 0
        meta, _, _ = read_csv(out)
        assert "# sigma1=3.0" in meta

    def test_stochastic_requires_endpoint_order(self, tmp_path, capsys):
        assert main(["stochastic", "--alpha", "1.5", "--T", "1.0",
                     "--output", str(tmp_path / "s.csv")]) == 1

    def test_stochastic_run(self, tmp_path, capsys):
        out = tmp_path / "traj.csv"
        assert main(["stochastic", "--alpha", "2", "--T", "1.0", "--m", "41",
                     "--xmin", "-10", "--xmax", "10", "--steps", "4",
                     "--C", "0.1", "--seed", "7", "--output", str(out)]) == 0
        meta, header, rows = read_csv(out)
        assert "# steps=4" in meta
        assert header == "t,x,f"
        assert len(rows) == 5 * 41

    def test_validate_run(self, tmp_path, capsys):
        out = tmp_path / "val.csv"
        assert main(["validate", "--alpha", "1", "--T", "2.0", "--n", "6",
                     "--xmin", "-15", "--xmax", "15", "--m", "51",
                     "--output", str(out)]) == 0
        meta, header, rows = read_csv(out)
        assert header == "x,numeric,analytic,abs_error"
        assert any(line.startswith("# max_error=") for line in meta)
        assert "max error" in capsys.readouterr().out

    def test_validate_requires_endpoint_order(self, tmp_path, capsys):
        assert main(["validate", "--alpha", "1.5",
                     "--output", str(tmp_path / "v.csv")]) == 1

    def test_bench_reports_both_variants(self, tmp_path, capsys):
        out = tmp_path / "bench.csv"
        assert main(["bench", "--alpha", "1.5", "--T", "6.0", "--n", "4",
                     "--xmin", "-15", "--xmax", "15", "--m", "20",
                     "--output", str(out)]) == 0
        meta, header, rows = read_csv(out)
        assert header == "variant,N,iterations,residual,converged"
        assert [r[0] for r in rows] == ["bicg+precond", "bicg"]
        assert all(r[4] == "True" for r in rows)
        assert int(rows[0][2]) <= int(rows[1][2])
        assert any(line.startswith("# nnz=") for line in meta)
