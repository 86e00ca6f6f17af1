import shutil

from partialaco.cli import main


def test_solve(data_dir, tmp_path, capsys):
    conv = tmp_path / "c.csv"
    tour = tmp_path / "tour.txt"
    rc = main(["solve", str(data_dir / "berlin52.tsp"), "--iters", "40", "--ants", "4", "--workers", "1",
               "--optima", str(data_dir / "optima.txt"), "--convergence-csv", str(conv),
               "--tour-out", str(tour), "--max-mod", "0.2", "--two-opt-prob", "0.05"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "best length" in out and "error" in out
    assert conv.read_text().startswith("elapsed_s,g_best_length,iterations_done")
    assert sorted(int(x) for x in tour.read_text().split()) == list(range(52))


def test_solve_modes(data_dir, capsys):
    for mode in ("paco", "classic"):
        assert main(["solve", str(data_dir / "berlin52.tsp"), "--mode", mode, "--iters", "5",
                     "--ants", "2", "--workers", "1"]) == 0
    assert "classic_aco" in capsys.readouterr().out


def test_errors_give_nonzero_exit(tmp_path, capsys):
    assert main(["solve", str(tmp_path / "missing.tsp")]) != 0
    bad = tmp_path / "bad.tsp"
    bad.write_text("NAME : x\nDIMENSION : 4\nEDGE_WEIGHT_TYPE : GEO\nNODE_COORD_SECTION\n")
    assert main(["solve", str(bad)]) != 0
    assert "line 4" in capsys.readouterr().err
    assert main(["solve", str(bad).replace("bad", "missing"), "--ants", "0"]) != 0


def test_bench_command(data_dir, tmp_path, capsys):
    shutil.copy(data_dir / "berlin52.tsp", tmp_path)
    cfg = tmp_path / "s.toml"
    cfg.write_text('instances = ["berlin52.tsp"]\n[grid]\nmode = ["partial"]\n')
    rc = main(["bench", str(cfg), "--trials", "2", "--iters", "10", "--ants", "2", "--workers", "1",
               "--out", str(tmp_path / "out")])
    out = capsys.readouterr().out
    assert rc == 0
    assert "berlin52" in out and (tmp_path / "out" / "rows.csv").exists()


def test_preset_command(data_dir, tmp_path, capsys):
    assert main(["preset", "--list"]) == 0
    assert "table8" in capsys.readouterr().out
    shutil.copy(data_dir / "berlin52.tsp", tmp_path)
    rc = main(["preset", "table1", "--data-dir", str(tmp_path), "--instances", "berlin52",
               "--trials", "1", "--iters", "5", "--ants", "2", "--workers", "1"])
    assert rc == 0
    assert main(["preset", "table1", "--data-dir", str(tmp_path)]) != 0  # pcb442.tsp etc. absent
