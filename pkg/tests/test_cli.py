import json

import pytest

from qdriftlab.cli import EXIT_BOUND, EXIT_DOMAIN, EXIT_OK, EXIT_PARSE, main

HAM_TEXT = "1.0 ZZ\n0.5 XI\n-0.25 IY\n"
SMALL_HAM = "0.5 Z\n0.5 X\n"


@pytest.fixture
def ham_file(tmp_path):
    path = tmp_path / "h.txt"
    path.write_text(HAM_TEXT)
    return path


@pytest.fixture
def small_ham_file(tmp_path):
    path = tmp_path / "small.txt"
    path.write_text(SMALL_HAM)
    return path


class TestCompileCommand:
    def test_writes_circuit_and_prints_summary(self, ham_file, tmp_path, capsys):
        out = tmp_path / "c.circ"
        code = main([
            "compile", "--ham", str(ham_file), "--t", "1", "--eps", "1e-3",
            "--seed", "7", "--out", str(out),
        ])
        assert code == EXIT_OK
        summary = json.loads(capsys.readouterr().out)
        assert set(summary) >= {"N", "tau", "lambda", "mode", "seed"}
        assert summary["lambda"] == 1.75
        assert summary["mode"] == "exact"
        lines = out.read_text().splitlines()
        assert lines[0] == "# qdrift-circ v1"
        assert len(lines) == 4 + summary["N"]

    def test_reruns_are_byte_identical(self, ham_file, tmp_path):
        args = ["compile", "--ham", str(ham_file), "--t", "2", "--eps", "1e-2", "--seed", "99"]
        out1, out2 = tmp_path / "a.circ", tmp_path / "b.circ"
        assert main(args + ["--out", str(out1)]) == EXIT_OK
        assert main(args + ["--out", str(out2)]) == EXIT_OK
        assert out1.read_bytes() == out2.read_bytes()

    def test_controlled_emits_crot_and_same_count(self, ham_file, tmp_path, capsys):
        plain, ctrl = tmp_path / "p.circ", tmp_path / "c.circ"
        base = ["compile", "--ham", str(ham_file), "--t", "1", "--eps", "1e-2", "--seed", "4"]
        main(base + ["--out", str(plain)])
        n_plain = json.loads(capsys.readouterr().out)["N"]
        main(base + ["--controlled", "--out", str(ctrl)])
        summary = json.loads(capsys.readouterr().out)
        assert summary["N"] == n_plain
        assert summary["elementary"] == {"rotations": 2 * n_plain, "control_x": 2 * n_plain}
        body = ctrl.read_text().splitlines()[4:]
        assert all(ln.startswith("CROT ") for ln in body)

    def test_parse_error_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.txt"
        bad.write_text("x.y ZZ\n")
        code = main(["compile", "--ham", str(bad), "--t", "1", "--eps", "1e-3", "--seed", "1",
                     "--out", str(tmp_path / "o.circ")])
        assert code == EXIT_PARSE
        assert "line 1" in capsys.readouterr().err

    def test_missing_file_is_parse_error(self, tmp_path):
        code = main(["compile", "--ham", str(tmp_path / "nope.txt"), "--t", "1",
                     "--eps", "1e-3", "--seed", "1", "--out", str(tmp_path / "o.circ")])
        assert code == EXIT_PARSE

    def test_domain_error_exit_code(self, ham_file, tmp_path):
        code = main(["compile", "--ham", str(ham_file), "--t", "-1", "--eps", "1e-3",
                     "--seed", "1", "--out", str(tmp_path / "o.circ")])
        assert code == EXIT_DOMAIN

    def test_outdir_env_var(self, ham_file, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("QDRIFTLAB_OUTDIR", str(tmp_path / "results"))
        code = main(["compile", "--ham", str(ham_file), "--t", "1", "--eps", "1e-2",
                     "--seed", "1", "--out", "run.circ"])
        assert code == EXIT_OK
        assert (tmp_path / "results" / "run.circ").exists()


class TestCostCommand:
    def test_profile_input_row_shape(self, capsys):
        code = main(["cost", "--L", "10", "--Lambda", "1", "--lambda", "10",
                     "--t", "1", "--eps", "1e-3"])
        assert code == EXIT_OK
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "method,order,variant,r,gates,bound,t,eps,L,Lambda,lambda"
        assert len(lines) == 1 + 9
        assert all(len(ln.split(",")) == 11 for ln in lines)

    def test_qdrift_row_uses_exact_count(self, capsys):
        from qdriftlab.compiler import gate_count_exact

        main(["cost", "--L", "10", "--Lambda", "1", "--lambda", "10", "--t", "1", "--eps", "1e-3"])
        lines = capsys.readouterr().out.strip().splitlines()
        qdrift_row = next(ln for ln in lines[1:] if ln.startswith("qdrift,"))
        assert int(qdrift_row.split(",")[4]) == gate_count_exact(10.0, 1.0, 1e-3)

    def test_json_format(self, capsys):
        code = main(["cost", "--L", "2", "--Lambda", "1", "--lambda", "1.5",
                     "--t", "1", "--eps", "1e-3", "--format", "json"])
        assert code == EXIT_OK
        rows = json.loads(capsys.readouterr().out)
        assert len(rows) == 9
        assert rows[0]["method"] == "qdrift"

    def test_ham_input_with_fairness(self, tmp_path, capsys):
        path = tmp_path / "h.txt"
        path.write_text("0.5 ZZ\n0.3 XI\n0.0005 IY\n")
        main(["cost", "--ham", str(path), "--t", "1", "--eps", "1e-3"])
        with_fair = capsys.readouterr().out.strip().splitlines()
        main(["cost", "--ham", str(path), "--t", "1", "--eps", "1e-3", "--no-fairness"])
        without = capsys.readouterr().out.strip().splitlines()
        # fairness truncation drops the 5e-4 term, so L differs
        assert with_fair[1].split(",")[8] == "2"
        assert without[1].split(",")[8] == "3"

    def test_requires_profile_or_ham(self):
        assert main(["cost", "--t", "1", "--eps", "1e-3"]) == EXIT_DOMAIN


class TestSweepCommand:
    def test_grid_shape_and_ascending_t(self, capsys):
        code = main(["sweep", "--L", "4", "--Lambda", "1", "--lambda", "2",
                     "--t-min", "0.1", "--t-max", "100", "--points", "7", "--eps", "1e-3"])
        assert code == EXIT_OK
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 1 + 7 * 9
        ts = [float(ln.split(",")[6]) for ln in lines[1:]]
        assert ts == sorted(ts)

    def test_crossover_row_appended(self, capsys):
        code = main(["sweep", "--L", "100", "--Lambda", "1", "--lambda", "10",
                     "--t-min", "1", "--t-max", "1e6", "--points", "13",
                     "--eps", "1e-3", "--crossover"])
        assert code == EXIT_OK
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 1 + 13 * 9 + 1
        assert lines[-1].startswith("crossover,")

    def test_huge_t_serializes_log10_and_overflow(self, capsys):
        code = main(["sweep", "--L", "10", "--Lambda", "1", "--lambda", "10",
                     "--t-min", "1", "--t-max", "1e10", "--points", "5", "--eps", "1e-3"])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "log10_gates=" in out
        assert "overflow" in out
        lines = out.strip().splitlines()
        assert all(len(ln.split(",")) == 11 for ln in lines)

    def test_deterministic_output(self, tmp_path):
        args = ["sweep", "--L", "4", "--Lambda", "1", "--lambda", "2", "--t-min", "0.5",
                "--t-max", "50", "--points", "5", "--eps", "1e-3"]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(args + ["--out", str(a)]) == EXIT_OK
        assert main(args + ["--out", str(b)]) == EXIT_OK
        assert a.read_bytes() == b.read_bytes()


class TestPhaseEstCommand:
    def test_single_pf_rows(self, capsys):
        code = main(["phase-est", "--lambda", "1", "--Lambda", "1", "--L", "100",
                     "--delta-e", "1e-4", "--pf", "0.05"])
        assert code == EXIT_OK
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "method,P_f,p_f_opt,eps_tot,m,total_gates,closed_form_gates,ratio"
        assert len(lines) == 3
        qdrift_row = lines[1].split(",")
        assert qdrift_row[0] == "qdrift"
        assert float(qdrift_row[6]) == pytest.approx(1.064e14, rel=5e-4)

    def test_grid_row_count_and_shared_ratio(self, capsys):
        code = main(["phase-est", "--lambda", "1", "--Lambda", "1", "--L", "50",
                     "--delta-e", "1e-4", "--pf-min", "1e-3", "--pf-max", "1e-1",
                     "--pf-points", "20"])
        assert code == EXIT_OK
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 1 + 40
        # per P_f, both method rows carry the same trotter/qdrift ratio
        for i in range(1, len(lines), 2):
            assert lines[i].split(",")[7] == lines[i + 1].split(",")[7]

    def test_ratio_is_trotter_over_qdrift(self, capsys):
        main(["phase-est", "--lambda", "1", "--Lambda", "1", "--L", "100",
              "--delta-e", "1e-4", "--pf", "0.05"])
        lines = capsys.readouterr().out.strip().splitlines()
        qd = float(lines[1].split(",")[5])
        tr = float(lines[2].split(",")[5])
        assert float(lines[1].split(",")[7]) == pytest.approx(tr / qd, rel=1e-12)

    def test_invalid_pf(self):
        assert main(["phase-est", "--lambda", "1", "--delta-e", "1e-4", "--pf", "1.5"]) \
            == EXIT_DOMAIN


class TestVerifyCommand:
    def test_builtin_suite_passes(self, capsys):
        assert main(["verify"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "VERIFY: PASS" in out
        assert "[FAIL]" not in out

    def test_csv_output(self, tmp_path):
        out = tmp_path / "rows.csv"
        assert main(["verify", "--out", str(out)]) == EXIT_OK
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "N,d_lower,bound,ratio"
        assert len(lines) > 1
        for ln in lines[1:]:
            n, d_lower, bound, _ = ln.split(",")
            assert float(d_lower) <= float(bound)

    def test_negative_control_flags_but_exits_zero(self, capsys):
        assert main(["verify", "--negative-control"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "[FAIL]" in out
        assert "degradation: present" in out

    def test_negative_control_strict_exits_bound(self, capsys):
        assert main(["verify", "--negative-control", "--strict"]) == EXIT_BOUND
        assert "VERIFY: FAIL" in capsys.readouterr().out

    def test_explicit_hamiltonian(self, small_ham_file, capsys):
        assert main(["verify", "--ham", str(small_ham_file)]) == EXIT_OK
        assert "bound small" in capsys.readouterr().out

    def test_single_term_distances_vanish(self, tmp_path, capsys):
        path = tmp_path / "one.txt"
        path.write_text("0.7 Z\n")
        out = tmp_path / "rows.csv"
        assert main(["verify", "--ham", str(path), "--out", str(out)]) == EXIT_OK
        report = capsys.readouterr().out
        assert "single term" in report
        for ln in out.read_text().strip().splitlines()[1:]:
            assert float(ln.split(",")[1]) <= 1e-12

    def test_tolerance_flag(self, small_ham_file, capsys):
        # an absurdly tight tolerance makes the TP/CP validity check fail
        assert main(["verify", "--ham", str(small_ham_file), "--tol", "1e-30"]) == EXIT_BOUND
        assert "channel validity" in capsys.readouterr().out


class TestTruncateCommand:
    def test_writes_canonical_truncation(self, tmp_path, capsys):
        path = tmp_path / "h.txt"
        path.write_text("0.5 ZZ\n0.3 XI\n0.001 IY\n0.0005 YY\n")
        out = tmp_path / "t.txt"
        code = main(["truncate", "--ham", str(path), "--eps", "0.002", "--out", str(out)])
        assert code == EXIT_OK
        summary = json.loads(capsys.readouterr().out)
        assert summary["L_after"] == 2
        assert summary["removed_weight"] == pytest.approx(0.0015, rel=1e-12)
        lines = out.read_text().splitlines()
        assert lines[0] == "# hamtxt v1"
        assert [ln.split()[1] for ln in lines[1:]] == ["ZZ", "XI"]

    def test_budget_too_large_is_domain_error(self, tmp_path):
        path = tmp_path / "h.txt"
        path.write_text("0.5 ZZ\n0.3 XI\n")
        assert main(["truncate", "--ham", str(path), "--eps", "0.9",
                     "--out", str(tmp_path / "t.txt")]) == EXIT_DOMAIN
