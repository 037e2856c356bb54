import csv
import os

from gbrw.cli import main


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def read_csv(path):
    with open(path, newline="") as handle:
        return list(csv.reader(handle))


def test_rules_listing(capsys):
    code, out, _ = run(["rules"], capsys)
    assert code == 0
    assert "window-max" in out
    assert "modified-levy" in out


def test_rules_describe(capsys, tmp_path):
    code, out, _ = run(
        ["rules", "--rule", "builtin:levy", "--out", str(tmp_path)], capsys
    )
    assert code == 0
    assert "multiplier 3" in out


def test_convert_levy_step3(capsys, tmp_path):
    code, out, _ = run(
        ["convert", "--rule", "builtin:levy", "--step", "3", "--out", str(tmp_path)],
        capsys,
    )
    assert code == 0
    assert "{2,3}" in out and "round-trip exact: True" in out
    rows = read_csv(tmp_path / "beta_members.csv")
    assert rows[0] == ["multiplier", "member"]
    assert [r[1] for r in rows[1:]] == ["{1,2}", "{1,3}", "{2,3}"]
    table_rows = read_csv(tmp_path / "truth_table.csv")
    assert len(table_rows) == 1 + 8


def test_gaussian_check_window(capsys, tmp_path):
    code, out, _ = run(
        [
            "gaussian-check",
            "--rule", "builtin:window-max:3",
            "--horizon", "256",
            "--out", str(tmp_path),
        ],
        capsys,
    )
    assert code == 0
    assert "stabilized at 3/2^2" in out
    assert "verdict: converged" in out
    assert os.path.exists(tmp_path / "rho_seq.csv")


def test_moments_emits_csvs(capsys, tmp_path):
    code, out, _ = run(
        [
            "moments",
            "--rule", "builtin:extended-brw:prefix:0.5",
            "--horizon", "64",
            "--out", str(tmp_path),
        ],
        capsys,
    )
    # short horizon: double cesaro tail has not settled below the tolerance
    assert code in (0, 2)
    rows = read_csv(tmp_path / "rho_seq.csv")
    assert rows[0] == ["k", "rho_exact", "rho", "cesaro"]
    assert rows[1][1] == "1/2^0"  # step 1 empty product
    assert rows[2][1] == "0/2^0"
    theta = read_csv(tmp_path / "theta_grid.csv")
    assert theta[0] == ["k", "l", "theta_exact", "theta"]
    assert len(theta) == 1 + 64 * 65 // 2
    assert os.path.exists(tmp_path / "set_diag.csv")


def test_simulate_single_path(capsys, tmp_path):
    code, out, _ = run(
        [
            "simulate",
            "--rule", "builtin:brw",
            "--length", "50",
            "--reps", "1",
            "--seed", "11",
            "--out", str(tmp_path),
        ],
        capsys,
    )
    assert code == 0
    rows = read_csv(tmp_path / "paths.csv")
    assert rows[0] == ["k", "x", "y"]
    assert len(rows) == 52
    assert rows[1] == ["0", "0", "0"]


def test_simulate_replicates(capsys, tmp_path):
    code, out, _ = run(
        [
            "simulate",
            "--rule", "builtin:window-max:2",
            "--length", "2000",
            "--reps", "40",
            "--seed", "5",
            "--out", str(tmp_path),
        ],
        capsys,
    )
    assert code == 0
    rows = read_csv(tmp_path / "cov_summary.csv")
    assert len(rows) == 41
    assert "mean" in out


def test_arcsine_command(capsys, tmp_path):
    code, out, _ = run(
        [
            "arcsine",
            "--length", "2000",
            "--reps", "200",
            "--seed", "7",
            "--tolerance", "0.2",
            "--out", str(tmp_path),
        ],
        capsys,
    )
    assert code == 0
    assert "KS distance" in out
    rows = read_csv(tmp_path / "ks_report.csv")
    assert rows[0] == ["x", "empirical_cdf", "reference_cdf"]
    assert len(rows) == 202


def test_ergodic_check_levy_fails(capsys, tmp_path):
    code, out, _ = run(
        [
            "ergodic-check",
            "--rule", "builtin:levy",
            "--horizon", "8",
            "--out", str(tmp_path),
        ],
        capsys,
    )
    assert code == 2
    assert "first failure at step 3" in out
    assert os.path.exists(tmp_path / "orbits.csv")


def test_ergodic_check_modified_levy_passes(capsys, tmp_path):
    code, out, _ = run(
        [
            "ergodic-check",
            "--rule", "builtin:modified-levy",
            "--horizon", "12",
            "--out", str(tmp_path),
        ],
        capsys,
    )
    assert code == 0
    assert "closed form" in out


def test_ergodic_check_repair_flag(capsys, tmp_path):
    code, out, _ = run(
        [
            "ergodic-check",
            "--rule", "builtin:levy",
            "--horizon", "8",
            "--repair",
            "--out", str(tmp_path),
        ],
        capsys,
    )
    assert code == 2
    assert "repaired rule repair(levy): ergodic up to 8 = True" in out


def test_beta_array_outputs(capsys, tmp_path):
    code, out, _ = run(
        ["beta-array", "--horizon", "24", "--out", str(tmp_path)], capsys
    )
    assert code == 0
    rows = read_csv(tmp_path / "beta_array.csv")
    assert rows[0] == ["n", "k", "beta"]
    assert len(rows) == 1 + sum(n + 1 for n in range(1, 25))
    ppm = (tmp_path / "beta_array.ppm").read_bytes()
    assert ppm.startswith(b"P6\n25 24\n255\n")
    assert len(ppm) == len(b"P6\n25 24\n255\n") + 25 * 24 * 3


def test_rule_document_via_cli(capsys, tmp_path):
    doc = tmp_path / "rule.txt"
    doc.write_text("psi0: -1\ngenerator: builtin max\n")
    code, out, _ = run(
        ["convert", "--rule", str(doc), "--step", "4", "--out", str(tmp_path)], capsys
    )
    assert code == 0
    assert "{1,2,3,4}" in out


def test_bad_rule_spec_is_usage_error(capsys, tmp_path):
    code, _, err = run(
        ["convert", "--rule", "builtin:bogus", "--step", "2", "--out", str(tmp_path)],
        capsys,
    )
    assert code == 1
    assert "rule specification error" in err


def test_capacity_error_is_usage_error(capsys, tmp_path):
    code, _, err = run(
        ["convert", "--rule", "builtin:levy", "--step", "30", "--out", str(tmp_path)],
        capsys,
    )
    assert code == 1
    assert "capacity" in err


def test_selftest_passes(capsys, tmp_path):
    code, out, _ = run(["selftest", "--seed", "3", "--out", str(tmp_path)], capsys)
    assert code == 0
    assert "all 7 suites passed" in out
