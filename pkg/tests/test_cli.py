"""End-to-end runs of the command-line front end.

Each test drives `run` with a real argument vector and asserts on the exit
code and the printed report.  A few tests shell out to the installed `forge`
script instead, where a fresh interpreter pins down stable-letter numbering
and lets two runs be compared byte for byte.
"""

import shutil
import subprocess

import pytest

from groupforge.cli import (EXIT_FALSE, EXIT_INPUT, EXIT_OK, EXIT_UNDECIDED,
                            run)

FP57 = """\
group g1 z5
group g2 z7
base b1 g1
base b2 g2
amalgam top b1 b2 shared 0=0
target top
"""

FP35 = """\
group g1 z3
group g2 z5
base b1 g1
base b2 g2
amalgam top b1 b2 shared 0=0
target top
"""

TWIST = """\
group gg s3xz2
base l gg
base r gg
amalgam top l r shared 0=0 1=1
target top
"""

HNN5 = """\
group g1 z5
base b g1
hnn top b assoc 0=0 1=2 2=4 3=1 4=3
target top
"""

HAT = """\
group h s3
hat top h
target top
"""

K4_TABLE = """\
group k4
order 4
table
0 1 2 3
1 0 3 2
2 3 0 1
3 2 1 0
"""


@pytest.fixture(scope="module")
def files(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")

    def put(name, text):
        p = d / name
        p.write_text(text)
        return str(p)

    return {
        "fp": put("fp.scheme", FP57),
        "z35": put("z35.scheme", FP35),
        "twist": put("twist.scheme", TWIST),
        "hnn5": put("hnn5.scheme", HNN5),
        "hat": put("hat.scheme", HAT),
        "b6": put("b6.scheme", "group g z6\nbase b g\ntarget b\n"),
        "bad_scheme": put("bad.scheme", "group g1 z5\nbase b1 nosuch\n"),
        "k4": put("k4.grp", K4_TABLE),
        "bad_grp": put("bad.grp", "group g order 3\ntable\n0 1 2\n1 2 0\n"),
        "eta22": put("eta22.hom", "src z2\ndst z2\nmap 0 1\n"),
        "eta24": put("eta24.hom", "hom eta\nsrc z2\ndst z4\nmap 0 2\n"),
        "badmap": put("badmap.hom", "src z2\ndst z4\nmap 0 9\n"),
        "baddir": put("baddir.hom", "src z2\nfrobnicate\nmap 0 1\n"),
    }


@pytest.fixture(scope="module")
def forge_bin():
    path = shutil.which("forge")
    assert path, "the forge console script is not on PATH"
    return path


def forge(capsys, *argv):
    code = run(list(argv))
    return code, capsys.readouterr().out


def field(out, key):
    """The value of the first `key: value` report line."""
    for ln in out.splitlines():
        if ln.startswith(key + ":"):
            return ln.split(":", 1)[1].strip()
    raise AssertionError(f"no {key!r} line in:\n{out}")


# -- group subcommands -------------------------------------------------------


def test_group_check(capsys):
    code, out = forge(capsys, "group", "check", "z6")
    assert code == EXIT_OK
    assert field(out, "order") == "6"
    assert field(out, "center-order") == "6"
    assert field(out, "valid") == "true"


def test_group_check_table_file(capsys, files):
    code, out = forge(capsys, "group", "check", files["k4"])
    assert code == EXIT_OK
    assert field(out, "order") == "4"


def test_group_check_bad_table_file(capsys, files):
    code, out = forge(capsys, "group", "check", files["bad_grp"])
    assert code == EXIT_INPUT
    assert out.startswith("error:")


def test_group_aut(capsys):
    code, out = forge(capsys, "group", "aut", "s3")
    assert code == EXIT_OK
    assert field(out, "aut-order") == "6"


def test_group_suitable_rejects_q8(capsys):
    code, out = forge(capsys, "group", "suitable", "q8")
    assert code == EXIT_FALSE
    assert field(out, "suitable") == "false"
    assert "witness: central element" in out


def test_group_complete(capsys):
    code, out = forge(capsys, "group", "complete", "s3")
    assert code == EXIT_OK
    assert field(out, "complete") == "true"
    code, out = forge(capsys, "group", "complete", "z4")
    assert code == EXIT_FALSE
    assert field(out, "complete") == "false"


def test_localization_identity_passes(capsys, files):
    code, out = forge(capsys, "group", "localization", "--eta",
                      files["eta22"])
    assert code == EXIT_OK
    assert field(out, "localization") == "true"


def test_localization_doubling_fails_with_witness(capsys, files):
    code, out = forge(capsys, "group", "localization", "--eta",
                      files["eta24"])
    assert code == EXIT_FALSE
    assert field(out, "localization") == "false"
    assert field(out, "witness") == "map with images (0, 0) has 2 extensions"


@pytest.mark.parametrize("name,msg", [
    ("badmap", "map image out of range"),
    ("baddir", "line 2: unknown directive"),
])
def test_bad_hom_files(capsys, files, name, msg):
    code, out = forge(capsys, "group", "localization", "--eta", files[name])
    assert code == EXIT_INPUT
    assert msg in out


def test_missing_hom_file(capsys):
    code, out = forge(capsys, "group", "localization", "--eta",
                      "/nonexistent/eta.hom")
    assert code == EXIT_INPUT
    assert out.startswith("error:")


def test_group_socle(capsys):
    code, out = forge(capsys, "group", "socle", "z2", "s3")
    assert code == EXIT_OK
    assert field(out, "socle-order") == "6"
    assert field(out, "socle-is-group") == "true"


# -- word and amalgam subcommands --------------------------------------------


def test_word_reduce_to_identity(capsys, files):
    code, out = forge(capsys, "word", "reduce", files["fp"],
                      "f0:1 f0:4 f1:3 f1:4")
    assert code == EXIT_OK
    assert field(out, "reduced") == "1"
    assert field(out, "syllables") == "0"
    assert field(out, "identity") == "true"


def test_word_invert(capsys, files):
    code, out = forge(capsys, "word", "invert", files["fp"], "f0:2 f1:3")
    assert code == EXIT_OK
    assert field(out, "inverse") == "f1:4 f0:3"


def test_scheme_error_reports_line(capsys, files):
    code, out = forge(capsys, "word", "reduce", files["bad_scheme"], "f0:1")
    assert code == EXIT_INPUT
    assert "line 2: unknown group 'nosuch'" in out


def test_amalgam_nf(capsys, files):
    code, out = forge(capsys, "amalgam", "nf", files["fp"],
                      "f1:1 f0:2 f1:6")
    assert code == EXIT_OK
    assert field(out, "canonical") == "f1:1 f0:2 f1:6"
    assert field(out, "weakly-cyclically-reduced") == "false"


def test_torsion_conj_success(capsys, files):
    code, out = forge(capsys, "amalgam", "torsion-conj", files["fp"],
                      "f1:5 f0:3 f1:2")
    assert code == EXIT_OK
    assert field(out, "order") == "5"
    assert field(out, "factor") == "0"
    assert field(out, "element") == "3"
    assert field(out, "conjugator") == "f1:2"


def test_torsion_conj_identity(capsys, files):
    code, out = forge(capsys, "amalgam", "torsion-conj", files["fp"], "1")
    assert code == EXIT_OK
    assert field(out, "order") == "1"
    assert field(out, "factor") == "none (identity)"


def test_torsion_conj_infinite_order_is_verdict_false(capsys, files):
    code, out = forge(capsys, "amalgam", "torsion-conj", files["fp"],
                      "f0:1 f1:1")
    assert code == EXIT_FALSE
    assert field(out, "conjugate-into-factor") == "false"
    assert "witness:" in out and "infinite order" in out


def test_centralizer_check(capsys, files):
    code, out = forge(capsys, "amalgam", "centralizer-check", files["fp"],
                      "f0:1", "--cand", "f0:2", "--cand", "f1:1")
    assert code == EXIT_OK
    assert field(out, "x-class") == "torsion"
    assert "cand 0: commutes=true consistent=true" in out
    assert "cand 1: commutes=false consistent=true" in out
    assert field(out, "ok") == "true"


# -- hnn subcommands ---------------------------------------------------------


def test_stable_letter_pinch_in_fresh_process(forge_bin, files):
    # a fresh interpreter always numbers the scheme's one letter t1
    r = subprocess.run(
        [forge_bin, "hnn", "reduce", files["hnn5"], "t1^-1 f0:1 t1"],
        capture_output=True, text=True)
    assert r.returncode == EXIT_OK
    assert "reduced: f0:2" in r.stdout
    assert "letters: 0" in r.stdout


def test_hnn_reduce_rejects_amalgam_words_with_letters(capsys, files):
    code, out = forge(capsys, "hnn", "reduce", files["fp"], "f0:1")
    assert code == EXIT_INPUT
    assert "not an extension" in out


def test_make_conjugate(capsys, files):
    code, out = forge(capsys, "hnn", "make-conjugate", files["fp"],
                      "f0:1", "f0:2")
    assert code == EXIT_OK
    assert field(out, "node") == "top+conj"
    assert field(out, "letter").startswith("t")
    assert field(out, "verified") == "true"


def test_make_conjugate_order_mismatch(capsys, files):
    code, out = forge(capsys, "hnn", "make-conjugate", files["fp"],
                      "f0:1", "f1:1")
    assert code == EXIT_INPUT
    assert "different orders" in out


def test_realize_iso_identity_pairing(capsys, files):
    code, out = forge(capsys, "hnn", "realize-iso", files["hat"],
                      "--a", "0,1,2,3,4,5", "--b", "0,1,2,3,4,5",
                      "--a-hat", "0,1,2,3,4,5", "--b-hat", "0,1,2,3,4,5")
    assert code == EXIT_OK
    assert field(out, "hat-conjugator") == "0"
    assert field(out, "verified") == "true"


# -- sc subcommands ----------------------------------------------------------


def test_sc_tau_default_node(capsys):
    code, out = forge(capsys, "sc", "tau", "--n", "1", "--print-word")
    assert code == EXIT_OK
    assert field(out, "syllables") == "4"
    assert field(out, "word") == "f0:1 f1:1 f0:1 f1:2"


def test_sc_tau_length_law(capsys):
    code, out = forge(capsys, "sc", "tau", "--n", "3")
    assert code == EXIT_OK
    assert field(out, "syllables") == str(2 * 3 * 4)


def test_sc_certify_below_threshold(capsys, files):
    code, out = forge(capsys, "sc", "certify", files["z35"], "--n", "18")
    assert code == EXIT_FALSE
    assert field(out, "max-piece") == "69"
    assert field(out, "ratio") == "23/228"
    assert field(out, "certified") == "false"
    assert "witness: piece of 69 syllables" in out


def test_sc_certify_at_threshold(capsys, files):
    code, out = forge(capsys, "sc", "certify", files["z35"], "--n", "19")
    assert code == EXIT_OK
    assert field(out, "lengths") == "760,760"
    assert field(out, "ratio") == "73/760"
    assert field(out, "certified") == "true"


def test_sc_decide_member_nonmember_undecided(capsys, files):
    # get the relator word from the builder itself, then feed slices back in
    code, out = forge(capsys, "sc", "tau", files["z35"], "--n", "19",
                      "--print-word")
    assert code == EXIT_OK
    tau = field(out, "word")

    code, out = forge(capsys, "sc", "decide", files["z35"], tau,
                      "--n", "19")
    assert code == EXIT_OK
    assert field(out, "verdict") == "member"

    conj = "f0:2 " + tau + " f0:1"
    code, out = forge(capsys, "sc", "decide", files["z35"], conj,
                      "--n", "19")
    assert code == EXIT_OK
    assert field(out, "verdict") == "member"

    code, out = forge(capsys, "sc", "decide", files["z35"], "f0:1",
                      "--n", "19")
    assert code == EXIT_FALSE
    assert field(out, "verdict") == "nonmember"
    assert "witness:" in out

    half = " ".join(tau.split()[:380])
    code, out = forge(capsys, "sc", "decide", files["z35"], half,
                      "--n", "19")
    assert code == EXIT_UNDECIDED
    assert field(out, "verdict") == "undecided"
    assert field(out, "max-fraction") == "1/2"


def test_sc_probe_quiet(capsys, files):
    code, out = forge(capsys, "sc", "probe", files["z35"], "--n", "19",
                      "--samples", "20", "--seed", "3")
    assert code == EXIT_OK
    assert field(out, "samples") == "20"
    assert field(out, "counterexamples") == "0"
    assert field(out, "ok") == "true"


def test_sc_obstruct_holds(capsys, files):
    code, out = forge(capsys, "sc", "obstruct", files["twist"],
                      "--x0", "f0:4", "--x1", "f1:4", "--y0", "f0:2",
                      "--n", "20")
    assert code == EXIT_OK
    assert field(out, "ratio") == "11/120"
    assert "shared 1: nonmember" in out
    assert field(out, "obstructed") == "true"


def test_sc_obstruct_config_failure(capsys, files):
    code, out = forge(capsys, "sc", "obstruct", files["twist"],
                      "--x0", "f0:4", "--x1", "f1:4", "--y0", "f0:1",
                      "--n", "20")
    assert code == EXIT_FALSE
    assert field(out, "obstructed") == "false"
    assert "witness: y0 lies in the shared subgroup" in out


# -- universe subcommands ----------------------------------------------------


def test_universe_assign_layout(capsys, files):
    code, out = forge(capsys, "universe", "assign", files["fp"],
                      "--blocks", "0,1")
    assert code == EXIT_OK
    assert field(out, "tracked") == "11"
    assert "addr 0:0: 1" in out
    assert "addr 0:4: f0:4" in out
    assert "addr 1:0: f1:1" in out
    assert "addr 1:5: f1:6" in out


def test_universe_check_ok(capsys, files):
    code, out = forge(capsys, "universe", "check", files["b6"],
                      "--blocks", "0")
    assert code == EXIT_OK
    assert field(out, "ok") == "true"


def test_universe_check_unrealizable_block(capsys, files):
    code, out = forge(capsys, "universe", "check", files["b6"],
                      "--blocks", "0,3")
    assert code == EXIT_INPUT
    assert "no tracked element realizes block 3" in out


def test_universe_bad_block_list(capsys, files):
    code, out = forge(capsys, "universe", "check", files["b6"],
                      "--blocks", "zero")
    assert code == EXIT_INPUT
    assert "bad block list" in out


def test_universe_code_report(capsys):
    code, out = forge(capsys, "universe", "code", "--h", "z3",
                      "--master", "0,1,2")
    assert code == EXIT_OK
    assert out == (
        "h: z3\n"
        "members: 4\n"
        "member {0}: code 0\n"
        "member {0,1}: code 1\n"
        "member {0,2}: code 1\n"
        "member {0,1,2}: code 2\n"
        "classes: 3\n"
        "code 0 dom {0}\n"
        "code 1 dom {0,1}\n"
        "code 2 dom {0,1,2}\n")


def test_universe_probe_clause_counts(capsys):
    code, out = forge(capsys, "universe", "probe", "--h", "z3",
                      "--master", "0,1,2", "--samples", "10", "--seed", "4")
    assert code == EXIT_OK
    assert "clause 1: checked 9 failures 0" in out
    assert "clause 2: checked 25 failures 0" in out
    assert "clause 8: checked 10 failures 0" in out
    assert field(out, "ok") == "true"


def test_density_dom_extends(capsys):
    code, out = forge(capsys, "universe", "density-dom", "--h", "z3",
                      "--blocks", "0,1", "--alpha", "3")
    assert code == EXIT_OK
    assert field(out, "after") == "{0,1,3}"
    assert field(out, "extended") == "true"


def test_density_dom_noop_when_present(capsys):
    code, out = forge(capsys, "universe", "density-dom", "--h", "z3",
                      "--blocks", "0,1", "--alpha", "1")
    assert code == EXIT_OK
    assert field(out, "after") == "{0,1}"
    assert field(out, "extended") == "false"


@pytest.mark.parametrize("argv,msg", [
    (("--alpha", "5000"), "outside the configured blocks"),
    (("--alpha", "3", "--allowed", "0,1"), "outside the allowed set"),
])
def test_density_dom_errors(capsys, argv, msg):
    code, out = forge(capsys, "universe", "density-dom", "--h", "z3",
                      "--blocks", "0,1", *argv)
    assert code == EXIT_INPUT
    assert msg in out


def test_density_simple_finite_pair(capsys):
    code, out = forge(capsys, "universe", "density-simple", "--h", "z3",
                      "--blocks", "0,1", "--x", "f0:1", "--y", "f0:2")
    assert code == EXIT_OK
    assert field(out, "case") == "finite-both"
    assert field(out, "trace-terms") == "4"
    assert field(out, "extended") == "true"
    assert field(out, "verified") == "true"


def test_density_simple_tracked_extras(capsys):
    code, out = forge(capsys, "universe", "density-simple", "--h", "z3",
                      "--blocks", "0,1",
                      "--track", "f0:1 f1:1", "--track", "f0:2 f1:2",
                      "--x", "f0:1 f1:1", "--y", "f0:2 f1:2")
    assert code == EXIT_OK
    assert field(out, "case") == "both-infinite"
    assert field(out, "trace-terms") == "1"


# -- session plumbing --------------------------------------------------------


def test_budget_flag_both_positions(capsys):
    for argv in (["--budget", "2", "group", "aut", "s4"],
                 ["group", "aut", "s4", "--budget", "2"]):
        code, out = forge(capsys, *argv)
        assert code == EXIT_UNDECIDED
        assert "error: homomorphism search needs" in out


def test_budget_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("FORGE_BUDGET", "2")
    code, out = forge(capsys, "group", "aut", "s4")
    assert code == EXIT_UNDECIDED
    assert "budget 2" in out


def test_help_exits_zero(capsys):
    assert run(["--help"]) == EXIT_OK
    capsys.readouterr()


@pytest.mark.parametrize("argv", [
    [],
    ["group", "check", "z6", "--frobnicate"],
    ["group", "frobnicate", "z6"],
])
def test_usage_errors_exit_three(capsys, argv):
    assert run(argv) == EXIT_INPUT
    capsys.readouterr()


def test_repeated_runs_are_byte_identical(forge_bin):
    cmd = [forge_bin, "universe", "probe", "--h", "z3", "--master", "0,1,2",
           "--samples", "25", "--seed", "9"]
    first = subprocess.run(cmd, capture_output=True)
    second = subprocess.run(cmd, capture_output=True)
    assert first.returncode == EXIT_OK
    assert first.stdout == second.stdout
