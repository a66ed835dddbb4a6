import json

import pytest

import foldseq


def test_words_and_maps():
    assert foldseq.reduce("abBc") == "ac"
    assert foldseq.cyclic_reduce("Cabc") == "ab"
    theta = foldseq.Endomorphism.named("theta")
    assert theta("abc") == "bcca"
    assert theta.images() == ["b", "c", "ca"]
    vartheta = foldseq.Endomorphism.named("vartheta")
    ident = foldseq.Endomorphism.from_images("a,b,c", 3)
    assert theta @ vartheta == ident


def test_matrices():
    B = [[0, 0, 1], [1, 0, 0], [0, 1, 1]]
    assert foldseq.transition_matrix(foldseq.Endomorphism.named("theta")) == B
    M = foldseq.matrix_M(45)
    assert all(isinstance(x, int) for row in M for x in row)
    assert max(max(row) for row in M) > 2**20
    assert foldseq.transition_matrix(foldseq.phi_r(5)) == foldseq.matrix_M(5)
    lam = foldseq.lambda_B()
    assert abs(lam**3 - lam**2 - 1) < 1e-12


def test_train_tracks():
    assert foldseq.gates(foldseq.phi_r(3)) == "{a,b,c} {d,e,f} {g} {A} {B} {C} {D} {E} {F} {G}"
    ok, violations = foldseq.is_train_track(foldseq.psi_r(15), "{a,e,G} {b,D} {c,B} {d,C} {f,E} {g,F} {A}")
    assert ok and violations == []
    vt = foldseq.Endomorphism.named("vartheta")
    assert foldseq.find_periodic_inps(vt, 4, 12) == []
    inps = [json.loads(s) for s in foldseq.find_periodic_inps(foldseq.Endomorphism.named("theta"), 10, 40)]
    assert inps and all(p["period"] >= 1 for p in inps)
    R, paths, worst = foldseq.estimate_R(vt, 4)
    assert R >= 1 and paths > 0 and worst


def test_subgroups_and_gf2():
    assert foldseq.contains(["a", "b"], "BAbab")
    assert not foldseq.contains(["aa"], "a")
    assert foldseq.equal_subgroups(["ab", "b"], ["a", "b"])
    assert foldseq.b_period() == 7
    assert foldseq.coverage_listing().splitlines() == [f"{i} 107" for i in range(7)]


def test_sequences_and_errors():
    assert foldseq.generate(5, 15) == [15, 30, 45, 60, 75]
    assert [v[1] for v in foldseq.validate([3, 6, 9])][0] == "mod7"
    with pytest.raises(ValueError):
        foldseq.reduce("xyz", 3)
    with pytest.raises(ValueError):
        foldseq.run("no-such-experiment")


def test_run_is_deterministic():
    a = foldseq.run("convergence", trials=10, seed=4)
    b = foldseq.run("convergence", trials=10, seed=4)
    assert a == b
    assert a["experiment"] == "convergence"
    assert {x["name"] for x in a["assertions"]} >= {"Y and Z are idempotent"}
    g = foldseq.run("gen-seq", gen=(5, 15))
    assert g["params"]["seq"] == [15, 30, 45, 60, 75]
    assert g["passed"]
