"""Smoke test for the phigamma Python extension.

Build and install first, e.g.
    pip install maturin
    maturin build --release -m crates/py/Cargo.toml -o dist
    pip install dist/phigamma-*.whl
then run: python python/smoke_test.py
"""

import json

import phigamma


def check_series():
    ring = phigamma.SeriesRing(3, 2, ["a", "b"])
    f = ring.parse("1 + pi_a*pi_b")
    g = ring.parse("3*pi_a^-1 + pi_b")
    assert f * g == g * f
    # psi is a left inverse of phi.
    assert f.phi("a").psi("a") == f
    # Residue of pi_a^-1 pi_b^-1 is 1.
    assert ring.parse("pi_a^-1*pi_b^-1").res()[0] == 1
    # For small c, gamma of a polynomial is an exact polynomial.
    h = ring.parse("pi_a")
    assert h.gamma("a", 4).is_exact
    assert h.gamma("a", 4).gamma("a", 5) == h.gamma("a", 20)
    assert ring.parse("pi_a").gauss_norm("1/2", var="a") == "3/4"


def check_modules():
    files = dict(phigamma.corpus(0))
    trivial = phigamma.Module.from_text(files["trivial_p5_ab.json"])
    trivial.validate()
    assert (trivial.rank, trivial.nvars, trivial.p, trivial.m) == (1, 2, 5, 2)
    assert trivial.h0() == ([], 1)
    twisted = phigamma.Module.from_text(files["tate_twist_p3_ab.json"])
    assert twisted.h0() == ([], 0)
    again = phigamma.Module.from_text(trivial.to_json())
    assert again.h0(-4, 4) == ([], 1)


def check_finite():
    files = dict(phigamma.corpus(0))
    d = json.loads(phigamma.descend(files["finite/rep_random_p2_m1_f12_r2.json"]))
    assert d["kind"] == "phi" and d["rank"] == 2
    v = json.loads(phigamma.descend(json.dumps(d)))
    assert v["kind"] == "rep" and v["rank"] == 2
    try:
        phigamma.descend(files["finite/phi_not_etale.json"])
    except phigamma.PhigammaError as e:
        assert "etale" in str(e)
    else:
        raise AssertionError("non-etale module was accepted")


if __name__ == "__main__":
    check_series()
    check_modules()
    check_finite()
    print("python smoke test passed")
