"""Smoke test for the rmtlab Python module.

Run after `maturin develop -m crates/rmtlab-py/Cargo.toml`, or with the built
shared library renamed to rmtlab.so on PYTHONPATH.
"""

import math

import rmtlab


def main():
    seed = rmtlab.Seed(2024, 0)
    assert seed.child(1) == seed.child(1) and seed.child(1) != seed.child(2)

    a = rmtlab.Matrix.sample("ginibre-complex", 200, seed)
    b = rmtlab.Matrix.sample("ginibre-complex", 200, seed)
    assert a.rows() == b.rows()
    small = rmtlab.Matrix.sample("ginibre-complex", 20, seed)
    assert abs(small[3, 7] - a[3, 7] * math.sqrt(10)) < 1e-12

    eig = a.eigenvalues()
    s = a.singular_values()
    assert len(eig) == 200 and len(s) == 200
    assert abs(sum(math.log(abs(l)) for l in eig) - sum(math.log(x) for x in s)) < 1e-8
    inside = sum(abs(l) <= 0.5 for l in eig) / 200
    assert abs(inside - rmtlab.circular_modulus_cdf(0.5)) < 0.1

    z = 0.3 + 0.2j
    assert abs(rmtlab.log_potential(eig, z) - a.log_potential(z)) < 1e-8
    g = a.quaternionic_transform(0.0, 1j)
    assert g["a"].imag > 0 and abs(g["b"]) < 0.2

    assert abs(rmtlab.quarter_circular_density(0.0) - 2 / math.pi) < 1e-15
    assert abs(rmtlab.nu_z_density(0, 1.0) - math.sqrt(3) / math.pi) < 1e-3
    alpha = rmtlab.nu_z_fixed_point(0.5, 0.3 + 0.1j)
    assert alpha.imag > 0

    heavy = rmtlab.Matrix.sample("heavy", 400, 7, alpha=1.0)
    assert abs(rmtlab.tail_index_estimate(heavy.singular_values(), 0.05) - 1.0) < 0.35

    bank = rmtlab.StableSampleBank(1.0, 100_000, rmtlab.Seed(3))
    h = bank.h_moments(0j, 1.0)
    assert 0 < h["mean_h"] <= 1.0 and abs(h["mean_h"] - 0.435) < 0.01

    reports = rmtlab.run_suite("identities", seed=7, n=50)
    assert reports and all(r["pass"] for r in reports), reports
    assert "heavy" in rmtlab.suite_names()

    for bad in (lambda: rmtlab.Matrix.sample("gue", 4, 0), lambda: rmtlab.run_suite("nope")):
        try:
            bad()
        except ValueError:
            pass
        else:
            raise AssertionError("expected ValueError")

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
