"""Smoke test for the qmfcut Python extension.

Build and install first, e.g.
    pip install maturin
    maturin develop -m crates/python/Cargo.toml --release
then run `python python/smoke_test.py`.
"""

import qmfcut


def main():
    # min-cut of the odd/even cut of the 4-cycle
    assert qmfcut.qmc(4, 2) == 4
    assert qmfcut.qmc(12, 3) == 729

    # generic rank defect at N = n = 2
    r = qmfcut.qmf_estimate(4, 2, trials=8)
    assert r["max_rank"] == 3, r
    assert r["partition"] == "1,3/2,4"

    t = qmfcut.SiteTensor.random(3, 3, seed=1)
    s = t.contract(4)
    assert s.is_invariant()
    assert s.flattening_rank() == 8
    assert s.cyclic_shift(1).entries() == s.entries()

    imm = qmfcut.SiteTensor.imm(2).contract(4)
    assert imm.flattening_rank("odd-even") == 16
    assert imm.flattening_rank("1,2/3,4") == 4

    p = qmfcut.prime_with_roots_of_unity(4)
    blocks = qmfcut.SiteTensor.imm(2, p=p).contract(4).block_report()
    assert blocks["cross_blocks_zero"] and blocks["total_rank"] == 16
    assert [b["rank"] for b in blocks["blocks"]] == [10, 6]

    assert qmfcut.necklace_count(4, 4) == 70
    assert qmfcut.sign_multiplicity_character(6, 2) == 10
    assert qmfcut.sign_multiplicity_formula(6, 3) % 2 == 1
    assert qmfcut.qmf_upper_bound_parity(2, 6) == 35

    assert qmfcut.coef([0, 0, 1, 0, 1, 1]) == 4
    assert dict(qmfcut.kernel_vector(3, [1, 3])) == {2: 1, 3: -1, 4: -1, 5: 1}
    assert qmfcut.verify_kernel(4, 5, 7, [1, 5])
    assert qmfcut.kernel_span_dimension(6) == 16

    out = qmfcut.run("theorem3", d=[2, 3])
    assert out["passed"], out["failures"]
    assert [row["qmf_observed"] for row in out["report"]] == [3, 6]

    try:
        qmfcut.qmc(4, 2, partition="sideways")
    except ValueError:
        pass
    else:
        raise AssertionError("bad partition accepted")

    print("python smoke test passed")


if __name__ == "__main__":
    main()
