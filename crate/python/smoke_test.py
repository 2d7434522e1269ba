"""Smoke test for the bsft_py extension module."""

import json

import bsft_py


def main():
    code = bsft_py.BaconShorCode(3)
    assert code.parameters() == (9, 1, 3), code.parameters()
    assert len(code.stabilizers()) == 4
    assert len(code.gauges()) == 12
    assert code.decoded_effect("X4") == "I"
    assert code.decoded_effect(code.logical_x()) == "X"
    x_checks, z_checks = code.syndrome("Z0")
    assert any(x_checks) and not any(z_checks)

    exrec = bsft_py.ExRec(3, "steane")
    assert exrec.locations == 297, exrec
    analyzer = bsft_py.Analyzer(exrec)
    k1 = analyzer.enumerate_exact(1)
    assert k1.alpha == 0.0
    k2 = analyzer.enumerate_exact(2)
    assert k2.is_exact and k2.alpha > 0
    again = bsft_py.MalignancyReport.from_json(k2.to_json())
    assert again.alpha == k2.alpha

    result = bsft_py.threshold([k1, k2], 1)
    assert result.certified
    assert 6.8e-5 < result.epsilon_0 < 7.0e-5, result
    assert json.loads(result.to_json())["epsilon_0"] == result.epsilon_0

    mc = analyzer.sample_mc(2, 20000, seed=3)
    assert abs(mc.fraction - k2.fraction) < 5 * mc.sigma
    lo, hi = bsft_py.threshold([mc], 1).one_sigma_interval
    assert lo < result.epsilon_0 < hi or abs(result.epsilon_0 - lo) < 2e-6

    witness = None
    for a in range(exrec.locations):
        if analyzer.is_malignant([a, a + 1]):
            witness = analyzer.witness([a, a + 1])
            break
    assert witness is not None

    print("bsft_py", bsft_py.__version__, "smoke test ok:", result)


if __name__ == "__main__":
    main()
