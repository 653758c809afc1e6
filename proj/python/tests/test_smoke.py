import math

import pytest

import dtrunc


def d3():
    return dtrunc.TruncatedSample([1, 2, 3], [0, 0.5, 1.5], [2.5, 3, 4])


def test_npmle_closed_form():
    fit = dtrunc.npmle(d3(), algorithm="joint", tol=1e-12)
    a = (3 - math.sqrt(5)) / 2
    assert fit.converged
    assert fit.mass == pytest.approx([a, math.sqrt(5) - 2, a], abs=1e-8)
    assert fit.g == pytest.approx([0.618034, 1.0, 0.618034], abs=1e-6)
    assert fit.cdf_at(10.0) == pytest.approx(1.0)


def test_existence():
    rep = dtrunc.existence_check(dtrunc.TruncatedSample([1, 2, 3], [0, 1, 2.5], [1.5, 3, 3.5]))
    assert not rep.ok
    assert rep.s1 == [2, 1, 2]
    assert rep.s2 == [1, 3, 1]


def test_bootstrap_and_errors():
    s = dtrunc.gen_truncated(80, seed=3).sample
    r = dtrunc.bootstrap(s, B=30, seed=1, points=[0.5])
    assert len(r.se) == 1 and r.se[0] > 0
    assert r.ci_low[0] <= r.ci_high[0]
    with pytest.raises(ValueError):
        dtrunc.bootstrap(s, B=1)
    with pytest.raises(dtrunc.ValidationError):
        dtrunc.TruncatedSample([1.0], [2.0], [3.0])


def test_cox_and_cif():
    g = dtrunc.gen_truncated(150, law="cox", seed=2)
    assert 0 < g.acceptance_rate < 1
    fit = dtrunc.cox_fit(g.sample, B=0)
    assert fit.converged and fit.beta.shape == (1,)
    assert math.isnan(fit.se[0])
    s = dtrunc.TruncatedSample([1, 2, 3], [0, 0.5, 1.5], [2.5, 3, 4], event=[1, 2, 1])
    c = dtrunc.cif(s, B=0)
    assert c.cif[0][-1] == pytest.approx(0.763932, abs=1e-5)
    with pytest.raises(dtrunc.DegeneracyError):
        flat = dtrunc.TruncatedSample([1, 2, 3], [0, 0, 0], [9, 9, 9], z=[[2.0], [2.0], [2.0]])
        dtrunc.cox_fit(flat, B=0)


def test_tau_and_sef():
    t = dtrunc.kendall_tau_test(d3(), B=30, seed=4)
    assert t.tau == 1.0 and t.n_comparable == 2
    assert 0 <= t.pvalue <= 1
    f = dtrunc.SefFit(eta=-0.00017, a=6, b=5474)
    assert dtrunc.sef_cdf(f, 6) == 0.0
    assert dtrunc.sef_cdf(f, 5474) == pytest.approx(1.0)
    fit = dtrunc.sef_fit(dtrunc.gen_truncated(100, seed=5).sample)
    assert fit.a < fit.b


def test_experiment():
    rep = dtrunc.run_experiment("table4", n=100, trials=5, seed=1)
    assert [r.estimator for r in rep.rows] == ["ben", "nai", "man", "ren"]
    assert rep.trials_used + rep.trials_failed == 5
