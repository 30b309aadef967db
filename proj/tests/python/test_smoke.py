"""Smoke tests for the compiled python module: imports, round trips between
numpy and the core types, and a short end-to-end critic run."""

import math
import os
import sys
import tempfile

import numpy as np

import naclab


def test_gallery():
    names = naclab.gallery_names()
    assert "chain4" in names and "deadly-triad" in names
    ci = naclab.gallery_get("chain4")
    assert ci.inst.mdp.num_states == 4
    assert ci.inst.mdp.num_actions == 2
    cert = naclab.certify_instance(ci)
    assert cert.n_min >= 1
    assert cert.contraction_nmin <= cert.gamma_c + 1e-12
    assert cert.lambda_min > 0


def test_triad_certificate():
    cert = naclab.certify_instance(naclab.gallery_get("deadly-triad"))
    assert cert.contraction_n1 > 1.0
    assert cert.contraction_nmin <= cert.gamma_c


def test_mdp_roundtrip():
    p = [np.array([[0.9, 0.1], [0.2, 0.8]]), np.array([[0.5, 0.5], [0.4, 0.6]])]
    r = np.array([[0.3, -0.2], [0.1, 0.0]])
    mdp = naclab.Mdp(p, r, 0.9)
    assert mdp.num_states == 2
    np.testing.assert_allclose(mdp.transition(1), p[1])
    q = naclab.exact_q(mdp, naclab.uniform_table(2, 2))
    assert q.shape == (4,)
    assert np.all(np.isfinite(q))


def test_min_horizon():
    n = naclab.min_horizon(0.9, 0.8, 0.1)
    assert 0.9**n <= 0.8 * math.sqrt(0.1) + 1e-15
    assert 0.9 ** (n - 1) > 0.8 * math.sqrt(0.1)
    assert naclab.f_factor(1.0, 3) == 4.0


def test_critic_run():
    ci = naclab.gallery_get("twostate")
    cfg = naclab.CriticConfig()
    cfg.n = 3
    cfg.schedule = naclab.StepSchedule.constant(0.05)
    cfg.num_iters = 20000
    cfg.w0 = np.zeros(ci.inst.features.dim)
    cfg.gamma_c = ci.gamma_c
    run = naclab.run_critic(ci.inst.mdp, ci.inst.features, ci.inst.behavior,
                            ci.target_policy, cfg, 7)
    assert not run.diverged
    assert run.mse[-1] < run.mse[0]
    fp = naclab.solve_projected_bellman(ci.inst.mdp, ci.inst.features,
                                        ci.target_policy, ci.inst.behavior, 3)
    assert np.linalg.norm(run.final - fp.w_pi) < 0.5


def test_determinism():
    ci = naclab.gallery_get("chain4")
    cfg = naclab.CriticConfig()
    cfg.n = 2
    cfg.schedule = naclab.StepSchedule.constant(0.01)
    cfg.num_iters = 5000
    cfg.w0 = np.zeros(ci.inst.features.dim)
    a = naclab.run_critic(ci.inst.mdp, ci.inst.features, ci.inst.behavior,
                          ci.target_policy, cfg, 42)
    b = naclab.run_critic(ci.inst.mdp, ci.inst.features, ci.inst.behavior,
                          ci.target_policy, cfg, 42)
    assert np.array_equal(a.final, b.final)


def test_nac():
    ci = naclab.gallery_get("twostate")
    ac = naclab.ActorConfig()
    ac.T = 5
    ac.theta0 = np.zeros(ci.inst.features.dim)
    ac.critic.n = 3
    ac.critic.schedule = naclab.StepSchedule.constant(0.05)
    ac.critic.num_iters = 2000
    ac.critic.w0 = np.zeros(ci.inst.features.dim)
    ac.critic.gamma_c = ci.gamma_c
    run = naclab.run_nac(ci.inst.mdp, ci.inst.features, ci.inst.behavior, ac, 3)
    assert len(run.thetas) == 6
    assert len(run.gaps) == 6
    assert all(g >= -1e-10 for g in run.gaps)


def test_softmax_consistency():
    ci = naclab.gallery_get("twostate")
    theta = np.full(ci.inst.features.dim, 0.3)
    w = np.full(ci.inst.features.dim, -0.7)
    pol = naclab.softmax_eval(ci.inst.features, theta, 2, 2)
    direct = naclab.softmax_eval(ci.inst.features, theta + 0.5 * w, 2, 2)
    mult = naclab.multiplicative_update(pol, ci.inst.features, w, 0.5)
    np.testing.assert_allclose(mult, direct, atol=1e-12)


def test_experiment_file():
    ci = naclab.gallery_get("chain4")
    with tempfile.TemporaryDirectory() as d:
        spec = os.path.join(d, "exp.json")
        with open(spec, "w") as f:
            f.write('{"kind": "critic-convergence", "instance": "chain4", '
                    '"seeds": [1], "output_dir": "%s/out", '
                    '"critic": {"n": 2, "K": 1000, '
                    '"schedule": {"kind": "constant", "alpha": 0.01}}}' % d)
        assert naclab.validate_experiment_file(spec)
        assert naclab.run_experiment_file(spec) == 0
        assert os.path.exists(os.path.join(d, "out", "manifest.json"))


def main():
    fns = [v for k, v in sorted(globals().items()) if k.startswith("test_")]
    for fn in fns:
        fn()
        print("ok:", fn.__name__)
    print(f"{len(fns)} python smoke tests passed")


if __name__ == "__main__":
    main()
