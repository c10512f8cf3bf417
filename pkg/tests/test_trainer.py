import numpy as np
import pytest

import mvcontrast as mv
from mvcontrast.trainer import AdamState, adam_step

from oracles import random_instance


def hyper(**kw):
    base = dict(d=2)
    base.update(kw)
    return mv.Hyperparams(**base)


class TestAdamStep:
    def test_first_step_scalar_trace(self):
        # m_hat = 1, v_hat = 1 after bias correction, so the step is
        # -gamma / (1 + eps)
        h = hyper(gamma=0.001, eps_adam=1e-8)
        p = np.array([0.5])
        p2, st = adam_step(p, np.array([1.0]), AdamState.zeros_like(p), h)
        assert st.t == 1
        assert p2[0] == pytest.approx(0.5 - 0.001 / (1.0 + 1e-8), rel=1e-12)

    def test_zero_gradient_fixed_point(self):
        h = hyper()
        p = np.array([1.0, -2.0])
        st = AdamState.zeros_like(p)
        for _ in range(5):
            p2, st = adam_step(p, np.zeros(2), st, h)
            assert np.array_equal(p2, p)
            p = p2

    def test_constant_positive_gradient_decreases(self):
        h = hyper()
        p = np.array([3.0])
        st = AdamState.zeros_like(p)
        p1, st = adam_step(p, np.array([0.7]), st, h)
        p2, st = adam_step(p1, np.array([0.7]), st, h)
        assert p1[0] < p[0]
        assert p2[0] < p1[0]

    def test_nonfinite_gradient_rejected(self):
        h = hyper()
        p = np.array([1.0])
        with pytest.raises(mv.NumericError):
            adam_step(p, np.array([np.nan]), AdamState.zeros_like(p), h)

    def test_moment_recursions(self):
        h = hyper(b1=0.8, b2=0.9)
        p = np.array([0.0, 0.0])
        g1 = np.array([1.0, -2.0])
        g2 = np.array([0.5, 0.5])
        _, st = adam_step(p, g1, AdamState.zeros_like(p), h)
        _, st = adam_step(p, g2, st, h)
        assert np.allclose(st.m1, 0.8 * (0.2 * g1) + 0.2 * g2)
        assert np.allclose(st.m2, 0.9 * (0.1 * g1 ** 2) + 0.1 * g2 ** 2)


class TestInitState:
    def test_orthonormal_blocks(self):
        ds = mv.synth_blobs(2, 3, 4, [6, 5], 0.5, 0)
        state = mv.init_state(ds, hyper(), seed=3)
        for m in range(2):
            Pm = state.P.block(m)
            assert np.allclose(Pm.T @ Pm, np.eye(2), atol=1e-10)

    def test_w_columns_near_uniform_and_nonzero(self):
        ds = mv.synth_blobs(2, 2, 2, [3, 3], 0.5, 0)
        state = mv.init_state(ds, hyper(), seed=3)
        n = ds.n
        for Wm in state.W.W:
            assert np.max(np.abs(Wm - 1.0 / n)) < 3.0 / n
            assert np.all(np.linalg.norm(Wm, axis=0) > 0)

    def test_views_start_with_distinct_coefficients(self):
        ds = mv.synth_blobs(2, 3, 4, [4, 4], 0.5, 0)
        state = mv.init_state(ds, hyper(), seed=1)
        assert not np.allclose(state.W.W[0], state.W.W[1])

    def test_deterministic(self):
        ds = mv.synth_blobs(2, 3, 4, [6, 5], 0.5, 0)
        s1 = mv.init_state(ds, hyper(), seed=9)
        s2 = mv.init_state(ds, hyper(), seed=9)
        assert np.array_equal(s1.P.P, s2.P.P)
        assert all(np.array_equal(a, b) for a, b in zip(s1.W.W, s2.W.W))

    def test_d_too_large(self):
        ds = mv.synth_blobs(2, 2, 3, [3, 5], 0.5, 0)
        with pytest.raises(mv.ConfigError):
            mv.init_state(ds, hyper(d=4), seed=0)

    def test_initial_loss_recorded(self):
        ds = mv.synth_blobs(2, 2, 3, [3, 3], 0.5, 0)
        state = mv.init_state(ds, hyper(), seed=0)
        assert len(state.loss_history) == 1
        assert state.loss_history[0] == pytest.approx(
            mv.total_loss(state.P, state.W, ds, hyper()))


class TestSweepW:
    def test_moves_every_column(self):
        ds = mv.synth_blobs(2, 2, 3, [4, 4], 0.5, 0)
        state = mv.init_state(ds, hyper(), seed=0)
        before = [w.copy() for w in state.W.W]
        mv.sweep_W(state, ds, hyper())
        for m in range(2):
            for i in range(ds.n):
                assert not np.array_equal(before[m][:, i], state.W.W[m][:, i])

    def test_deterministic(self):
        ds = mv.synth_blobs(2, 2, 3, [4, 4], 0.5, 0)
        h = hyper()
        s1 = mv.init_state(ds, h, seed=4)
        s2 = mv.init_state(ds, h, seed=4)
        mv.sweep_W(s1, ds, h)
        mv.sweep_W(s2, ds, h)
        assert all(np.array_equal(a, b) for a, b in zip(s1.W.W, s2.W.W))

    def test_jacobi_differs_from_gauss_seidel(self):
        ds = mv.synth_blobs(2, 2, 4, [4, 4], 0.5, 0)
        h = hyper()
        gs = mv.init_state(ds, h, seed=4)
        ja = mv.init_state(ds, h, seed=4)
        mv.sweep_W(gs, ds, h)
        mv.sweep_W(ja, ds, h, jacobi=True)
        assert not all(np.array_equal(a, b) for a, b in zip(gs.W.W, ja.W.W))

    def test_adam_moments_persist(self):
        ds = mv.synth_blobs(2, 2, 3, [4, 4], 0.5, 0)
        h = hyper()
        state = mv.init_state(ds, h, seed=4)
        mv.sweep_W(state, ds, h)
        assert state.adam_W[0][0].t == 1
        mv.sweep_W(state, ds, h)
        assert state.adam_W[0][0].t == 2


class TestFit:
    def test_zero_budget_returns_initialization(self):
        ds = mv.synth_blobs(2, 2, 3, [4, 4], 0.5, 0)
        h = hyper(max_iters=0)
        model, state = mv.fit(ds, h, seed=1)
        init = mv.init_state(ds, h, seed=1)
        assert state.iter == 0
        assert len(state.loss_history) == 1
        assert all(np.array_equal(a, b)
                   for a, b in zip(model.projections,
                                   [init.P.block(m) for m in range(2)]))

    def test_infinite_tolerance_single_iteration(self):
        ds = mv.synth_blobs(2, 2, 3, [4, 4], 0.5, 0)
        model, state = mv.fit(ds, hyper(tol=np.inf, max_iters=50), seed=1)
        assert state.iter == 1
        assert len(state.loss_history) == 2

    def test_loss_decreases_on_blobs(self):
        ds = mv.synth_blobs(2, 3, 10, [8, 8], 0.5, 0)
        model, state = mv.fit(ds, hyper(max_iters=60, tol=1e-9), seed=0)
        assert state.loss_history[-1] < state.loss_history[0]
        assert np.all(np.isfinite(state.loss_history))

    def test_stopping_rule_uses_stored_history(self):
        ds = mv.synth_blobs(2, 3, 10, [8, 8], 0.5, 0)
        h = hyper(tol=1e-3)
        model, state = mv.fit(ds, h, seed=0)
        if model.meta["converged"]:
            assert abs(state.loss_history[-2] - state.loss_history[-1]) <= h.tol

    def test_determinism_bit_identical(self):
        ds = mv.synth_blobs(2, 3, 6, [5, 5], 0.5, 0)
        h = hyper(max_iters=10, tol=1e-12)
        m1, s1 = mv.fit(ds, h, seed=11)
        m2, s2 = mv.fit(ds, h, seed=11)
        assert all(np.array_equal(a, b)
                   for a, b in zip(m1.projections, m2.projections))
        assert s1.loss_history == s2.loss_history

    def test_adam_step_size_bound(self):
        ds = mv.synth_blobs(2, 3, 6, [5, 5], 0.5, 0)
        h = hyper(max_iters=15, tol=1e-12)
        state = mv.init_state(ds, h, seed=2)
        for _ in range(15):
            mv.sweep_W(state, ds, h)
            assert state.last_max_step <= 2.0 * h.gamma
            from mvcontrast.gradients import grad_P
            from mvcontrast.trainer import adam_step
            g = grad_P(state.P, state.W, ds, h)
            newP, state.adam_P = adam_step(state.P.P, g, state.adam_P, h)
            assert np.max(np.abs(newP - state.P.P)) <= 2.0 * h.gamma
            state.P = mv.ProjectionStack(P=newP, view_dims=ds.view_dims)


class TestModelPersistence:
    def test_roundtrip_bit_identical_embeddings(self, tmp_path):
        ds = mv.synth_blobs(2, 2, 4, [4, 3], 0.5, 0)
        model, _ = mv.fit(ds, hyper(max_iters=5, tol=1e-12), seed=0)
        mv.save_model(model, tmp_path, view_names=ds.view_names)
        back = mv.load_model(tmp_path)
        for a, b in zip(model.projections, back.projections):
            assert np.array_equal(a, b)
        before = mv.project(model, ds)
        after = mv.project(back, ds)
        assert all(np.array_equal(x, y) for x, y in zip(before, after))

    def test_manifest_contents(self, tmp_path):
        ds = mv.synth_blobs(2, 2, 4, [4, 3], 0.5, 0)
        model, _ = mv.fit(ds, hyper(max_iters=2, tol=1e-12), seed=3)
        mv.save_model(model, tmp_path, view_names=ds.view_names)
        import json
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["view_dims"] == [4, 3]
        assert manifest["d"] == 2
        assert manifest["meta"]["seed"] == 3
        assert manifest["hyperparams"]["gamma"] == 0.001
