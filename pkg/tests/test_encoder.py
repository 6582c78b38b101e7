import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from fate.dependence import dep_terms_for_notion, dep_of_representation, unconditional_slice
from fate.encoder import (
    EncoderProblem,
    FairKernelEncoder,
    build_B,
    build_C,
    solve_encoder,
)
from fate.exceptions import (
    BadConfig,
    DimensionMismatch,
    RankTooHigh,
    SingleClass,
)
from fate.kernels import GramFactor, KernelConfig, onehot_factor


def dense_B_C(l, y, s, lam, gamma, notion="dp", positive_class=1):
    """Independent dense construction of the objective pair."""
    n, m = l.shape
    h = np.eye(n) - np.ones((n, n)) / n
    c_y = int(y.max()) + 1
    c_s = int(s.max()) + 1
    gy = l.T @ h @ onehot_factor(y, c_y)
    b = (1.0 - lam) / n**2 * (gy @ gy.T)
    if lam > 0:
        if notion == "dp":
            slices = [np.arange(n)]
        elif notion == "eo":
            slices = [np.flatnonzero(y == positive_class)]
        else:
            slices = [np.flatnonzero(y == k) for k in range(c_y)]
        for idx in slices:
            nc = idx.size
            hc = np.eye(nc) - np.ones((nc, nc)) / nc
            gs = l[idx].T @ hc @ onehot_factor(s[idx], c_s)
            b -= lam / nc**2 * (gs @ gs.T)
    c = l.T @ h @ l / n + gamma * np.eye(m)
    return 0.5 * (b + b.T), 0.5 * (c + c.T)


def random_problem(rng, n=40, m=8, lam=0.5, notion="dp", c_y=2, c_s=2):
    l = rng.normal(size=(n, m))
    y = rng.integers(0, c_y, size=n)
    s = rng.integers(0, c_s, size=n)
    # guarantee every class appears so slices are never empty
    y[:c_y] = np.arange(c_y)
    s[:c_s] = np.arange(c_s)
    return EncoderProblem(GramFactor(l, "linear"), y, s, notion=notion, lam=lam)


class TestBuildMatrices:
    @pytest.mark.parametrize("notion", ["dp", "eo", "eoo"])
    @pytest.mark.parametrize("lam", [0.0, 0.4, 0.9])
    def test_match_dense_oracle(self, rng, notion, lam):
        prob = random_problem(rng, lam=lam, notion=notion, c_y=3, c_s=2)
        b_ref, c_ref = dense_B_C(prob.x_factor.L, prob.y, prob.s, lam,
                                 prob.gamma, notion)
        assert np.allclose(build_B(prob), b_ref, atol=1e-12)
        assert np.allclose(build_C(prob.x_factor, prob.gamma), c_ref, atol=1e-12)

    def test_single_class_y(self, rng):
        l = GramFactor(rng.normal(size=(6, 3)), "linear")
        prob = EncoderProblem(l, np.zeros(6, dtype=int), np.array([0, 1] * 3))
        with pytest.raises(SingleClass):
            build_B(prob)

    def test_c_positive_definite(self, rng):
        prob = random_problem(rng)
        w = np.linalg.eigvalsh(build_C(prob.x_factor, prob.gamma))
        assert w[0] > 0


class TestSolveEncoder:
    def test_objective_matches_dense_eigen_oracle(self, rng):
        for i in range(10):
            n = int(rng.integers(10, 64))
            m = int(rng.integers(3, 32))
            lam = float(rng.uniform(0, 0.95))
            prob = random_problem(rng, n=n, m=m, lam=lam)
            enc = solve_encoder(prob)
            b_ref, c_ref = dense_B_C(prob.x_factor.L, prob.y, prob.s, lam, prob.gamma)
            w = np.sort(np.linalg.eigvals(np.linalg.solve(c_ref, b_ref)).real)[::-1]
            want = w[: prob.rank].sum()
            assert enc.objective_value == pytest.approx(want, abs=1e-8)

    def test_beats_random_feasible_encoders(self, rng):
        # the solution maximizes u.T B u over C-orthonormal frames
        prob = random_problem(rng, n=48, m=10, lam=0.6)
        enc = solve_encoder(prob)
        b = build_B(prob)
        c = build_C(prob.x_factor, prob.gamma)
        r = prob.rank
        c_half = np.linalg.cholesky(c)
        for _ in range(50):
            raw = rng.normal(size=(c.shape[0], r))
            q, _ = np.linalg.qr(c_half.T @ raw)
            # u = c_half^{-T} q gives u.T C u = q.T q = I, a feasible frame
            u = np.linalg.solve(c_half.T, q[:, :r])
            value = np.trace(u.T @ b @ u)
            assert value <= enc.objective_value + 1e-8

    def test_objective_equals_dep_difference(self, rng):
        # the eigenvalue sum is (1-lam) dep(Z,Y) - lam * sum dep(Z,S|slice)
        # evaluated at the solution
        prob = random_problem(rng, n=36, m=7, lam=0.35)
        enc = solve_encoder(prob)
        z = enc.encode_features(prob.x_factor.L)
        dep_y = dep_of_representation(z, prob.y, unconditional_slice(prob.x_factor.n))
        dep_s = sum(t.value for t in dep_terms_for_notion(prob.y, prob.s, "dp", z=z))
        want = (1 - prob.lam) * dep_y - prob.lam * dep_s
        assert enc.objective_value == pytest.approx(want, abs=1e-9)

    def test_disentanglement_constraint(self, rng):
        # Z.T H Z / n + gamma Theta Theta.T == I on the active eigenvectors
        prob = random_problem(rng, n=40, m=9, lam=0.5)
        enc = solve_encoder(prob)
        c = build_C(prob.x_factor, prob.gamma)
        gram = enc.theta @ c @ enc.theta.T
        assert np.allclose(gram, np.eye(prob.rank), atol=1e-7)

    def test_min_norm_realization(self, rng):
        # feature-space weights equal U.T pinv(L) L
        prob = random_problem(rng, n=30, m=6, lam=0.2)
        enc = solve_encoder(prob)
        b = build_B(prob)
        c = build_C(prob.x_factor, prob.gamma)
        from fate.linalg import generalized_sym_eig

        _, vec = generalized_sym_eig(b, c)
        u = vec[:, : prob.rank]
        l = prob.x_factor.L
        want = (np.linalg.pinv(l.T) @ u)
        assert np.allclose(enc.theta, (l.T @ want).T, atol=1e-8)

    def test_rank_default_and_override(self, rng):
        prob = random_problem(rng, c_y=4)
        assert prob.rank == 3
        enc = solve_encoder(prob)
        assert enc.theta.shape[0] == 3
        narrow = EncoderProblem(prob.x_factor, prob.y, prob.s, r=2)
        assert solve_encoder(narrow).theta.shape[0] == 2

    def test_rank_too_high(self, rng):
        prob = random_problem(rng, m=4, c_y=2)
        wide = EncoderProblem(prob.x_factor, prob.y, prob.s, r=5)
        with pytest.raises(RankTooHigh):
            solve_encoder(wide)

    def test_pressure_reduces_fairness_dependence(self, rng):
        # ordering invariant: the penalized solve has smaller dep(Z, S)
        prob0 = random_problem(rng, n=60, m=10, lam=0.0)
        prob9 = EncoderProblem(prob0.x_factor, prob0.y, prob0.s, lam=0.99)
        z0 = solve_encoder(prob0).encode_features(prob0.x_factor.L)
        z9 = solve_encoder(prob9).encode_features(prob0.x_factor.L)
        dep = lambda z: sum(
            t.value for t in dep_terms_for_notion(prob0.y, prob0.s, "dp", z=z))
        assert dep(z9) <= dep(z0) + 1e-12

    def test_deterministic(self, rng):
        prob = random_problem(rng)
        a = solve_encoder(prob)
        b = solve_encoder(prob)
        assert np.array_equal(a.theta, b.theta)

    def test_validation_errors(self, rng):
        l = GramFactor(rng.normal(size=(8, 3)), "linear")
        y = np.array([0, 1] * 4)
        with pytest.raises(BadConfig):
            EncoderProblem(l, y, y, lam=1.0)
        with pytest.raises(BadConfig):
            EncoderProblem(l, y, y, gamma=0.0)
        with pytest.raises(DimensionMismatch):
            EncoderProblem(l, y[:4], y)
        with pytest.raises(BadConfig):
            EncoderProblem(l, y, y, notion="parity")


class TestFairKernelEncoder:
    def test_fit_transform_shapes(self, rng):
        x = rng.normal(size=(50, 4))
        y = rng.integers(0, 2, size=50)
        s = rng.integers(0, 2, size=50)
        enc = FairKernelEncoder(lam=0.5, kernel=KernelConfig(rff_dim=32, seed=1))
        z = enc.fit(x, y, s).transform(x)
        assert z.shape == (50, 1)
        assert enc.eigenvalues_.shape == (1,)

    def test_linear_kernel_path(self, rng):
        x = rng.normal(size=(30, 5))
        y = rng.integers(0, 2, size=30)
        enc = FairKernelEncoder(kernel=KernelConfig(kind="linear"))
        z = enc.fit(x, y, y).transform(x)
        assert z.shape == (30, 1)

    def test_not_fitted(self, rng):
        with pytest.raises(NotFittedError):
            FairKernelEncoder().transform(rng.normal(size=(3, 2)))

    def test_new_rows_dimension_check(self, rng):
        x = rng.normal(size=(20, 3))
        y = rng.integers(0, 2, size=20)
        enc = FairKernelEncoder(kernel=KernelConfig(rff_dim=16)).fit(x, y, y)
        with pytest.raises(DimensionMismatch):
            enc.transform(rng.normal(size=(5, 4)))

    def test_delta_kernel_rejected(self, rng):
        x = rng.normal(size=(10, 2))
        y = rng.integers(0, 2, size=10)
        with pytest.raises(BadConfig):
            FairKernelEncoder(kernel=KernelConfig(kind="delta")).fit(x, y, y)

    def test_sklearn_clone(self):
        enc = FairKernelEncoder(lam=0.3, notion="eo", gamma=1e-3)
        dup = clone(enc)
        assert dup.get_params() == enc.get_params()
