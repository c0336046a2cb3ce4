#include <doctest.h>

#include <Eigen/Dense>
#include <numbers>
#include <random>

#include "grf/geometry.hpp"
#include "grf/lattice.hpp"
#include "grf/rng.hpp"

using namespace grf;

namespace {

LatticeGrid grid_n(int N, int order = 2, int dim = 3) {
    LatticeGrid g;
    g.dim = dim;
    g.N = N;
    g.stencil_order = order;
    return g;
}

Tensor sample_scalar(const SmoothScalar& s, const GridTables& tab) {
    SmoothTensor t;
    t.dim = tab.grid.dim;
    t.order = 0;
    t.comp = {s};
    return t.sample(tab);
}

/// Mildly perturbed state: g = id + amp*sym, b = amp*skew, H0 const 3-form,
/// f = amp*scalar.  The analytic fields are resolution independent.
struct SmoothStateSpec {
    SmoothTensor gs, bs, fs;
    double amp, kappa;
    LatticeState build(int N, int stencil = 2) const {
        LatticeGrid gr = grid_n(N, stencil);
        auto tab = std::make_shared<const GridTables>(gr);
        Tensor g = gs.sample(*tab);
        g *= amp;
        for (std::size_t p = 0; p < g.pts; ++p)
            for (int i = 0; i < 3; ++i) g.at(p, static_cast<std::size_t>(i) * 3 + i) += 1.0;
        Tensor b = bs.sample(*tab);
        b *= amp;
        Tensor f = fs.sample(*tab);
        f *= amp;
        Tensor H0(3, 3, gr.pts());
        for (std::size_t p = 0; p < H0.pts; ++p) {
            int perm[6][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}, {1, 0, 2}, {0, 2, 1}, {2, 1, 0}};
            double sgn[6] = {1, 1, 1, -1, -1, -1};
            for (int q = 0; q < 6; ++q)
                H0.at(p, (static_cast<std::size_t>(perm[q][0]) * 3 + perm[q][1]) * 3 + perm[q][2]) = sgn[q] * kappa;
        }
        return LatticeState(tab, g, b, H0, f);
    }
};

SmoothStateSpec make_spec(std::mt19937_64& eng, double amp, double kappa) {
    SmoothStateSpec sp;
    sp.gs = make_smooth_tensor(3, 2, Symmetry::symmetric, 2.0 * std::numbers::pi, eng);
    sp.bs = make_smooth_tensor(3, 2, Symmetry::skew, 2.0 * std::numbers::pi, eng);
    sp.fs = make_smooth_tensor(3, 0, Symmetry::none, 2.0 * std::numbers::pi, eng);
    sp.amp = amp;
    sp.kappa = kappa;
    return sp;
}

}  // namespace

TEST_CASE("partial_derivative: constants, stencil-order accuracy") {
    GridTables tab(grid_n(16));
    Tensor c(3, 0, tab.grid.pts());
    for (std::size_t p = 0; p < c.pts; ++p) c.at(p, 0) = 3.14;
    CHECK(partial_derivative(c, 0, tab).norm_inf() <= 1e-14);

    std::mt19937_64 eng(3);
    SmoothScalar s = make_smooth_scalar(3, tab.grid.L, eng);
    auto err_at = [&](int N, int stencil) {
        GridTables t(grid_n(N, stencil));
        Tensor u = sample_scalar(s, t);
        double e = 0.0;
        const int n = t.grid.N;
        const double h = t.grid.h();
        for (int axis = 0; axis < 3; ++axis) {
            Tensor du = partial_derivative(u, axis, t);
            std::size_t p = 0;
            for (int x = 0; x < n; ++x)
                for (int y = 0; y < n; ++y)
                    for (int z = 0; z < n; ++z, ++p) {
                        double xyz[3] = {x * h, y * h, z * h};
                        e = std::max(e, std::abs(du.at(p, 0) - s.eval_d(xyz, axis)));
                    }
        }
        return e;
    };
    double e16 = err_at(16, 2), e32 = err_at(32, 2);
    CHECK(e16 / e32 > 3.4);  // second order
    CHECK(e16 / e32 < 4.6);
    double f16 = err_at(16, 4), f32 = err_at(32, 4);
    CHECK(f16 / f32 > 13.0);  // fourth order
    CHECK(f16 / f32 < 19.0);
}

TEST_CASE("summation by parts: <D a, b> = -<a, D b> exactly") {
    GridTables tabs(grid_n(12));
    std::mt19937_64 eng(5);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    Tensor a(3, 0, tabs.grid.pts()), b(3, 0, tabs.grid.pts());
    for (std::size_t p = 0; p < a.pts; ++p) a.at(p, 0) = U(eng), b.at(p, 0) = U(eng);
    for (int axis = 0; axis < 3; ++axis) {
        Tensor da = partial_derivative(a, axis, tabs), db = partial_derivative(b, axis, tabs);
        double s1 = 0.0, s2 = 0.0;
        for (std::size_t p = 0; p < a.pts; ++p) s1 += da.at(p, 0) * b.at(p, 0), s2 += a.at(p, 0) * db.at(p, 0);
        CHECK(std::abs(s1 + s2) <= 1e-10 * a.pts);
    }
}

TEST_CASE("integrate_f: unit volume, exact divergence theorem and adjointness") {
    LatticeGrid gr = grid_n(16);
    gr.L = 1.0;  // unit volume
    LatticeState flat = flat_state(gr);
    Tensor one(3, 0, gr.pts());
    for (std::size_t p = 0; p < one.pts; ++p) one.at(p, 0) = 1.0;
    CHECK(flat.integrate(one) == doctest::Approx(1.0).epsilon(1e-13));

    // nonconstant f and g: the divergence-form Laplacian still integrates to zero
    std::mt19937_64 eng(17);
    LatticeState s = make_spec(eng, 0.2, 0.3).build(16);
    GridTables tab(grid_n(16));
    Tensor a = sample_scalar(make_smooth_scalar(3, s.grid().L, eng), tab);
    Tensor b = sample_scalar(make_smooth_scalar(3, s.grid().L, eng), tab);
    Tensor lap_a = laplace_sbp(s, a, s.w);
    CHECK(std::abs(s.integrate(lap_a)) <= 1e-10);
    Tensor lap_b = laplace_sbp(s, b, s.w);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t p = 0; p < a.pts; ++p) {
        lhs += lap_a.at(p, 0) * b.at(p, 0) * s.w.at(p, 0);
        rhs += a.at(p, 0) * lap_b.at(p, 0) * s.w.at(p, 0);
    }
    CHECK(std::abs(lhs - rhs) <= 1e-10);
}

TEST_CASE("lattice nabla: metric compatibility and d.d = 0 are exact") {
    std::mt19937_64 eng(29);
    LatticeState s = make_spec(eng, 0.15, 0.4).build(12);
    CHECK(s.nabla(s.g).norm_inf() <= 1e-12);

    SmoothTensor w1 = make_smooth_tensor(3, 1, Symmetry::none, s.grid().L, eng);
    Tensor omega = w1.sample(*s.tab);
    Tensor ddo = dext(s, dext(s, omega));
    CHECK(ddo.norm_inf() <= 1e-10);
    // and dext agrees with the plain coordinate alternation
    Tensor dc = d_coordinate(omega, *s.tab);
    Tensor dg = dext(s, omega);
    dg -= dc;
    CHECK(dg.norm_inf() <= 1e-11);
    // the derived H is closed by construction
    CHECK(dext(s, s.H).norm_inf() <= 1e-9);
}

TEST_CASE("flat curvature vanishes; perturbed curvature converges at stencil order") {
    LatticeState flat = flat_state(grid_n(8));
    CHECK(flat.riemann().norm_inf() == 0.0);
    CHECK(curvature(flat).Rsc.norm_inf() == 0.0);

    std::mt19937_64 eng(31);
    SmoothStateSpec sp = make_spec(eng, 0.05, 0.0);
    auto Rof = [&](int N) { return curvature(sp.build(N)).Rsc; };
    Tensor R16 = Rof(16), R32 = Rof(32), R64 = Rof(64);
    auto diff_coarse = [&](const Tensor& coarse, const Tensor& fine, int Nc) {
        double m = 0.0;
        std::size_t pc = 0;
        for (int x = 0; x < Nc; ++x)
            for (int y = 0; y < Nc; ++y)
                for (int z = 0; z < Nc; ++z, ++pc) {
                    std::size_t pf = (static_cast<std::size_t>(2 * x) * (2 * Nc) + 2 * y) * (2 * Nc) + 2 * z;
                    m = std::max(m, std::abs(coarse.at(pc, 0) - fine.at(pf, 0)));
                }
        return m;
    };
    double e1 = diff_coarse(R16, R32, 16), e2 = diff_coarse(R32, R64, 32);
    CHECK(e1 / e2 > 3.2);
    CHECK(e1 / e2 < 5.0);
}

TEST_CASE("ground_state: flat and constant potentials") {
    LatticeState flat = flat_state(grid_n(8));
    Tensor V(3, 0, flat.pts());
    GroundState gs = ground_state(flat, V);
    CHECK(std::abs(gs.lambda) <= 1e-10);
    double umin = 1e300, umax = -1e300;
    for (std::size_t p = 0; p < gs.u.pts; ++p) {
        umin = std::min(umin, gs.u.at(p, 0));
        umax = std::max(umax, gs.u.at(p, 0));
    }
    CHECK(umax - umin <= 1e-9);

    for (std::size_t p = 0; p < V.pts; ++p) V.at(p, 0) = -0.7;
    gs = ground_state(flat, V);
    CHECK(gs.lambda == doctest::Approx(-0.7).epsilon(1e-11));
    Tensor emf(3, 0, flat.pts());
    for (std::size_t p = 0; p < emf.pts; ++p) emf.at(p, 0) = std::exp(-gs.f.at(p, 0));
    CHECK(flat.integrate_raw(emf) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ground_state matches a dense eigensolver oracle at N = 8") {
    LatticeGrid gr = grid_n(8);
    LatticeState flat = flat_state(gr);
    std::mt19937_64 eng(41);
    GridTables tab(gr);
    Tensor V = sample_scalar(make_smooth_scalar(3, gr.L, eng), tab);

    const std::size_t np = gr.pts();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(np, np);
    Tensor e(3, 0, np);
    Tensor w0(3, 0, np);
    for (std::size_t p = 0; p < np; ++p) w0.at(p, 0) = 1.0;
    for (std::size_t j = 0; j < np; ++j) {
        for (std::size_t p = 0; p < np; ++p) e.at(p, 0) = (p == j) ? 1.0 : 0.0;
        Tensor lap = laplace_sbp(flat, e, w0);
        for (std::size_t i = 0; i < np; ++i) A(i, j) = -4.0 * lap.at(i, 0) + ((i == j) ? V.at(j, 0) : 0.0);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    double lam_dense = es.eigenvalues().minCoeff();

    GroundState gs = ground_state(flat, V);
    CHECK(gs.lambda == doctest::Approx(lam_dense).epsilon(1e-9));

    // variational bound: the ground eigenvalue sits below any trial quotient
    Tensor trial = sample_scalar(make_smooth_scalar(3, gr.L, eng), tab);
    for (std::size_t p = 0; p < np; ++p) trial.at(p, 0) += 2.0;
    Tensor lapt = laplace_sbp(flat, trial, w0);
    double num = 0.0, den = 0.0;
    for (std::size_t p = 0; p < np; ++p) {
        num += (-4.0 * lapt.at(p, 0) + V.at(p, 0) * trial.at(p, 0)) * trial.at(p, 0);
        den += trial.at(p, 0) * trial.at(p, 0);
    }
    CHECK(gs.lambda <= num / den + 1e-10);
}

TEST_CASE("grid validation") {
    CHECK_THROWS(grid_n(4).validate());
    CHECK_THROWS(grid_n(16, 3).validate());
    LatticeGrid g5;
    g5.dim = 5;
    CHECK_THROWS(g5.validate());
}
