#include <doctest.h>

#include <numbers>
#include <random>

#include "grf/functional.hpp"
#include "grf/geometry.hpp"
#include "grf/homogeneous.hpp"
#include "grf/lattice.hpp"
#include "grf/rng.hpp"

using namespace grf;

namespace {

LatticeState random_lattice_state(std::mt19937_64& eng, int N, double amp, double kappa, int stencil = 2) {
    LatticeGrid gr;
    gr.N = N;
    gr.stencil_order = stencil;
    auto tab = std::make_shared<const GridTables>(gr);
    Tensor g = make_smooth_tensor(3, 2, Symmetry::symmetric, gr.L, eng).sample(*tab);
    g *= amp;
    for (std::size_t p = 0; p < g.pts; ++p)
        for (int i = 0; i < 3; ++i) g.at(p, static_cast<std::size_t>(i) * 3 + i) += 1.0;
    Tensor b = make_smooth_tensor(3, 2, Symmetry::skew, gr.L, eng).sample(*tab);
    b *= amp;
    Tensor f = make_smooth_tensor(3, 0, Symmetry::none, gr.L, eng).sample(*tab);
    f *= amp;
    Tensor H0(3, 3, gr.pts());
    int perm[6][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}, {1, 0, 2}, {0, 2, 1}, {2, 1, 0}};
    double sgn[6] = {1, 1, 1, -1, -1, -1};
    for (std::size_t p = 0; p < H0.pts; ++p)
        for (int q = 0; q < 6; ++q)
            H0.at(p, (static_cast<std::size_t>(perm[q][0]) * 3 + perm[q][1]) * 3 + perm[q][2]) = sgn[q] * kappa;
    return LatticeState(tab, g, b, H0, f);
}

template <class S>
double trace_identity_residual(const S& s) {
    CurvaturePack P = curvature(s);
    Tensor rp = P.Rp;
    rp.axpy(-1.0, P.Rsc);
    rp.axpy(0.25, P.normH2);
    double m = rp.norm_inf();
    Tensor rcp = P.Rcp;
    rcp.axpy(-1.0, P.Rc);
    rcp.axpy(0.25, P.H2);
    rcp.axpy(0.5, P.dstarH);
    return std::max(m, rcp.norm_inf());
}

template <class S>
std::pair<double, double> rmp_pair_antisymmetry(const S& s) {
    CurvaturePack P = curvature(s);
    const int n = s.n();
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t q = 0; q < s.pts(); ++q) {
        const double* r = P.Rmp.pt(q);
        auto at = [&](int i, int j, int k, int l) {
            return r[((static_cast<std::size_t>(i) * n + j) * n + k) * n + l];
        };
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l) {
                        m1 = std::max(m1, std::abs(at(i, j, k, l) + at(j, i, k, l)));
                        m2 = std::max(m2, std::abs(at(i, j, k, l) + at(i, j, l, k)));
                    }
    }
    return {m1, m2};
}

LatticeState small_flat(int N = 8) {
    LatticeGrid g;
    g.N = N;
    return flat_state(g);
}

}  // namespace

TEST_CASE("Bismut trace identities hold to 1e-12 homogeneous, 1e-8 lattice") {
    for (double kappa : {0.0, 0.5, 1.0}) CHECK(trace_identity_residual(su2_state(kappa)) <= 1e-12);
    CHECK(trace_identity_residual(hopf_state()) <= 1e-12);
    std::mt19937_64 eng(57);
    CHECK(trace_identity_residual(random_lattice_state(eng, 16, 0.1, 0.5)) <= 1e-8);
}

TEST_CASE("Rm^+ is antisymmetric in the first and last pairs") {
    auto [a1, a2] = rmp_pair_antisymmetry(su2_state(0.8));
    CHECK(a1 <= 1e-12);
    CHECK(a2 <= 1e-12);
    auto [h1, h2] = rmp_pair_antisymmetry(hopf_state());
    CHECK(std::max(h1, h2) <= 1e-12);
    // lattice: first pair is algebraic, last pair is a metric-compatibility
    // consequence and converges at stencil order
    auto defect = [&](int N) {
        std::mt19937_64 e2(59);
        return rmp_pair_antisymmetry(random_lattice_state(e2, N, 0.05, 0.3));
    };
    auto [f16, l16] = defect(16);
    auto [f32, l32] = defect(32);
    CHECK(f16 <= 1e-12);
    CHECK(f32 <= 1e-12);
    CHECK(l16 / l32 > 3.0);
    CHECK(l16 / l32 < 5.5);
}

TEST_CASE("Bismut Bianchi identity: exact on invariant states") {
    for (double kappa : {0.0, 0.5, 1.0, 1.7}) CHECK(bianchi_residual(su2_state(kappa)) <= 1e-12);
    CHECK(bianchi_residual(hopf_state()) <= 1e-12);
    CHECK(bianchi_residual(abelian_state(3)) == 0.0);
}

TEST_CASE("Bismut Bianchi identity: second-order grid convergence") {
    auto mk = [&](int N, double amp) {
        std::mt19937_64 e2(71);
        return random_lattice_state(e2, N, amp, 1.0);
    };
    double r16 = bianchi_residual(mk(16, 1e-5));
    double r32 = bianchi_residual(mk(32, 1e-5));
    CHECK(r16 <= 1e-6);
    CHECK(r16 / r32 > 3.2);
    CHECK(r16 / r32 < 5.0);
}

TEST_CASE("direct and assembled Bismut curvature agree at stencil order") {
    auto diff = [&](int N) {
        std::mt19937_64 e2(73);
        LatticeState s = random_lattice_state(e2, N, 0.02, 0.5);
        Tensor d = bismut_riemann_direct(s);
        d -= curvature(s).Rmp;
        return d.norm_inf();
    };
    double d16 = diff(16), d32 = diff(32);
    CHECK(d16 / d32 > 3.0);
    CHECK(d16 / d32 < 5.5);
}

TEST_CASE("Bismut derivatives: metric compatibility, H = 0 reduction, parallel torsion") {
    HomogState s = su2_state(1.0);
    CHECK(nabla_conn(s, s.g, Conn::plus).norm_inf() <= 1e-13);
    CHECK(nabla_conn(s, s.g, Conn::minus).norm_inf() <= 1e-13);
    CHECK(nabla_conn(s, s.H, Conn::plus).norm_inf() <= 1e-13);  // Bismut-flat

    std::mt19937_64 eng(83);
    HomogState flat = abelian_state(3);
    Tensor T = random_invariant(3, 2, Symmetry::none, eng);
    Tensor d = nabla_conn(flat, T, Conn::plus);
    d -= flat.nabla(T);
    CHECK(d.norm_inf() == 0.0);

    LatticeState lflat = small_flat();
    CHECK(nabla_conn(lflat, lflat.g, Conn::plus).norm_inf() <= 1e-13);
}

TEST_CASE("twisted Bakry-Emery tensor: flat zero, su(2) residual (1-kappa^2)/2 id") {
    CHECK(rc_Hf(small_flat()).norm_inf() == 0.0);
    for (double kappa : {0.9, 1.0, 0.5}) {
        HomogState s = with_minimizer(su2_state(kappa));
        Tensor r = rc_Hf(s);
        double expect = 0.5 * (1.0 - kappa * kappa);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                CHECK(r.a[static_cast<std::size_t>(i) * 3 + j] ==
                      doctest::Approx(i == j ? expect : 0.0).epsilon(1e-12));
    }
}

TEST_CASE("soliton residual: su(2) vanishes exactly iff kappa = +-1") {
    for (double kappa : {1.0, -1.0}) {
        auto [rg, rb] = soliton_residual(with_minimizer(su2_state(kappa)));
        CHECK(rg <= 1e-12);
        CHECK(rb <= 1e-12);
    }
    for (double kappa : {0.0, 0.9, 1.1}) {
        auto [rg, rb] = soliton_residual(with_minimizer(su2_state(kappa)));
        CHECK(rg > 1e-3);
        CHECK(rb <= 1e-12);
    }
    auto [rg, rb] = soliton_residual(small_flat());
    CHECK(rg == 0.0);
    CHECK(rb == 0.0);
}

TEST_CASE("d^* sign contract: <dK, H> = 3 <K, d^*H> under the unweighted pairing") {
    std::mt19937_64 eng(89);
    HomogState s = su2_state(0.7);
    Tensor K = random_invariant(3, 2, Symmetry::skew, eng);
    Tensor H = random_invariant(3, 3, Symmetry::form, eng);
    double lhs = s.integrate_raw(inner_pt(s, dext(s, K), H));
    double rhs = 3.0 * s.integrate_raw(inner_pt(s, K, dstar0(s, H)));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("f-twisted operators are mutually adjoint where the measure is exact") {
    HomogState s = su2_state(0.6);
    std::mt19937_64 eng(97);
    Tensor Tsym = random_invariant(3, 2, Symmetry::symmetric, eng);
    Tensor X = random_invariant(3, 1, Symmetry::none, eng);
    double lhs = inner_f(s, div_f(s, Tsym), X);
    double rhs = inner_f(s, Tsym, sym2(s.nabla(X)));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));

    LatticeGrid gr;
    gr.N = 12;
    LatticeState fl = flat_state(gr);
    Tensor Tf = make_smooth_tensor(3, 2, Symmetry::symmetric, gr.L, eng).sample(*fl.tab);
    Tensor Xf = make_smooth_tensor(3, 1, Symmetry::none, gr.L, eng).sample(*fl.tab);
    double l2 = inner_f(fl, div_f(fl, Tf), Xf);
    double r2 = inner_f(fl, Tf, sym2(fl.nabla(Xf)));
    CHECK(l2 == doctest::Approx(r2).epsilon(1e-10));

    Tensor sc = make_smooth_tensor(3, 0, Symmetry::none, gr.L, eng).sample(*fl.tab);
    Tensor h = hodge_f(fl, sc);
    h -= laplace_f(fl, sc);
    CHECK(h.norm_inf() <= 1e-10);  // hodge_f on functions is Delta_f
}

TEST_CASE("lattice adjointness defect shrinks at stencil order on curved states") {
    auto defect = [&](int N) {
        std::mt19937_64 e2(101);
        LatticeState s = random_lattice_state(e2, N, 0.1, 0.0);
        Tensor T = make_smooth_tensor(3, 2, Symmetry::symmetric, s.grid().L, e2).sample(*s.tab);
        Tensor X = make_smooth_tensor(3, 1, Symmetry::none, s.grid().L, e2).sample(*s.tab);
        return std::abs(inner_f(s, div_f(s, T), X) - inner_f(s, T, sym2(s.nabla(X))));
    };
    double d16 = defect(16), d32 = defect(32);
    CHECK(d16 / d32 > 3.0);
    CHECK(d16 / d32 < 5.5);
}
