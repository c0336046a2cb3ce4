#include <doctest.h>

#include <random>

#include "grf/functional.hpp"
#include "grf/rng.hpp"

using namespace grf;

namespace {

LatticeState small_flat(int N = 8) {
    LatticeGrid g;
    g.N = N;
    return flat_state(g);
}

/// Observed convergence order of the mismatch between the analytic first
/// variation and central differences of lambda, under eps halving.
template <class S>
double observed_fv_order(const S& s, const Tensor& gamma, double eps0, int halvings) {
    double analytic = first_variation(s, gamma);
    std::vector<double> errs;
    for (int k = 0; k <= halvings; ++k) {
        double eps = eps0 / (1 << k);
        double fd = (lambda_of(perturb(s, gamma, eps)) - lambda_of(perturb(s, gamma, -eps))) / (2.0 * eps);
        errs.push_back(std::abs(fd - analytic));
    }
    // least-squares slope of log err vs log eps
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (int k = 0; k <= halvings; ++k) {
        if (errs[k] < 1e-14) continue;  // roundoff floor
        double x = std::log(eps0 / (1 << k)), y = std::log(errs[k]);
        sx += x, sy += y, sxx += x * x, sxy += x * y, ++n;
    }
    if (n < 2) return 2.0;  // below roundoff everywhere: exact match
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_CASE("lambda on su(2): 3/2 - kappa^2/2, with normalized constant minimizer") {
    for (double kappa : {0.0, 0.5, 1.0}) {
        LambdaResult r = lambda_min(su2_state(kappa));
        CHECK(r.lambda == doctest::Approx(1.5 - 0.5 * kappa * kappa).epsilon(1e-13));
        CHECK(r.normalization_residual <= 1e-12);
    }
    CHECK(lambda_min(su2_state(1.0)).lambda == doctest::Approx(1.0));
}

TEST_CASE("lambda on the flat torus is zero with constant f") {
    LambdaResult r = lambda_min(small_flat());
    CHECK(std::abs(r.lambda) <= 1e-10);
    CHECK(r.normalization_residual <= 1e-10);
}

TEST_CASE("F equals 1 at the su(2) soliton and dominates lambda elsewhere") {
    HomogState s = with_minimizer(su2_state(1.0));
    CHECK(F_value(s) == doctest::Approx(1.0).epsilon(1e-13));

    // variational inequality: F(g,b,f~) >= lambda(g,b) for admissible f~
    for (double shift : {0.3, -0.2}) {
        HomogState t = su2_state(0.7);
        double lam = lambda_of(t);
        // admissible f~ must keep int e^{-f} dV = 1; constants other than the
        // minimizer are inadmissible, so compare against a rescaled volume form
        HomogState t2 = t;
        t2.fval = std::log(t.volume) + shift;
        double F = F_value(t2) * std::exp(shift);  // renormalize the measure
        CHECK(F >= lam - 1e-12);
    }
}

TEST_CASE("lambda is exactly invariant under structure-preserving basis permutations") {
    HomogState s = su2_state(0.8);
    // cyclic permutation (0,1,2) -> (1,2,0) preserves the eps structure constants
    int perm[3] = {1, 2, 0};
    Tensor g(3, 2, 1), b(3, 2, 1), H0(3, 3, 1);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) g.a[static_cast<std::size_t>(perm[i]) * 3 + perm[j]] = s.g.a[static_cast<std::size_t>(i) * 3 + j];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                H0.a[(static_cast<std::size_t>(perm[i]) * 3 + perm[j]) * 3 + perm[k]] =
                    s.H0.a[(static_cast<std::size_t>(i) * 3 + j) * 3 + k];
    HomogState sp(su2(), g, b, H0);
    CHECK(lambda_of(sp) == lambda_of(s));

    // and under a perturbed metric as well
    std::mt19937_64 eng(7);
    Tensor h = random_invariant(3, 2, Symmetry::symmetric, eng);
    HomogState s1 = perturb(s, h, 0.05);
    Tensor hp(3, 2, 1);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) hp.a[static_cast<std::size_t>(perm[i]) * 3 + perm[j]] = h.a[static_cast<std::size_t>(i) * 3 + j];
    HomogState s2 = perturb(sp, hp, 0.05);
    CHECK(lambda_of(s2) == doctest::Approx(lambda_of(s1)).epsilon(1e-14));
}

TEST_CASE("first variation matches central differences at order >= 2 on su(2)") {
    HomogState s = su2_state(0.9);
    std::mt19937_64 eng(11);
    for (int trial = 0; trial < 3; ++trial) {
        Tensor gamma = random_invariant(3, 2, Symmetry::none, eng);
        CHECK(observed_fv_order(s, gamma, 1e-3, 3) >= 1.9);
    }
    // identity direction, frozen cross-check of the analytic value:
    // lambda(kappa; g = c id) scaling makes d/dt lambda(g + t id) = -(R/3 - ...)
    Tensor id = identity_metric(3);
    double an = first_variation(s, id);
    double fd = (lambda_of(perturb(s, id, 1e-5)) - lambda_of(perturb(s, id, -1e-5))) / 2e-5;
    CHECK(an == doctest::Approx(fd).epsilon(1e-7));
}

TEST_CASE("first variation vanishes at solitons and along gauge directions") {
    HomogState sol = su2_state(1.0);
    std::mt19937_64 eng(13);
    for (int trial = 0; trial < 5; ++trial) {
        Tensor gamma = random_invariant(3, 2, Symmetry::none, eng);
        CHECK(std::abs(first_variation(sol, gamma)) <= 1e-12);
    }
    // diffeomorphism/B-field invariance: gauge directions are flat directions
    // of lambda at every state, soliton or not
    HomogState s = su2_state(0.9);
    for (int trial = 0; trial < 5; ++trial) {
        OneFormPair uv{random_invariant(3, 1, Symmetry::none, eng), random_invariant(3, 1, Symmetry::none, eng)};
        Tensor gauge = div_bar_star_f(s, uv);
        CHECK(std::abs(first_variation(s, gauge)) <= 1e-12);
        double fd = (lambda_of(perturb(s, gauge, 1e-4)) - lambda_of(perturb(s, gauge, -1e-4))) / 2e-4;
        CHECK(std::abs(fd) <= 1e-7);
    }
}

TEST_CASE("first variation on the lattice: trivial soliton base, FD error of order >= 2") {
    LatticeState flat = small_flat();
    std::mt19937_64 eng(17);
    for (int trial = 0; trial < 2; ++trial) {
        Tensor gamma = make_smooth_tensor(3, 2, Symmetry::none, flat.grid().L, eng).sample(*flat.tab);
        double analytic = first_variation(flat, gamma);
        CHECK(std::abs(analytic) <= 1e-9);
        double e1 = std::abs((lambda_of(perturb(flat, gamma, 1e-2)) - lambda_of(perturb(flat, gamma, -1e-2))) / 2e-2 -
                             analytic);
        double e2 = std::abs((lambda_of(perturb(flat, gamma, 5e-3)) - lambda_of(perturb(flat, gamma, -5e-3))) / 1e-2 -
                             analytic);
        CHECK(e1 / e2 > 3.0);
        CHECK(e1 / e2 < 5.5);
    }
}

TEST_CASE("eigenvalue identity residual is small and shrinks under refinement") {
    CHECK(lambda_identity_residual(su2_state(0.8)) <= 1e-12);
    auto res = [&](int N) {
        std::mt19937_64 e2(23);
        LatticeGrid gr;
        gr.N = N;
        auto tab = std::make_shared<const GridTables>(gr);
        Tensor g(3, 2, gr.pts());
        for (std::size_t p = 0; p < g.pts; ++p)
            for (int i = 0; i < 3; ++i) g.at(p, static_cast<std::size_t>(i) * 3 + i) = 1.0;
        Tensor gpert = make_smooth_tensor(3, 2, Symmetry::symmetric, gr.L, e2).sample(*tab);
        g.axpy(0.05, gpert);
        LatticeState s(tab, g, Tensor(3, 2, gr.pts()), Tensor(3, 3, gr.pts()), Tensor(3, 0, gr.pts()));
        return lambda_identity_residual(s);
    };
    double r16 = res(16), r32 = res(32);
    CHECK(r16 / r32 > 2.8);
    CHECK(r16 / r32 < 6.0);
}

TEST_CASE("lojasiewicz sampling: zero perturbation and bounded stable ratios") {
    HomogState sol = su2_state(1.0);
    auto rows1 = lojasiewicz_sample(sol, 1e-3, 20, 42);
    auto rows2 = lojasiewicz_sample(sol, 1e-2, 20, 43);
    REQUIRE(!rows1.empty());
    double m1 = 0.0, m2 = 0.0;
    for (auto& r : rows1) {
        CHECK(std::isfinite(r.ratio));
        m1 = std::max(m1, r.ratio);
    }
    for (auto& r : rows2) m2 = std::max(m2, r.ratio);
    CHECK(m1 / m2 < 2.0);
    CHECK(m2 / m1 < 2.0);
    // scaling perturbation: both sides scale linearly to leading order
    std::mt19937_64 eng(29);
    Tensor gamma = random_invariant(3, 2, Symmetry::none, eng);
    gamma *= 1.0 / norm_f(sol, gamma);
    auto side = [&](double eps) {
        HomogState p = with_minimizer(perturb(sol, gamma, eps));
        return std::pair<double, double>(std::sqrt(std::abs(lambda_of(p) - lambda_of(sol))), norm_f(p, rc_Hf(p)));
    };
    auto [l1, r1] = side(1e-3);
    auto [l2, r2] = side(2e-3);
    CHECK(l2 / l1 == doctest::Approx(2.0).epsilon(0.05));
    CHECK(r2 / r1 == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("transversality sampling refuses non-Einstein bases and is trivial on su(2)") {
    HomogState sol = su2_state(1.0);
    auto rows = transversality_sample(sol, 1e-2, 10, 47);
    for (auto& r : rows) CHECK(r.ratio == doctest::Approx(1.0).epsilon(1e-10));  // grad f = 0 invariantly
    CHECK_THROWS(transversality_sample(su2_state(0.9), 1e-2, 5, 48));
}
